mod common;

use common::rng;
use hypercsi::metrics::*;
use itertools::Itertools;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn brute_force(cost: &DMatrix<f64>) -> f64 {
    let n = cost.nrows();
    (0..n)
        .permutations(n)
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn assignment_cost(cost: &DMatrix<f64>, p: &[usize]) -> f64 {
    p.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum()
}

proptest! {
    #[test]
    fn phi_en_ignores_order_and_positive_scale(m in 3usize..30, n in 1usize..7, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = DMatrix::from_fn(m, n, |_, _| r.random_range(0.01..1.0));
        let perm: Vec<usize> = {
            let mut p: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                p.swap(i, r.random_range(0..=i));
            }
            p
        };
        let shuffled = DMatrix::from_fn(m, n, |i, j| a[(i, perm[j])] * (1.0 + 9.0 * (perm[j] as f64 / n as f64)));
        prop_assert!(phi_en(&a, &shuffled).unwrap() < 1e-10);
        let report = rms_angle_report(&a, &shuffled).unwrap();
        for (i, &j) in report.permutation.iter().enumerate() {
            prop_assert_eq!(perm[j], i);
        }
    }

    #[test]
    fn phi_en_is_symmetric(m in 3usize..30, n in 1usize..7, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = DMatrix::from_fn(m, n, |_, _| r.random_range(0.01..1.0));
        let b = DMatrix::from_fn(m, n, |_, _| r.random_range(0.01..1.0));
        let ab = phi_en(&a, &b).unwrap();
        let ba = phi_en(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=180.0).contains(&ab));
    }

    #[test]
    fn hungarian_matches_brute_force(n in 1usize..=8, seed in any::<u64>(), integer in any::<bool>()) {
        let mut r = rng(seed);
        // integer costs force many ties
        let cost = DMatrix::from_fn(n, n, |_, _| if integer { r.random_range(0..4) as f64 } else { r.random_range(0.0..1.0) });
        let p = match_permutation(&cost);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        prop_assert!((assignment_cost(&cost, &p) - brute_force(&cost)).abs() < 1e-12);
    }
}

#[test]
fn angle_is_accurate_near_zero_and_pi() {
    let a = nalgebra::dvector![1.0, 0.0];
    let tiny = nalgebra::dvector![1.0, 1e-9];
    assert!((spectral_angle(a.as_view(), tiny.as_view()).unwrap() - 1e-9).abs() < 1e-20);
    let opposite = -&a;
    assert!((spectral_angle(a.as_view(), opposite.as_view()).unwrap() - std::f64::consts::PI).abs() < 1e-15);
}
