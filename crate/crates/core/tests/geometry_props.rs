mod common;

use common::{angle, random_simplex, rng};
use hypercsi::geometry::*;
use nalgebra::{dvector, DMatrix, DVector};
use proptest::prelude::*;

// direct projection onto the orthogonal complement of span{a_k - a_j : k != i, j},
// applied to a_j - a_i, via the normal equations
fn projector_normal(vs: &[DVector<f64>], i: usize, j: usize) -> DVector<f64> {
    let cols: Vec<DVector<f64>> = (0..vs.len())
        .filter(|&k| k != i && k != j)
        .map(|k| &vs[k] - &vs[j])
        .collect();
    let d = &vs[j] - &vs[i];
    if cols.is_empty() {
        return d;
    }
    let p = DMatrix::from_columns(&cols);
    let gram = p.transpose() * &p;
    let coef = gram.lu().solve(&(p.transpose() * &d)).unwrap();
    d - p * coef
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vertices_survive_hyperplane_round_trip(n in 2usize..=8, seed in any::<u64>()) {
        let vs = random_simplex(n, &mut rng(seed));
        let simplex = SimplexVertices::new(vs.clone()).unwrap();
        let planes = facet_hyperplanes(&simplex).unwrap();
        let back = reconstruct_vertices(&planes).unwrap();
        let scale = vs.iter().map(|v| v.amax()).fold(0.0, f64::max);
        for (a, b) in vs.iter().zip(back.vertices()) {
            prop_assert!((a - b).amax() / scale < 1e-8);
        }
    }

    #[test]
    fn normals_point_outward(n in 2usize..=8, seed in any::<u64>()) {
        let vs = random_simplex(n, &mut rng(seed));
        let scale = vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..n {
            let b = normal_from_vertices(&vs, i).unwrap();
            let eps = 1e-9 * b.norm() * scale;
            for k in (0..n).filter(|&k| k != i) {
                prop_assert!(b.dot(&vs[i]) < b.dot(&vs[k]) - eps);
            }
        }
    }

    #[test]
    fn normal_direction_does_not_depend_on_j(n in 2usize..=8, seed in any::<u64>()) {
        let vs = random_simplex(n, &mut rng(seed));
        for i in 0..n {
            let b = normal_from_vertices(&vs, i).unwrap();
            for j in (0..n).filter(|&j| j != i) {
                let other = projector_normal(&vs, i, j);
                prop_assert!(angle(&b, &other) < 1e-10, "i={} j={} angle={}", i, j, angle(&b, &other));
            }
        }
    }

    #[test]
    fn normal_is_orthogonal_to_its_facet(n in 3usize..=8, seed in any::<u64>()) {
        let vs = random_simplex(n, &mut rng(seed));
        for i in 0..n {
            let b = normal_from_vertices(&vs, i).unwrap();
            let facet: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            for w in facet.windows(2) {
                let d = &vs[w[1]] - &vs[w[0]];
                prop_assert!(b.dot(&d).abs() <= 1e-10 * b.norm() * d.norm());
            }
        }
    }

    #[test]
    fn volume_ignores_order_and_translation(n in 2usize..=8, seed in any::<u64>(), shift in prop::collection::vec(-5.0f64..5.0, 7)) {
        let mut r = rng(seed);
        let vs = random_simplex(n, &mut r);
        let v0 = simplex_volume(&SimplexVertices::new(vs.clone()).unwrap());
        let mut rotated = vs.clone();
        rotated.rotate_left(1);
        rotated.swap(0, n - 1);
        let v1 = simplex_volume(&SimplexVertices::new(rotated).unwrap());
        let t = DVector::from_iterator(n - 1, shift.iter().copied().take(n - 1));
        let moved: Vec<DVector<f64>> = vs.iter().map(|v| v + &t).collect();
        let v2 = simplex_volume(&SimplexVertices::new(moved).unwrap());
        prop_assert!(v0 > 0.0);
        prop_assert!((v0 - v1).abs() <= 1e-10 * v0);
        prop_assert!((v0 - v2).abs() <= 1e-9 * v0);
    }

    #[test]
    fn origin_variant_matches_vertex_formula(n in 2usize..=8, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        // put the origin where vertex i sits: the two formulas then describe the same simplex
        let mut vs = random_simplex(n, &mut rng(seed));
        let i = pick.index(n);
        let shift = vs[i].clone();
        for v in vs.iter_mut() {
            *v -= &shift;
        }
        let points: Vec<DVector<f64>> = (0..n).filter(|&k| k != i).map(|k| vs[k].clone()).collect();
        let a = normal_from_points_with_origin(&points, i).unwrap();
        let b = normal_from_vertices(&vs, i).unwrap();
        prop_assert!(angle(&a, &b) < 1e-10);
    }
}

#[test]
fn points_on_a_shifted_line() {
    // x + y = 0.5 with the origin on the interior side
    let pts = vec![dvector![0.5, 0.0], dvector![0.1, 0.4]];
    let b = normal_from_points_with_origin(&pts, 0).unwrap();
    let d = &pts[1] - &pts[0];
    assert!(b.dot(&d).abs() < 1e-14 * b.norm() * d.norm());
    assert!(angle(&b, &dvector![1.0, 1.0]) < 1e-12);
}

#[test]
fn distance_matches_fact() {
    let plane = Hyperplane::new(dvector![3.0, 4.0], 5.0).unwrap();
    assert!((point_to_hyperplane_distance(&dvector![0.0, 0.0], &plane).unwrap() - 1.0).abs() < 1e-15);
    assert!((point_to_hyperplane_distance(&dvector![3.0, 4.0], &plane).unwrap() - 4.0).abs() < 1e-14);
}
