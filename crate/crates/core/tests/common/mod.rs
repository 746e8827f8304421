#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<R: Rng>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Gaussian simplex of `n` vertices in `n - 1` dimensions, redrawn until its
/// edge matrix is reasonably conditioned.
pub fn random_simplex<R: Rng>(n: usize, rng: &mut R) -> Vec<DVector<f64>> {
    loop {
        let vs: Vec<DVector<f64>> = (0..n).map(|_| gaussian_vector(n - 1, rng)).collect();
        if n == 1 {
            return vs;
        }
        let edges = DMatrix::from_columns(&vs[1..].iter().map(|v| v - &vs[0]).collect::<Vec<_>>());
        let sv = edges.singular_values();
        if sv.min() > 0.05 * sv.max() {
            return vs;
        }
    }
}

/// Angle in radians, computed without `acos` so tiny angles keep their precision.
pub fn angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let u = a / a.norm();
    let w = b / b.norm();
    2.0 * (&u - &w).norm().atan2((&u + &w).norm())
}

/// Barycentric coordinates of `x` with respect to a full simplex.
pub fn barycentric(vertices: &[DVector<f64>], x: &DVector<f64>) -> DVector<f64> {
    let n = vertices.len();
    let m = DMatrix::from_fn(n, n, |r, c| if r + 1 == n { 1.0 } else { vertices[c][r] });
    let mut rhs = DVector::from_element(n, 1.0);
    rhs.rows_mut(0, n - 1).copy_from(x);
    m.lu().solve(&rhs).expect("nondegenerate simplex")
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}
