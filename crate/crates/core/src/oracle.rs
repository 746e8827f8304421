//! Brute-force references for checking the estimator at small scale.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dimred::DrDataset;
use crate::error::{Error, Result};
use crate::geometry::{simplex_volume, SimplexVertices};

/// Largest pixel count accepted by [`max_volume_subset`].
pub const MAX_SUBSET_PIXELS: usize = 25;

/// Slack allowed when testing whether a pixel lies inside a simplex.
pub const ENCLOSURE_SLACK: f64 = 1e-9;

/// Fully constrained least squares by enumerating every face of the simplex.
///
/// For each nonempty vertex subset the equality-constrained problem
/// `min |x - V_S s|, 1's = 1` is solved through its KKT system; the best solution
/// with all weights nonnegative wins. Exact, but `O(2^N)`.
pub fn fcls_solve(pixel: &DVector<f64>, vertices: &SimplexVertices) -> Result<DVector<f64>> {
    if pixel.len() != vertices.dim() {
        return Err(Error::DimensionMismatch {
            expected: vertices.dim(),
            got: pixel.len(),
        });
    }
    if !vertices.is_affinely_independent() {
        return Err(Error::DegenerateSimplex);
    }
    let n = vertices.len();
    let vs = vertices.vertices();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let face: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let Some(weights) = face_solve(pixel, vs, &face) else {
            continue;
        };
        if weights.iter().any(|&w| w < -1e-12) {
            continue;
        }
        let mut full = DVector::zeros(n);
        for (&k, &w) in face.iter().zip(weights.iter()) {
            full[k] = w.max(0.0);
        }
        let sum = full.sum();
        full /= sum;
        let fit: DVector<f64> = vs.iter().zip(full.iter()).map(|(v, &w)| v * w).sum();
        let residual = (pixel - fit).norm_squared();
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, full));
        }
    }
    best.map(|(_, s)| s).ok_or(Error::DegenerateSimplex)
}

fn face_solve(pixel: &DVector<f64>, vs: &[DVector<f64>], face: &[usize]) -> Option<DVector<f64>> {
    let k = face.len();
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for (a, &ia) in face.iter().enumerate() {
        for (b, &ib) in face.iter().enumerate() {
            kkt[(a, b)] = vs[ia].dot(&vs[ib]);
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
        rhs[a] = vs[ia].dot(pixel);
    }
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    Some(sol.rows(0, k).into_owned())
}

/// Indices of the `n` pixels spanning the largest simplex, by exhaustive search.
///
/// Ties keep the lexicographically first subset.
pub fn max_volume_subset(dr: &DrDataset, n: usize) -> Result<Vec<usize>> {
    let l = dr.len();
    if l > MAX_SUBSET_PIXELS {
        return Err(Error::TooManyPixels {
            limit: MAX_SUBSET_PIXELS,
            got: l,
        });
    }
    if l < n {
        return Err(Error::TooFewPixels { needed: n, got: l });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in (0..l).combinations(n) {
        let simplex = SimplexVertices::new(subset.iter().map(|&k| dr.pixel(k)).collect())?;
        let vol = simplex_volume(&simplex);
        if best.as_ref().is_none_or(|(v, _)| vol > *v) {
            best = Some((vol, subset));
        }
    }
    Ok(best.map(|(_, s)| s).unwrap_or_default())
}

/// Barycentric coordinates of every pixel (columns) with respect to the simplex.
fn barycentric(dr: &DrDataset, simplex: &SimplexVertices) -> Option<DMatrix<f64>> {
    let n = simplex.len();
    let m = DMatrix::from_fn(n, n, |r, c| if r + 1 == n { 1.0 } else { simplex.vertices()[c][r] });
    let mut rhs = DMatrix::from_element(n, dr.len(), 1.0);
    rhs.rows_mut(0, n - 1).copy_from(&dr.pixels);
    m.lu().solve(&rhs)
}

fn first_outside(dr: &DrDataset, simplex: &SimplexVertices) -> Option<usize> {
    match barycentric(dr, simplex) {
        None => Some(0),
        Some(coords) => coords
            .column_iter()
            .position(|c| c.iter().any(|&w| w < -ENCLOSURE_SLACK)),
    }
}

/// Falsification probe of local volume optimality.
///
/// Each trial jitters every vertex by Gaussian noise whose scale is drawn
/// log-uniformly between 1e-4 and 1e-1 of the mean edge length. Returns `false` as
/// soon as a jittered simplex still encloses the data with a smaller volume.
pub fn min_volume_check<R: Rng + ?Sized>(
    dr: &DrDataset,
    candidate: &SimplexVertices,
    trials: usize,
    rng: &mut R,
) -> Result<bool> {
    if dr.dim() != candidate.dim() {
        return Err(Error::DimensionMismatch {
            expected: candidate.dim(),
            got: dr.dim(),
        });
    }
    if let Some(pixel) = first_outside(dr, candidate) {
        return Err(Error::NotEnclosing { pixel });
    }
    let base_volume = simplex_volume(candidate);
    let vs = candidate.vertices();
    let n = vs.len();
    let edges: Vec<f64> = (0..n)
        .tuple_combinations()
        .map(|(a, b)| (&vs[a] - &vs[b]).norm())
        .collect();
    let mean_edge = edges.iter().sum::<f64>() / edges.len() as f64;

    for _ in 0..trials {
        let exponent: f64 = rng.random_range(-4.0..-1.0);
        let scale = mean_edge * 10f64.powf(exponent);
        let jittered: Vec<DVector<f64>> = vs
            .iter()
            .map(|v| v.map(|x| x + scale * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let trial = SimplexVertices::new(jittered)?;
        if simplex_volume(&trial) < base_volume && first_outside(dr, &trial).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}
