//! RMS angle errors between true and estimated endmembers or abundance maps,
//! minimized over the matching of estimates to truths.

use nalgebra::{DMatrix, DVectorView};
use serde::Serialize;

use crate::error::{Error, Result};

/// Angle between two nonzero vectors in radians, in `[0, pi]`; `acos` of the cosine similarity.
pub fn spectral_angle(a: DVectorView<'_, f64>, b: DVectorView<'_, f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    // 2 atan2(|u - w|, |u + w|) equals acos(u.w) for unit u, w but keeps full
    // precision near 0 and pi, where acos of a rounded cosine does not
    let u = a / na;
    let w = b / nb;
    Ok(2.0 * (&u - &w).norm().atan2((&u + &w).norm()))
}

/// Optimal matching of truth columns to estimate columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleReport {
    /// RMS angle of the best matching, in degrees.
    pub rms_deg: f64,
    /// `permutation[i]`: estimate column matched to truth column `i`.
    pub permutation: Vec<usize>,
    /// Per-truth-column angle under the matching, in degrees.
    pub angles_deg: Vec<f64>,
}

/// Column-wise RMS angle error under the best permutation.
pub fn rms_angle_report(truth: &DMatrix<f64>, estimate: &DMatrix<f64>) -> Result<AngleReport> {
    if truth.shape() != estimate.shape() {
        return Err(Error::ShapeMismatch {
            left: truth.shape(),
            right: estimate.shape(),
        });
    }
    let n = truth.ncols();
    let mut angles = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            angles[(i, j)] = spectral_angle(truth.column(i), estimate.column(j))?;
        }
    }
    let cost = angles.map(|a| a * a);
    let permutation = match_permutation(&cost);
    let total: f64 = permutation.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    let rms = if n == 0 { 0.0 } else { (total / n as f64).sqrt() };
    Ok(AngleReport {
        rms_deg: rms.to_degrees(),
        angles_deg: permutation
            .iter()
            .enumerate()
            .map(|(i, &j)| angles[(i, j)].to_degrees())
            .collect(),
        permutation,
    })
}

/// Endmember RMS spectral angle error in degrees; inputs are `M x N`.
pub fn phi_en(true_spectra: &DMatrix<f64>, est_spectra: &DMatrix<f64>) -> Result<f64> {
    Ok(rms_angle_report(true_spectra, est_spectra)?.rms_deg)
}

/// Abundance-map RMS angle error in degrees; inputs are `L x N`, one map per column.
pub fn phi_ab(true_maps: &DMatrix<f64>, est_maps: &DMatrix<f64>) -> Result<f64> {
    if true_maps.shape() != est_maps.shape() {
        return Err(Error::ShapeMismatch {
            left: true_maps.shape(),
            right: est_maps.shape(),
        });
    }
    for (i, c) in true_maps.column_iter().enumerate() {
        if c.norm() == 0.0 {
            return Err(Error::ZeroMap(i));
        }
    }
    for (i, c) in est_maps.column_iter().enumerate() {
        if c.norm() == 0.0 {
            return Err(Error::ZeroMap(i));
        }
    }
    phi_en(true_maps, est_maps)
}

/// Minimum-cost assignment for a square cost matrix (Hungarian method with potentials).
///
/// Returns `p` with row `i` assigned to column `p[i]`.
pub fn match_permutation(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "cost matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; index 0 is the virtual start column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[(r - 1, col - 1)] - u[r] - v[col];
                if reduced < minv[col] {
                    minv[col] = reduced;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}
