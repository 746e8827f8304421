//! Successive projection algorithm for picking the `N` purest pixels.

use nalgebra::DMatrix;

use crate::dimred::DrDataset;
use crate::error::{Error, Result};
use crate::geometry::RANK_TOL;

/// Indices of `n_endmembers` pixels chosen by successive projection.
///
/// Each DR pixel is augmented with a trailing constant 1 so that the selection
/// follows the affine geometry of the (mean-centred) data. At every step the
/// pixel with the largest residual norm is picked (smallest index on ties) and
/// all residuals are projected onto the orthogonal complement of that pixel's
/// residual.
pub fn select_purest(dr: &DrDataset, n_endmembers: usize) -> Result<Vec<usize>> {
    let l = dr.len();
    if l < n_endmembers {
        return Err(Error::TooFewPixels {
            needed: n_endmembers,
            got: l,
        });
    }
    let dim = dr.dim();
    let mut residual = DMatrix::from_fn(dim + 1, l, |r, c| {
        if r == dim {
            1.0
        } else {
            dr.pixels[(r, c)]
        }
    });

    let mut selected = Vec::with_capacity(n_endmembers);
    let mut first_norm = 0.0;
    for step in 0..n_endmembers {
        let (best, best_sq) = residual
            .column_iter()
            .map(|c| c.norm_squared())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (n, v)| if v > acc.1 { (n, v) } else { acc });
        let norm = best_sq.sqrt();
        if step == 0 {
            first_norm = norm;
        }
        if !(norm > RANK_TOL * first_norm) || norm == 0.0 {
            return Err(Error::DegenerateData {
                needed: n_endmembers,
            });
        }
        selected.push(best);

        let u = residual.column(best) / norm;
        let coeffs = u.tr_mul(&residual);
        residual.ger(-1.0, &u, &coeffs.transpose(), 1.0);
    }
    Ok(selected)
}
