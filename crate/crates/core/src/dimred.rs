//! Affine set fitting.
//!
//! The data are represented in an `(N-1)`-dimensional affine coordinate system
//! `x = C a + d`, where `d` is the data mean and the orthonormal columns of `C`
//! are the principal eigenvectors of the scatter matrix of the mean-removed data.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dataset::SpectralDataset;
use crate::error::{Error, Result};

/// Eigenvalues at or below this fraction of the largest one count as missing rank.
pub const EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineSetModel {
    /// `M x (N-1)` with orthonormal columns.
    pub basis: DMatrix<f64>,
    /// Data mean, length `M`.
    pub mean: DVector<f64>,
    pub n_endmembers: usize,
    /// The `N-1` retained eigenvalues of the scatter matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Largest eigenvalue of the scatter matrix (for the rank diagnostic).
    pub leading_eigenvalue: f64,
}

impl AffineSetModel {
    pub fn n_bands(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// True when fewer than `N-1` eigenvalues clear [`EIGEN_TOL`].
    pub fn is_rank_deficient(&self) -> bool {
        let floor = EIGEN_TOL * self.leading_eigenvalue;
        self.leading_eigenvalue <= 0.0 || self.eigenvalues.iter().any(|&l| l <= floor)
    }
}

/// Dimension-reduced pixels, one column per pixel (`(N-1) x L`).
#[derive(Debug, Clone, PartialEq)]
pub struct DrDataset {
    pub pixels: DMatrix<f64>,
}

impl DrDataset {
    pub fn new(pixels: DMatrix<f64>) -> Self {
        Self { pixels }
    }

    pub fn from_points(points: &[DVector<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self::new(DMatrix::from_columns(points)))
    }

    pub fn dim(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn len(&self) -> usize {
        self.pixels.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.ncols() == 0
    }

    pub fn pixel(&self, n: usize) -> DVector<f64> {
        self.pixels.column(n).into_owned()
    }

    /// Largest pixel norm; the data diameter lies between this and twice this
    /// when the data are mean-centred.
    pub fn max_norm(&self) -> f64 {
        self.pixels
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

pub fn fit_affine_set(data: &SpectralDataset, n_endmembers: usize) -> Result<AffineSetModel> {
    if n_endmembers < 2 {
        return Err(Error::InvalidEndmemberCount(n_endmembers));
    }
    let (m, l) = (data.n_bands(), data.n_pixels());
    if l < n_endmembers {
        return Err(Error::TooFewPixels {
            needed: n_endmembers,
            got: l,
        });
    }
    if m < n_endmembers {
        return Err(Error::TooFewBands {
            needed: n_endmembers,
            got: m,
        });
    }

    let x = data.pixels();
    let mean = x.column_mean();
    let mut scatter = DMatrix::zeros(m, m);
    for start in (0..l).step_by(CHUNK) {
        let chunk = centered_chunk(x, &mean, start);
        scatter.gemm(1.0, &chunk, &chunk.transpose(), 1.0);
    }
    let eig = SymmetricEigen::new(scatter);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let dim = n_endmembers - 1;
    let mut basis = DMatrix::zeros(m, dim);
    for (k, &idx) in order.iter().take(dim).enumerate() {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        // largest-magnitude entry positive (first one on ties)
        let mut pivot = 0;
        for r in 1..m {
            if v[r].abs() > v[pivot].abs() {
                pivot = r;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        basis.set_column(k, &v);
    }

    Ok(AffineSetModel {
        basis,
        mean,
        n_endmembers,
        eigenvalues: order.iter().take(dim).map(|&i| eig.eigenvalues[i]).collect(),
        leading_eigenvalue: eig.eigenvalues[order[0]],
    })
}

/// `C^T (x[n] - d)` for every pixel.
pub fn project(data: &SpectralDataset, model: &AffineSetModel) -> Result<DrDataset> {
    if data.n_bands() != model.n_bands() {
        return Err(Error::DimensionMismatch {
            expected: model.n_bands(),
            got: data.n_bands(),
        });
    }
    let x = data.pixels();
    let mut out = DMatrix::zeros(model.dim(), x.ncols());
    for start in (0..x.ncols()).step_by(CHUNK) {
        let chunk = centered_chunk(x, &model.mean, start);
        out.columns_mut(start, chunk.ncols())
            .copy_from(&model.basis.tr_mul(&chunk));
    }
    Ok(DrDataset::new(out))
}

// pixels are processed in cache-sized column blocks, always in the same order
const CHUNK: usize = 1024;

fn centered_chunk(x: &DMatrix<f64>, mean: &DVector<f64>, start: usize) -> DMatrix<f64> {
    let width = CHUNK.min(x.ncols() - start);
    let mut chunk = x.columns(start, width).into_owned();
    for mut col in chunk.column_iter_mut() {
        col -= mean;
    }
    chunk
}

/// `C a + d` for every point.
pub fn lift(points: &[DVector<f64>], model: &AffineSetModel) -> Result<Vec<DVector<f64>>> {
    points
        .iter()
        .map(|a| {
            if a.len() != model.dim() {
                return Err(Error::DimensionMismatch {
                    expected: model.dim(),
                    got: a.len(),
                });
            }
            Ok(&model.basis * a + &model.mean)
        })
        .collect()
}
