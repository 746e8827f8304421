use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Observed hyperspectral pixels, one column per pixel (`M` bands x `L` pixels).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDataset {
    pixels: DMatrix<f64>,
    /// Number of materials used to generate the data, when known.
    pub n_truth: Option<usize>,
}

impl SpectralDataset {
    pub fn new(pixels: DMatrix<f64>) -> Self {
        Self {
            pixels,
            n_truth: None,
        }
    }

    pub fn with_truth(pixels: DMatrix<f64>, n_truth: usize) -> Self {
        Self {
            pixels,
            n_truth: Some(n_truth),
        }
    }

    /// Builds a dataset from pixel vectors of equal length.
    pub fn from_pixels(pixels: &[DVector<f64>]) -> Result<Self> {
        let bands = pixels.first().map_or(0, |p| p.len());
        if let Some(bad) = pixels.iter().find(|p| p.len() != bands) {
            return Err(Error::DimensionMismatch {
                expected: bands,
                got: bad.len(),
            });
        }
        Ok(Self::new(DMatrix::from_columns(pixels)))
    }

    pub fn n_bands(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn n_pixels(&self) -> usize {
        self.pixels.ncols()
    }

    pub fn pixels(&self) -> &DMatrix<f64> {
        &self.pixels
    }

    pub fn into_pixels(self) -> DMatrix<f64> {
        self.pixels
    }
}
