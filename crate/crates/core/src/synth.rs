//! Synthetic scenes under the linear mixing model.
//!
//! Endmember spectra are random smooth curves (or user supplied), abundances are
//! Dirichlet draws filtered by a purity ceiling or block-sparse maps, and i.i.d.
//! Gaussian noise is added at a prescribed SNR before clipping negatives to zero.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use std::ops::{Range, RangeInclusive};

use crate::error::{Error, Result};
use crate::geometry::RANK_TOL;

/// Candidate draws per requested pixel before the purity filter gives up.
pub const POOL_FACTOR: usize = 200;

/// Floor of every random smooth spectrum.
pub const SPECTRUM_FLOOR: f64 = 0.01;

/// Weight of the per-material feature relative to the shared continuum.
pub const FEATURE_WEIGHT: f64 = 0.12;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectraSource {
    RandomSmooth,
    /// `M x N` nonnegative, full column rank.
    Given(DMatrix<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbundancePattern {
    IidDirichlet,
    /// Rectangular tiles with at most two active materials each.
    BlockSparse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub n_bands: usize,
    pub n_pixels: usize,
    pub n_endmembers: usize,
    pub dirichlet_gamma: Vec<f64>,
    pub purity_rho: f64,
    /// `None` for noiseless data.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl SceneSpec {
    /// Symmetric Dirichlet with `gamma = 1/N`, no purity limit, noiseless.
    pub fn new(n_bands: usize, n_pixels: usize, n_endmembers: usize, seed: u64) -> Self {
        Self {
            n_bands,
            n_pixels,
            n_endmembers,
            dirichlet_gamma: vec![1.0 / n_endmembers as f64; n_endmembers],
            purity_rho: 1.0,
            snr_db: None,
            seed,
        }
    }

    pub fn with_purity(mut self, rho: f64) -> Self {
        self.purity_rho = rho;
        self
    }

    pub fn with_snr_db(mut self, snr_db: Option<f64>) -> Self {
        self.snr_db = snr_db;
        self
    }

    pub fn with_gamma(mut self, gamma: Vec<f64>) -> Self {
        self.dirichlet_gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_endmembers < 2 {
            return Err(Error::InvalidEndmemberCount(self.n_endmembers));
        }
        if self.n_bands < self.n_endmembers {
            return Err(Error::TooFewBands {
                needed: self.n_endmembers,
                got: self.n_bands,
            });
        }
        if self.n_pixels < self.n_endmembers {
            return Err(Error::TooFewPixels {
                needed: self.n_endmembers,
                got: self.n_pixels,
            });
        }
        validate_gamma(&self.dirichlet_gamma)?;
        if self.dirichlet_gamma.len() != self.n_endmembers {
            return Err(Error::DimensionMismatch {
                expected: self.n_endmembers,
                got: self.dirichlet_gamma.len(),
            });
        }
        let lower = purity_lower_bound(self.n_endmembers);
        if !(self.purity_rho > lower && self.purity_rho <= 1.0) {
            return Err(Error::InvalidPurity {
                rho: self.purity_rho,
                lower,
            });
        }
        Ok(())
    }
}

/// `1/sqrt(N)`, the purity of the fully mixed pixel.
pub fn purity_lower_bound(n_endmembers: usize) -> f64 {
    1.0 / (n_endmembers as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// `M x N`.
    pub spectra: DMatrix<f64>,
    /// `N x L`, columns on the unit simplex.
    pub abundances: DMatrix<f64>,
    /// `M x L`, equal to `spectra * abundances`.
    pub noiseless: DMatrix<f64>,
    /// `M x L`, noisy and clipped at zero.
    pub observed: DMatrix<f64>,
    /// Noise variance actually used (0 when noiseless).
    pub noise_variance: f64,
    /// `sum ||noise||^2 / (sigma^2 M L)` before clipping (1 in expectation).
    pub realized_noise_ratio: Option<f64>,
}

impl GroundTruth {
    pub fn max_purity(&self) -> f64 {
        self.abundances
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Realized SNR of the observed data in dB, measured against the noiseless data.
    pub fn realized_snr_db(&self) -> Option<f64> {
        let noise = (&self.observed - &self.noiseless).norm_squared();
        if noise == 0.0 {
            return None;
        }
        Some(10.0 * (self.noiseless.norm_squared() / noise).log10())
    }
}

fn validate_gamma(gamma: &[f64]) -> Result<()> {
    if gamma.is_empty() || gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidGamma);
    }
    Ok(())
}

/// The deterministic generator every scene is drawn from.
pub fn scene_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw_dirichlet<R: Rng + ?Sized>(gammas: &[Gamma<f64>], rng: &mut R, out: &mut [f64]) {
    loop {
        let mut total = 0.0;
        for (o, g) in out.iter_mut().zip(gammas) {
            *o = g.sample(rng);
            total += *o;
        }
        // tiny shapes can underflow every component; redraw
        if total > 0.0 && total.is_finite() {
            for o in out.iter_mut() {
                *o /= total;
            }
            if out.iter().all(|&v| v > 0.0) {
                return;
            }
        }
    }
}

/// `count` i.i.d. Dirichlet(`gamma`) vectors as the columns of an `N x count` matrix.
///
/// Each column is a vector of independent `Gamma(gamma_i, 1)` draws divided by its sum.
pub fn sample_dirichlet<R: Rng + ?Sized>(gamma: &[f64], count: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    validate_gamma(gamma)?;
    let gammas = gamma_samplers(gamma)?;
    let n = gamma.len();
    let mut out = DMatrix::zeros(n, count);
    let mut buf = vec![0.0; n];
    for c in 0..count {
        draw_dirichlet(&gammas, rng, &mut buf);
        out.column_mut(c).copy_from_slice(&buf);
    }
    Ok(out)
}

fn gamma_samplers(gamma: &[f64]) -> Result<Vec<Gamma<f64>>> {
    gamma
        .iter()
        .map(|&g| Gamma::new(g, 1.0).map_err(|_| Error::InvalidGamma))
        .collect()
}

/// Dirichlet abundances with `||s[n]|| <= rho`, drawn by rejection from a bounded pool.
pub fn sample_purity_limited<R: Rng + ?Sized>(
    gamma: &[f64],
    rho: f64,
    count: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    validate_gamma(gamma)?;
    let gammas = gamma_samplers(gamma)?;
    let n = gamma.len();
    let mut out = DMatrix::zeros(n, count);
    let mut buf = vec![0.0; n];
    let cap = POOL_FACTOR.saturating_mul(count.max(1));
    let mut accepted = 0;
    let mut draws = 0;
    while accepted < count {
        if draws >= cap {
            return Err(Error::PurityInfeasible {
                rho,
                accepted,
                needed: count,
                draws,
            });
        }
        draw_dirichlet(&gammas, rng, &mut buf);
        draws += 1;
        let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rho >= 1.0 || norm <= rho {
            out.column_mut(accepted).copy_from_slice(&buf);
            accepted += 1;
        }
    }
    Ok(out)
}

/// `M x N` random piecewise-linear curves on `[SPECTRUM_FLOOR, 1]`.
///
/// All materials share one random continuum (a polyline with 4 to 12 evenly
/// spaced knots) on top of which each adds its own finer polyline feature (10 to
/// 30 knots), weighted by [`FEATURE_WEIGHT`]. The shared continuum makes the spectra strongly correlated,
/// as real mineral reflectances are. Each curve is then rescaled so its minimum is
/// the floor and its maximum is 1. Matrices failing the rank check are redrawn.
pub fn random_smooth_spectra<R: Rng + ?Sized>(n_bands: usize, n_endmembers: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if n_bands < n_endmembers {
        return Err(Error::TooFewBands {
            needed: n_endmembers,
            got: n_bands,
        });
    }
    for _ in 0..100 {
        let continuum = random_polyline(n_bands, 4..=12, 0.0..1.0, rng);
        let mut a = DMatrix::zeros(n_bands, n_endmembers);
        for i in 0..n_endmembers {
            let feature = random_polyline(n_bands, 10..=30, -1.0..1.0, rng);
            let mut curve: Vec<f64> = continuum
                .iter()
                .zip(&feature)
                .map(|(c, f)| c + FEATURE_WEIGHT * f)
                .collect();
            let lo = curve.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            for v in curve.iter_mut() {
                *v = if span > 0.0 {
                    SPECTRUM_FLOOR + (1.0 - SPECTRUM_FLOOR) * (*v - lo) / span
                } else {
                    1.0
                };
            }
            a.set_column(i, &DVector::from_vec(curve));
        }
        if has_full_column_rank(&a) {
            return Ok(a);
        }
    }
    Err(Error::RankDeficientSpectra)
}

// evenly spaced knots with uniform heights in `range`, linearly interpolated
fn random_polyline<R: Rng + ?Sized>(
    n_bands: usize,
    knot_count: RangeInclusive<usize>,
    range: Range<f64>,
    rng: &mut R,
) -> Vec<f64> {
    let knots = rng.random_range(knot_count);
    let heights: Vec<f64> = (0..knots).map(|_| rng.random_range(range.clone())).collect();
    (0..n_bands)
        .map(|b| {
            let t = if n_bands == 1 {
                0.0
            } else {
                b as f64 / (n_bands - 1) as f64 * (knots - 1) as f64
            };
            let k = (t.floor() as usize).min(knots - 2);
            let frac = t - k as f64;
            heights[k] * (1.0 - frac) + heights[k + 1] * frac
        })
        .collect()
}

/// True when the smallest singular value exceeds [`RANK_TOL`] times the largest.
pub fn has_full_column_rank(a: &DMatrix<f64>) -> bool {
    if a.ncols() > a.nrows() || a.ncols() == 0 {
        return false;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    max > 0.0 && min > RANK_TOL * max
}

/// `sigma^2 = sum ||x[n]||^2 / (snr * M * L)` with `snr = 10^(snr_db/10)`.
pub fn noise_variance(noiseless: &DMatrix<f64>, snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    noiseless.norm_squared() / (snr * noiseless.nrows() as f64 * noiseless.ncols() as f64)
}

fn prepare_spectra<R: Rng + ?Sized>(spec: &SceneSpec, source: &SpectraSource, rng: &mut R) -> Result<DMatrix<f64>> {
    match source {
        SpectraSource::RandomSmooth => random_smooth_spectra(spec.n_bands, spec.n_endmembers, rng),
        SpectraSource::Given(a) => {
            if a.shape() != (spec.n_bands, spec.n_endmembers) {
                return Err(Error::ShapeMismatch {
                    left: a.shape(),
                    right: (spec.n_bands, spec.n_endmembers),
                });
            }
            if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::NegativeSpectra);
            }
            if !has_full_column_rank(a) {
                return Err(Error::RankDeficientSpectra);
            }
            Ok(a.clone())
        }
    }
}

fn finish_scene<R: Rng + ?Sized>(
    spec: &SceneSpec,
    spectra: DMatrix<f64>,
    abundances: DMatrix<f64>,
    rng: &mut R,
) -> GroundTruth {
    let noiseless = &spectra * &abundances;
    let (observed, variance, ratio) = match spec.snr_db {
        None => (noiseless.clone(), 0.0, None),
        Some(db) => {
            let variance = noise_variance(&noiseless, db);
            let sigma = variance.sqrt();
            let mut observed = noiseless.clone();
            let mut energy = 0.0;
            for v in observed.iter_mut() {
                let e: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                energy += e * e;
                *v = (*v + e).max(0.0);
            }
            let ratio = if variance > 0.0 {
                Some(energy / (variance * noiseless.len() as f64))
            } else {
                None
            };
            (observed, variance, ratio)
        }
    };
    GroundTruth {
        spectra,
        abundances,
        noiseless,
        observed,
        noise_variance: variance,
        realized_noise_ratio: ratio,
    }
}

/// A scene with i.i.d. purity-limited Dirichlet abundances.
pub fn generate_scene(spec: &SceneSpec, source: &SpectraSource) -> Result<GroundTruth> {
    spec.validate()?;
    let mut rng = scene_rng(spec.seed);
    let spectra = prepare_spectra(spec, source, &mut rng)?;
    let abundances = sample_purity_limited(&spec.dirichlet_gamma, spec.purity_rho, spec.n_pixels, &mut rng)?;
    Ok(finish_scene(spec, spectra, abundances, &mut rng))
}

/// Side length of the block tiles used by [`AbundancePattern::BlockSparse`].
pub const BLOCK_SIZE: usize = 10;

/// Grid width used to lay `n_pixels` out row-major.
pub fn grid_width(n_pixels: usize) -> usize {
    ((n_pixels as f64).sqrt().ceil() as usize).max(1)
}

/// Block-sparse, spatially correlated abundance maps on a row-major pixel grid.
///
/// The grid is tiled into `BLOCK_SIZE x BLOCK_SIZE` blocks. Each block holds either
/// one material at full abundance or two materials whose fractions ramp linearly
/// across the block columns. The purity ceiling does not apply to these maps.
pub fn block_sparse_abundances<R: Rng + ?Sized>(n_endmembers: usize, n_pixels: usize, rng: &mut R) -> DMatrix<f64> {
    let width = grid_width(n_pixels);
    let blocks_x = width.div_ceil(BLOCK_SIZE);
    let height = n_pixels.div_ceil(width);
    let blocks_y = height.div_ceil(BLOCK_SIZE);

    struct Block {
        first: usize,
        second: Option<usize>,
        ascending: bool,
    }
    let blocks: Vec<Block> = (0..blocks_x * blocks_y)
        .map(|_| {
            let first = rng.random_range(0..n_endmembers);
            let second = if rng.random_bool(0.5) {
                let other = rng.random_range(0..n_endmembers - 1);
                Some(if other >= first { other + 1 } else { other })
            } else {
                None
            };
            Block {
                first,
                second,
                ascending: rng.random_bool(0.5),
            }
        })
        .collect();

    let mut s = DMatrix::zeros(n_endmembers, n_pixels);
    for p in 0..n_pixels {
        let (row, col) = (p / width, p % width);
        let block = &blocks[(row / BLOCK_SIZE) * blocks_x + col / BLOCK_SIZE];
        match block.second {
            None => s[(block.first, p)] = 1.0,
            Some(second) => {
                let offset = (col % BLOCK_SIZE) as f64 + 0.5;
                let mut t = offset / BLOCK_SIZE as f64;
                if !block.ascending {
                    t = 1.0 - t;
                }
                s[(block.first, p)] = 1.0 - t;
                s[(second, p)] = t;
            }
        }
    }
    s
}

/// A scene with the requested abundance pattern.
pub fn generate_abundance_maps(
    spec: &SceneSpec,
    source: &SpectraSource,
    pattern: AbundancePattern,
) -> Result<GroundTruth> {
    match pattern {
        AbundancePattern::IidDirichlet => generate_scene(spec, source),
        AbundancePattern::BlockSparse => {
            spec.validate()?;
            let mut rng = scene_rng(spec.seed);
            let spectra = prepare_spectra(spec, source, &mut rng)?;
            let abundances = block_sparse_abundances(spec.n_endmembers, spec.n_pixels, &mut rng);
            Ok(finish_scene(spec, spectra, abundances, &mut rng))
        }
    }
}
