//! The hyperplane-based Craig simplex estimator.
//!
//! Given the purest pixels found by SPA, each facet hyperplane of the
//! minimum-volume enclosing simplex is estimated independently: its normal from
//! `N-1` active pixels (one per search ball) plus the data mean, and its constant
//! as the largest inner product over the data. The planes are then shifted toward
//! the data mean so the lifted endmembers are nonnegative, the vertices are
//! recovered by solving the facet systems, and abundances follow in closed form
//! from point-to-facet distances.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::SpectralDataset;
use crate::dimred::{fit_affine_set, project, AffineSetModel, DrDataset};
use crate::error::{Error, Result};
use crate::geometry::{
    is_affinely_independent, normal_from_points_with_origin, normal_from_vertices, solve_facet_system,
    Hyperplane, RANK_TOL,
};
use crate::spa::select_purest;

/// Shrink parameter used when none is given.
pub const DEFAULT_ETA: f64 = 0.9;

/// Relative guard on the abundance denominators, scaled by `|b_i|` and the data diameter.
pub const DENOMINATOR_TOL: f64 = 1e-12;

/// Open balls of common radius around the purest pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRegions {
    pub radius: f64,
    pub centers: Vec<DVector<f64>>,
    /// `members[k]`: ascending indices of pixels strictly inside the ball around center `k`.
    pub members: Vec<Vec<usize>>,
}

impl SearchRegions {
    pub fn n_endmembers(&self) -> usize {
        self.centers.len()
    }

    /// Center index of region `k` when searching for facet `i`: the balls of every
    /// center except `i`, in order.
    pub fn region_center(i: usize, k: usize) -> usize {
        if k < i {
            k
        } else {
            k + 1
        }
    }

    pub fn region(&self, i: usize, k: usize) -> &[usize] {
        &self.members[Self::region_center(i, k)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneSet {
    pub normals: Vec<DVector<f64>>,
    pub constants: Vec<f64>,
    /// `active_pixels[i]`: the `N-1` pixels that fixed normal `i`.
    pub active_pixels: Vec<Vec<usize>>,
}

impl HyperplaneSet {
    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn planes(&self) -> Vec<Hyperplane> {
        self.normals
            .iter()
            .zip(&self.constants)
            .map(|(b, &h)| Hyperplane {
                normal: b.clone(),
                constant: h,
            })
            .collect()
    }

    /// Largest signed distance of any pixel beyond any plane (`<= 0` when enclosed).
    pub fn max_violation(&self, dr: &DrDataset) -> f64 {
        self.normals
            .iter()
            .zip(&self.constants)
            .map(|(b, &h)| {
                let norm = b.norm();
                b.tr_mul(&dr.pixels)
                    .iter()
                    .map(|&v| (v - h) / norm)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftFactor {
    /// Smallest `c >= 1` that keeps every lifted endmember nonnegative.
    pub c_prime: f64,
    /// `c_prime / eta`.
    pub c: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndmemberEstimate {
    pub dr_vertices: Vec<DVector<f64>>,
    /// `M x N`, one endmember per column, entrywise nonnegative.
    pub spectra: DMatrix<f64>,
    pub shift_c: f64,
    /// Number of negative lifted entries set to zero.
    pub clamped_entries: usize,
    /// Smallest lifted entry before clamping.
    pub min_raw_entry: f64,
}

/// `L x N` abundance fractions; column `i` is the abundance map of endmember `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbundanceMatrix(pub DMatrix<f64>);

impl AbundanceMatrix {
    pub fn n_pixels(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_endmembers(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Builds the search balls of radius half the smallest center separation.
pub fn build_regions(dr: &DrDataset, purest: &[usize]) -> Result<SearchRegions> {
    let centers: Vec<DVector<f64>> = purest.iter().map(|&n| dr.pixel(n)).collect();
    let mut min_dist = f64::INFINITY;
    let mut closest = (0, 0);
    for a in 0..centers.len() {
        for b in a + 1..centers.len() {
            let d = (&centers[a] - &centers[b]).norm();
            if d < min_dist {
                min_dist = d;
                closest = (a, b);
            }
        }
    }
    if !(min_dist > 0.0) {
        return Err(Error::DuplicatePurestPixels {
            first: purest[closest.0],
            second: purest[closest.1],
        });
    }
    let radius = 0.5 * min_dist;
    let members = centers
        .par_iter()
        .map(|c| {
            dr.pixels
                .column_iter()
                .enumerate()
                .filter(|(_, p)| (p - c).norm() < radius)
                .map(|(n, _)| n)
                .collect()
        })
        .collect();
    Ok(SearchRegions {
        radius,
        centers,
        members,
    })
}

fn argmax_in(dr: &DrDataset, direction: &DVector<f64>, candidates: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &n in candidates {
        let v = direction.dot(&dr.pixels.column(n));
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((n, v)),
        }
    }
    best.map(|(n, _)| n)
}

/// Normal from the active pixels, oriented away from purest pixel `i`.
fn normal_from_active(
    dr: &DrDataset,
    centers: &[DVector<f64>],
    i: usize,
    active: &[usize],
) -> Result<DVector<f64>> {
    let points: Vec<DVector<f64>> = active.iter().map(|&n| dr.pixel(n)).collect();
    if !is_affinely_independent(&points, RANK_TOL) {
        return Err(Error::AffinelyDependentActiveSet { facet: i });
    }
    let mut normal = normal_from_points_with_origin(&points, i)
        .map_err(|_| Error::AffinelyDependentActiveSet { facet: i })?;
    let own = normal.dot(&centers[i]);
    let reach = points
        .iter()
        .map(|p| normal.dot(p))
        .fold(f64::NEG_INFINITY, f64::max);
    if own >= reach {
        normal.neg_mut();
    }
    Ok(normal)
}

/// Normal of facet `i` from one active pixel per search ball.
///
/// The reference direction comes from the facet of the purest-pixel simplex; in
/// each ball the pixel with the largest inner product along it is chosen (lowest
/// index on ties).
pub fn estimate_normal(
    dr: &DrDataset,
    regions: &SearchRegions,
    i: usize,
) -> Result<(DVector<f64>, Vec<usize>)> {
    let reference = normal_from_vertices(&regions.centers, i)?;
    let n = regions.n_endmembers();
    let active = (0..n - 1)
        .map(|k| argmax_in(dr, &reference, regions.region(i, k)).ok_or(Error::EmptyRegion { facet: i, region: k }))
        .collect::<Result<Vec<_>>>()?;
    let normal = normal_from_active(dr, &regions.centers, i, &active)?;
    Ok((normal, active))
}

/// Like [`estimate_normal`] but takes the `N-1` pixels with the largest inner
/// products over the whole data set jointly, ignoring the search balls.
pub fn estimate_normal_naive(
    dr: &DrDataset,
    purest_dr: &[DVector<f64>],
    i: usize,
) -> Result<(DVector<f64>, Vec<usize>)> {
    let reference = normal_from_vertices(purest_dr, i)?;
    let n = purest_dr.len();
    if dr.len() < n - 1 {
        return Err(Error::TooFewPixels {
            needed: n - 1,
            got: dr.len(),
        });
    }
    let scores = reference.tr_mul(&dr.pixels);
    let mut order: Vec<usize> = (0..dr.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(n - 1);
    let normal = normal_from_active(dr, purest_dr, i, &order)?;
    Ok((normal, order))
}

/// Largest inner product of `normal` with any pixel.
pub fn estimate_constant(dr: &DrDataset, normal: &DVector<f64>) -> f64 {
    normal
        .tr_mul(&dr.pixels)
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// All `N` facet estimates; facets are processed in parallel.
pub fn estimate_hyperplanes(dr: &DrDataset, regions: &SearchRegions) -> Result<HyperplaneSet> {
    let n = regions.n_endmembers();
    let results = (0..n)
        .into_par_iter()
        .map(|i| {
            let (normal, active) = estimate_normal(dr, regions, i)?;
            let constant = estimate_constant(dr, &normal);
            Ok((normal, constant, active))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = HyperplaneSet {
        normals: Vec::with_capacity(n),
        constants: Vec::with_capacity(n),
        active_pixels: Vec::with_capacity(n),
    };
    for (b, h, p) in results {
        set.normals.push(b);
        set.constants.push(h);
        set.active_pixels.push(p);
    }
    Ok(set)
}

/// Result of the shift computation plus the bands it could not control.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOutcome {
    pub factor: ShiftFactor,
    /// Bands with a nonpositive mean where some unshifted vertex is negative.
    pub uncontrolled_bands: Vec<usize>,
}

/// `c' = max(1, max_{i,j} -v_ij / d_j)` over bands with positive mean, and `c = c'/eta`.
///
/// `v_i = C B_{-i}^{-1} h_{-i}` is the lifted (mean-free) unshifted vertex `i`.
pub fn shift_factor(planes: &HyperplaneSet, model: &AffineSetModel, eta: f64) -> Result<ShiftOutcome> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidEta(eta));
    }
    let hp = planes.planes();
    let mut c_prime = 1.0_f64;
    let mut uncontrolled = Vec::new();
    for i in 0..hp.len() {
        let a = solve_facet_system(&hp, i, 1.0)?;
        let v = &model.basis * a;
        for (j, (&vj, &dj)) in v.iter().zip(model.mean.iter()).enumerate() {
            if dj > 0.0 {
                c_prime = c_prime.max(-vj / dj);
            } else if vj < 0.0 {
                uncontrolled.push(j);
            }
        }
    }
    uncontrolled.sort_unstable();
    uncontrolled.dedup();
    Ok(ShiftOutcome {
        factor: ShiftFactor {
            c_prime,
            c: c_prime / eta,
            eta,
        },
        uncontrolled_bands: uncontrolled,
    })
}

/// Vertices of the simplex bounded by the planes with constants divided by `c`,
/// lifted to spectra with negative entries set to zero.
pub fn reconstruct_endmembers(
    planes: &HyperplaneSet,
    c: f64,
    model: &AffineSetModel,
) -> Result<EndmemberEstimate> {
    let hp = planes.planes();
    let dr_vertices = (0..hp.len())
        .map(|i| solve_facet_system(&hp, i, c))
        .collect::<Result<Vec<_>>>()?;
    let mut spectra = DMatrix::zeros(model.n_bands(), hp.len());
    let mut clamped = 0;
    let mut min_raw = f64::INFINITY;
    for (i, a) in dr_vertices.iter().enumerate() {
        let mut s = &model.basis * a + &model.mean;
        for x in s.iter_mut() {
            min_raw = min_raw.min(*x);
            if *x < 0.0 {
                *x = 0.0;
                clamped += 1;
            }
        }
        spectra.set_column(i, &s);
    }
    Ok(EndmemberEstimate {
        dr_vertices,
        spectra,
        shift_c: c,
        clamped_entries: clamped,
        min_raw_entry: min_raw,
    })
}

/// Closed-form abundances `max(0, (h_i/c - b_i.x) / (h_i/c - b_i.a_i))`.
///
/// The shifted constants are used so that the facets pass through the
/// reconstructed vertices; inside the simplex the fractions then coincide with the
/// fully constrained least-squares solution.
pub fn estimate_abundances(
    dr: &DrDataset,
    planes: &HyperplaneSet,
    endmembers: &EndmemberEstimate,
) -> Result<AbundanceMatrix> {
    let n = planes.len();
    if endmembers.dr_vertices.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: endmembers.dr_vertices.len(),
        });
    }
    let diameter = 2.0 * dr.max_norm();
    let mut shifted = Vec::with_capacity(n);
    let mut denominators = Vec::with_capacity(n);
    for i in 0..n {
        let b = &planes.normals[i];
        let h = planes.constants[i] / endmembers.shift_c;
        let denom = h - b.dot(&endmembers.dr_vertices[i]);
        if !(denom > DENOMINATOR_TOL * b.norm() * diameter) {
            return Err(Error::DegenerateDenominator {
                facet: i,
                value: denom,
            });
        }
        shifted.push(h);
        denominators.push(denom);
    }

    let l = dr.len();
    let mut rows = vec![0.0; l * n];
    rows.par_chunks_mut(n).enumerate().for_each(|(p, row)| {
        let x = dr.pixels.column(p);
        for i in 0..n {
            let s = (shifted[i] - planes.normals[i].dot(&x)) / denominators[i];
            row[i] = s.max(0.0);
        }
    });
    Ok(AbundanceMatrix(DMatrix::from_row_slice(l, n, &rows)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnmixOptions {
    pub eta: f64,
    /// Keep the tangent planes unshifted (`c = 1`).
    pub no_shift: bool,
}

impl Default for UnmixOptions {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            no_shift: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Fewer than `N-1` significant directions in the data.
    RankDeficientData { eigenvalues: Vec<f64> },
    /// Bands with nonpositive mean that the shift cannot make nonnegative.
    NonpositiveMeanEntry { bands: Vec<usize> },
    /// Negative lifted entries that were set to zero.
    ClampedNegativeSpectra { count: usize, min_raw_entry: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub n_endmembers: usize,
    pub purest_indices: Vec<usize>,
    pub active_pixels: Vec<Vec<usize>>,
    pub radius: f64,
    pub c_prime: f64,
    pub c: f64,
    pub eta: f64,
    pub no_shift: bool,
    pub clamped_entries: usize,
    pub warnings: Vec<Warning>,
    pub stage_timings: Vec<StageTiming>,
}

#[derive(Debug, Clone)]
pub struct Unmixing {
    pub model: AffineSetModel,
    pub dr: DrDataset,
    pub planes: HyperplaneSet,
    pub endmembers: EndmemberEstimate,
    pub abundances: AbundanceMatrix,
    pub diagnostics: Diagnostics,
}

/// An [`Error`] tagged with the pipeline stage that raised it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: Error,
}

struct Stopwatch {
    timings: Vec<StageTiming>,
}

impl Stopwatch {
    fn run<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> std::result::Result<T, PipelineError> {
        let start = Instant::now();
        let out = f().map_err(|source| PipelineError { stage, source });
        self.timings.push(StageTiming {
            stage,
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// The full pipeline: affine fit, SPA seeds, facet estimation, shift, vertices, abundances.
pub fn unmix(
    data: &SpectralDataset,
    n_endmembers: usize,
    options: UnmixOptions,
) -> std::result::Result<Unmixing, PipelineError> {
    let mut clock = Stopwatch { timings: Vec::new() };
    clock.run("validate", || {
        if !(options.eta > 0.0 && options.eta <= 1.0) {
            return Err(Error::InvalidEta(options.eta));
        }
        Ok(())
    })?;
    let model = clock.run("affine_fit", || fit_affine_set(data, n_endmembers))?;
    let dr = clock.run("projection", || project(data, &model))?;
    let purest = clock.run("spa", || select_purest(&dr, n_endmembers))?;
    let regions = clock.run("regions", || build_regions(&dr, &purest))?;
    let planes = clock.run("hyperplanes", || estimate_hyperplanes(&dr, &regions))?;
    let shift = clock.run("shift", || {
        let mut out = shift_factor(&planes, &model, options.eta)?;
        if options.no_shift {
            out.factor.c = 1.0;
        }
        Ok(out)
    })?;
    let endmembers = clock.run("endmembers", || reconstruct_endmembers(&planes, shift.factor.c, &model))?;
    let abundances = clock.run("abundances", || estimate_abundances(&dr, &planes, &endmembers))?;

    let mut warnings = Vec::new();
    if model.is_rank_deficient() {
        warnings.push(Warning::RankDeficientData {
            eigenvalues: model.eigenvalues.clone(),
        });
    }
    if !shift.uncontrolled_bands.is_empty() {
        warnings.push(Warning::NonpositiveMeanEntry {
            bands: shift.uncontrolled_bands.clone(),
        });
    }
    if endmembers.clamped_entries > 0 {
        warnings.push(Warning::ClampedNegativeSpectra {
            count: endmembers.clamped_entries,
            min_raw_entry: endmembers.min_raw_entry,
        });
    }

    let diagnostics = Diagnostics {
        n_endmembers,
        purest_indices: purest,
        active_pixels: planes.active_pixels.clone(),
        radius: regions.radius,
        c_prime: shift.factor.c_prime,
        c: shift.factor.c,
        eta: options.eta,
        no_shift: options.no_shift,
        clamped_entries: endmembers.clamped_entries,
        warnings,
        stage_timings: clock.timings,
    };
    Ok(Unmixing {
        model,
        dr,
        planes,
        endmembers,
        abundances,
        diagnostics,
    })
}
