//! Monte Carlo harness over a sweep grid.

use std::time::Instant;

use hypercsi::synth::{generate_scene, SceneSpec, SpectraSource};
use hypercsi::{metrics, unmix, SpectralDataset, UnmixOptions};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::sweep::SweepConfig;

fn snr_field<S: Serializer>(snr: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match snr {
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_str("inf"),
    }
}

/// One unmixing run. Error fields are empty when the pipeline failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResultRow {
    pub n_endmembers: usize,
    pub n_pixels: usize,
    #[serde(serialize_with = "snr_field")]
    pub snr_db: Option<f64>,
    pub purity_rho: f64,
    pub eta: f64,
    pub trial_seed: u64,
    pub phi_en_deg: Option<f64>,
    pub phi_ab_deg: Option<f64>,
    /// Unmixing wall time; kept out of the results file, which must be reproducible.
    #[serde(skip)]
    pub wall_time_s: f64,
    /// `ok`, or the failing stage and error.
    pub status: String,
}

/// Means over the trials of one grid cell; failed runs are excluded from the means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummaryRow {
    pub n_endmembers: usize,
    pub n_pixels: usize,
    #[serde(serialize_with = "snr_field")]
    pub snr_db: Option<f64>,
    pub purity_rho: f64,
    pub eta: f64,
    pub trials: usize,
    pub failures: usize,
    pub mean_phi_en_deg: Option<f64>,
    pub mean_phi_ab_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    n: usize,
    l: usize,
    rho: f64,
    snr: Option<f64>,
    eta: f64,
    seed: u64,
}

fn jobs(cfg: &SweepConfig) -> Vec<Job> {
    let mut out = Vec::with_capacity(cfg.n_runs());
    for &n in &cfg.endmembers {
        for &l in &cfg.pixels {
            for &rho in &cfg.purity {
                for &snr in &cfg.snr_db {
                    for &eta in &cfg.eta {
                        for t in 0..cfg.trials {
                            out.push(Job {
                                n,
                                l,
                                rho,
                                snr,
                                eta,
                                seed: cfg.master_seed + t as u64,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn run_job(cfg: &SweepConfig, job: Job) -> Result<McResultRow> {
    let spec = SceneSpec::new(cfg.bands, job.l, job.n, job.seed)
        .with_purity(job.rho)
        .with_snr_db(job.snr);
    let truth = generate_scene(&spec, &SpectraSource::RandomSmooth)?;
    let data = SpectralDataset::with_truth(truth.observed.clone(), job.n);
    let options = UnmixOptions {
        eta: job.eta,
        no_shift: cfg.no_shift,
    };
    let start = Instant::now();
    let result = unmix(&data, job.n, options);
    let wall_time_s = start.elapsed().as_secs_f64();
    let mut row = McResultRow {
        n_endmembers: job.n,
        n_pixels: job.l,
        snr_db: job.snr,
        purity_rho: job.rho,
        eta: job.eta,
        trial_seed: job.seed,
        phi_en_deg: None,
        phi_ab_deg: None,
        wall_time_s,
        status: "ok".into(),
    };
    match result {
        Ok(u) => {
            row.phi_en_deg = Some(metrics::phi_en(&truth.spectra, &u.endmembers.spectra)?);
            row.phi_ab_deg = metrics::phi_ab(&truth.abundances.transpose(), &u.abundances.0).ok();
        }
        Err(e) => row.status = e.to_string(),
    }
    Ok(row)
}

/// Runs every grid point in parallel; rows come back in grid order
/// (endmembers, pixels, purity, snr, eta, trial) whatever the completion order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<McResultRow>> {
    jobs(cfg).into_par_iter().map(|job| run_job(cfg, job)).collect()
}

pub fn summarize(cfg: &SweepConfig, rows: &[McResultRow]) -> Vec<McSummaryRow> {
    rows.chunks(cfg.trials)
        .map(|cell| {
            let ok: Vec<&McResultRow> = cell.iter().filter(|r| r.phi_en_deg.is_some()).collect();
            let mean = |f: fn(&McResultRow) -> Option<f64>| {
                let vals: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            };
            let first = &cell[0];
            McSummaryRow {
                n_endmembers: first.n_endmembers,
                n_pixels: first.n_pixels,
                snr_db: first.snr_db,
                purity_rho: first.purity_rho,
                eta: first.eta,
                trials: cell.len(),
                failures: cell.len() - ok.len(),
                mean_phi_en_deg: mean(|r| r.phi_en_deg),
                mean_phi_ab_deg: mean(|r| r.phi_ab_deg),
            }
        })
        .collect()
}
