use std::fs;
use std::path::Path;

use hypercsi::estimator::Warning;
use hypercsi::synth::{generate_abundance_maps, AbundancePattern, SceneSpec, SpectraSource};
use hypercsi::{metrics, unmix, SpectralDataset, UnmixOptions};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::io;
use crate::mc;
use crate::sweep::SweepConfig;
use crate::{Command, DataFormat, EvalArgs, GenerateArgs, McArgs, Pattern, UnmixArgs};

pub const SPECTRA_FILE: &str = "spectra.csv";
pub const ABUNDANCES_FILE: &str = "abundances.csv";
pub const SCENE_FILE: &str = "scene.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.jsonl";
pub const TIMINGS_FILE: &str = "timings.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MC_TIMINGS_FILE: &str = "timings.csv";

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Generate(args) => generate(&args),
        Command::Unmix(args) => unmix_cmd(&args),
        Command::Eval(args) => eval(&args),
        Command::Mc(args) => mc_cmd(&args),
    }
}

fn with_pool<T: Send>(threads: Option<u16>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Serialize)]
struct SceneRecord {
    bands: usize,
    pixels: usize,
    endmembers: usize,
    seed: u64,
    purity_rho: f64,
    snr_db: Option<f64>,
    gamma: Vec<f64>,
    pattern: &'static str,
    spectra: &'static str,
    realized_snr_db: Option<f64>,
    max_purity: f64,
    noise_variance: f64,
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let n = args.endmembers;
    let (source, bands) = match &args.spectra_file {
        Some(path) => {
            let spectra = io::read_matrix_csv(path)?;
            if spectra.ncols() != n {
                return Err(CliError::Usage(format!(
                    "--spectra-file has {} columns but --endmembers is {n}",
                    spectra.ncols()
                )));
            }
            if let Some(b) = args.bands.filter(|&b| b != spectra.nrows()) {
                return Err(CliError::Usage(format!(
                    "--spectra-file has {} bands but --bands is {b}",
                    spectra.nrows()
                )));
            }
            let rows = spectra.nrows();
            (SpectraSource::Given(spectra), rows)
        }
        None => (SpectraSource::RandomSmooth, args.bands.unwrap_or(224)),
    };
    let snr = args.snr_db.filter(|v| v.is_finite());
    if args.snr_db.is_some_and(|v| v == f64::NEG_INFINITY) {
        return Err(CliError::Usage("--snr-db must not be -inf".into()));
    }
    let mut spec = SceneSpec::new(bands, args.pixels, n, args.seed)
        .with_purity(args.purity)
        .with_snr_db(snr);
    if let Some(g) = &args.gamma {
        if g.len() != n {
            return Err(CliError::Usage(format!("--gamma has {} entries, expected {n}", g.len())));
        }
        spec = spec.with_gamma(g.clone());
    }
    let pattern = match args.pattern {
        Pattern::Iid => AbundancePattern::IidDirichlet,
        Pattern::Block => AbundancePattern::BlockSparse,
    };
    let truth = generate_abundance_maps(&spec, &source, pattern)?;

    io::ensure_dir(&args.out)?;
    let data = SpectralDataset::with_truth(truth.observed.clone(), n);
    let data_name = match args.format {
        DataFormat::Hsd => "data.hsd",
        DataFormat::Csv => "data.csv",
    };
    io::write_dataset(&args.out.join(data_name), &data)?;
    io::write_matrix_csv(&args.out.join(SPECTRA_FILE), &truth.spectra)?;
    io::write_matrix_csv(&args.out.join(ABUNDANCES_FILE), &truth.abundances.transpose())?;
    let record = SceneRecord {
        bands,
        pixels: args.pixels,
        endmembers: n,
        seed: args.seed,
        purity_rho: spec.purity_rho,
        snr_db: spec.snr_db,
        gamma: spec.dirichlet_gamma.clone(),
        pattern: match args.pattern {
            Pattern::Iid => "iid",
            Pattern::Block => "block",
        },
        spectra: if args.spectra_file.is_some() { "file" } else { "random_smooth" },
        realized_snr_db: truth.realized_snr_db(),
        max_purity: truth.max_purity(),
        noise_variance: truth.noise_variance,
    };
    io::write_json(&args.out.join(SCENE_FILE), &record)?;

    match record.realized_snr_db {
        Some(s) => println!("realized SNR: {s:.3} dB"),
        None => println!("realized SNR: inf (noiseless)"),
    }
    println!("realized purity: {:.6}", record.max_purity);
    if args.pattern == Pattern::Block && args.purity < 1.0 {
        eprintln!("warning: --purity is ignored for block maps");
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum DiagnosticLine<'a> {
    Summary {
        n_bands: usize,
        n_pixels: usize,
        n_endmembers: usize,
        radius: f64,
        c_prime: f64,
        c: f64,
        eta: f64,
        no_shift: bool,
        purest_indices: &'a [usize],
        clamped_entries: usize,
    },
    Facet {
        facet: usize,
        active_pixels: &'a [usize],
        constant: f64,
    },
    Warning {
        warning: &'a Warning,
    },
}

fn unmix_cmd(args: &UnmixArgs) -> Result<()> {
    let data = io::read_dataset(&args.data)?;
    let n = args.endmembers.or(data.n_truth).ok_or_else(|| {
        CliError::Usage("--endmembers is required when the dataset does not record it".into())
    })?;
    let options = UnmixOptions {
        eta: args.eta,
        no_shift: args.no_shift,
    };
    let result = with_pool(args.threads, || unmix(&data, n, options))??;
    let diag = &result.diagnostics;

    io::ensure_dir(&args.out)?;
    io::write_matrix_csv(&args.out.join(SPECTRA_FILE), &result.endmembers.spectra)?;
    io::write_matrix_csv(&args.out.join(ABUNDANCES_FILE), &result.abundances.0)?;

    let mut lines = vec![DiagnosticLine::Summary {
        n_bands: data.n_bands(),
        n_pixels: data.n_pixels(),
        n_endmembers: n,
        radius: diag.radius,
        c_prime: diag.c_prime,
        c: diag.c,
        eta: diag.eta,
        no_shift: diag.no_shift,
        purest_indices: &diag.purest_indices,
        clamped_entries: diag.clamped_entries,
    }];
    for (i, active) in diag.active_pixels.iter().enumerate() {
        lines.push(DiagnosticLine::Facet {
            facet: i,
            active_pixels: active,
            constant: result.planes.constants[i],
        });
    }
    lines.extend(diag.warnings.iter().map(|w| DiagnosticLine::Warning { warning: w }));
    io::write_json_lines(&args.out.join(DIAGNOSTICS_FILE), &lines)?;
    io::write_json_lines(&args.out.join(TIMINGS_FILE), &diag.stage_timings)?;

    for w in &diag.warnings {
        eprintln!("warning: {}", serde_json::to_string(w).expect("serializable warning"));
    }
    println!(
        "unmixed {n} endmembers from {} pixels: c' = {:.6}, c = {:.6}",
        data.n_pixels(),
        diag.c_prime,
        diag.c
    );
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct MetricsReport {
    pub phi_en_deg: f64,
    pub phi_ab_deg: f64,
    pub endmember_angles_deg: Vec<f64>,
    /// Estimated endmember matched to each true endmember.
    pub permutation: Vec<usize>,
    pub abundance_permutation: Vec<usize>,
}

fn eval(args: &EvalArgs) -> Result<()> {
    let read = |dir: &Path, name: &str| io::read_matrix_csv(&dir.join(name));
    let (true_a, est_a) = (read(&args.truth, SPECTRA_FILE)?, read(&args.est, SPECTRA_FILE)?);
    let (true_s, est_s) = (read(&args.truth, ABUNDANCES_FILE)?, read(&args.est, ABUNDANCES_FILE)?);
    let en = metrics::rms_angle_report(&true_a, &est_a)?;
    metrics::phi_ab(&true_s, &est_s)?;
    let ab = metrics::rms_angle_report(&true_s, &est_s)?;
    let report = MetricsReport {
        phi_en_deg: en.rms_deg,
        phi_ab_deg: ab.rms_deg,
        endmember_angles_deg: en.angles_deg,
        permutation: en.permutation,
        abundance_permutation: ab.permutation,
    };
    let out = args.out.clone().unwrap_or_else(|| args.est.join(METRICS_FILE));
    io::write_json(&out, &report)?;
    println!("phi_en: {:.6} deg", report.phi_en_deg);
    println!("phi_ab: {:.6} deg", report.phi_ab_deg);
    println!("permutation: {:?}", report.permutation);
    Ok(())
}

#[derive(Serialize)]
struct TimingRow {
    run: usize,
    trial_seed: u64,
    wall_time_s: f64,
}

fn mc_cmd(args: &McArgs) -> Result<()> {
    let text = fs::read_to_string(&args.sweep).map_err(|e| CliError::io(&args.sweep, e))?;
    let cfg = SweepConfig::parse(&text).map_err(|m| CliError::Usage(format!("{}: {m}", args.sweep.display())))?;
    let rows = with_pool(args.threads, || mc::run_sweep(&cfg))??;
    let summary = mc::summarize(&cfg, &rows);

    io::ensure_dir(&args.out)?;
    write_rows(&args.out.join(RESULTS_FILE), &rows)?;
    write_rows(&args.out.join(SUMMARY_FILE), &summary)?;
    let timings: Vec<TimingRow> = rows
        .iter()
        .enumerate()
        .map(|(run, r)| TimingRow {
            run,
            trial_seed: r.trial_seed,
            wall_time_s: r.wall_time_s,
        })
        .collect();
    write_rows(&args.out.join(MC_TIMINGS_FILE), &timings)?;

    for s in &summary {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "N={} L={} rho={} snr={} eta={}: phi_en={} phi_ab={} ({} of {} failed)",
            s.n_endmembers,
            s.n_pixels,
            s.purity_rho,
            s.snr_db.map_or("inf".to_string(), |v| v.to_string()),
            s.eta,
            fmt(s.mean_phi_en_deg),
            fmt(s.mean_phi_ab_deg),
            s.failures,
            s.trials
        );
    }
    Ok(())
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| CliError::format(path, e.to_string()))?;
    for r in rows {
        wtr.serialize(r).map_err(|e| CliError::format(path, e.to_string()))?;
    }
    wtr.flush().map_err(|e| CliError::io(path, e))
}
