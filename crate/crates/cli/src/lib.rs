//! Command-line front end for `hypercsi`: scene generation, unmixing,
//! evaluation against ground truth and Monte Carlo sweeps.
//!
//! Exit codes: 0 success, 2 bad flags or configuration, 3 bad input data,
//! 4 numerical failure inside the pipeline.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod error;
pub mod io;
pub mod mc;
pub mod sweep;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hypercsi", version, about = "Blind hyperspectral unmixing by hyperplane-based simplex identification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene with known endmembers and abundances.
    Generate(GenerateArgs),
    /// Estimate endmembers and abundances from a dataset.
    Unmix(UnmixArgs),
    /// Compare an estimate against ground truth.
    Eval(EvalArgs),
    /// Run a Monte Carlo sweep described by a config file.
    Mc(McArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pattern {
    /// i.i.d. Dirichlet abundances under a purity ceiling.
    Iid,
    /// Spatially smooth block-sparse maps.
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    Hsd,
    Csv,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of spectral bands [default: 224, or the rows of --spectra-file].
    #[arg(long)]
    pub bands: Option<usize>,
    #[arg(long)]
    pub pixels: usize,
    #[arg(long)]
    pub endmembers: usize,
    /// Upper bound on the pixel purity, in (1/sqrt(N), 1].
    #[arg(long, default_value_t = 1.0)]
    pub purity: f64,
    /// Signal-to-noise ratio in dB; omit (or `inf`) for noiseless data.
    #[arg(long, value_parser = parse_snr)]
    pub snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dirichlet parameters, comma separated [default: 1/N each].
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Pattern::Iid)]
    pub pattern: Pattern,
    /// Endmember spectra as CSV, one band per row and one material per column.
    #[arg(long)]
    pub spectra_file: Option<PathBuf>,
    /// Encoding of the observed data file.
    #[arg(long, value_enum, default_value_t = DataFormat::Hsd)]
    pub format: DataFormat,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct UnmixArgs {
    /// Dataset, `HSD1` or `.csv` with one pixel per row.
    #[arg(long)]
    pub data: PathBuf,
    /// Number of endmembers [default: taken from the dataset header].
    #[arg(long)]
    pub endmembers: Option<usize>,
    #[arg(long, default_value_t = hypercsi::estimator::DEFAULT_ETA, value_parser = parse_eta)]
    pub eta: f64,
    /// Skip the nonnegativity shrink (c = 1).
    #[arg(long)]
    pub no_shift: bool,
    #[arg(long, env = "HYPERCSI_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory holding the true `spectra.csv` and `abundances.csv`.
    #[arg(long)]
    pub truth: PathBuf,
    /// Directory holding the estimated `spectra.csv` and `abundances.csv`.
    #[arg(long)]
    pub est: PathBuf,
    /// Report file [default: <est>/metrics.json].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub sweep: PathBuf,
    #[arg(long, env = "HYPERCSI_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[arg(short, long)]
    pub out: PathBuf,
}

fn parse_snr(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v.is_nan() {
        return Err("SNR must be a number".into());
    }
    Ok(v)
}

fn parse_eta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("eta must lie in (0, 1], got {s}"))
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
