use std::path::PathBuf;

use hypercsi::PipelineError;
use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] hypercsi::Error),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl CliError {
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const NUMERICAL: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => Self::USAGE,
            CliError::Io { .. } | CliError::Format { .. } => Self::DATA,
            CliError::Core(e) => core_code(e),
            CliError::Pipeline(e) => core_code(&e.source),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn core_code(e: &hypercsi::Error) -> i32 {
    match e {
        hypercsi::Error::InvalidEta(_)
        | hypercsi::Error::InvalidGamma
        | hypercsi::Error::InvalidPurity { .. }
        | hypercsi::Error::InvalidEndmemberCount(_) => CliError::USAGE,
        e if e.is_data_error() => CliError::DATA,
        _ => CliError::NUMERICAL,
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
