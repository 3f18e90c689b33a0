use std::path::PathBuf;

use thiserror::Error;

/// Exit status for validation failures (bad flags, config or input data).
pub const EXIT_VALIDATION: u8 = 1;
/// Exit status for numerical failures.
pub const EXIT_COMPUTATION: u8 = 2;
/// Exit status for file-system failures.
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{path}:{line}: {message}")]
    Input { path: PathBuf, line: u64, message: String },

    #[error(transparent)]
    Core(#[from] mimdetect_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{0}")]
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Input { .. } => EXIT_VALIDATION,
            CliError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Core(_) | CliError::Computation(_) => EXIT_COMPUTATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Csv { source, .. } => match source.kind() {
                csv::ErrorKind::Io(_) => EXIT_IO,
                _ => EXIT_VALIDATION,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
