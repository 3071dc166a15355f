use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {reason}")]
    Input { path: PathBuf, reason: String },

    #[error(transparent)]
    Core(#[from] wigner_core::Error),
}

impl CliError {
    /// 1 for usage and config errors, 2 for numerical non-convergence,
    /// 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        use wigner_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Core(E::InvalidParameter { .. }) => 1,
            CliError::Core(E::NotConverged { .. } | E::NotFinite { .. }) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
