use std::path::PathBuf;

use mg_core::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid grid point {coords}: {source}")]
    GridPoint {
        coords: String,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("{0}")]
    Usage(String),
    #[error("sample {index} failed: {message}")]
    Sample { index: usize, message: String },
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for bad input, 3 for failures during execution.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::Parse { .. }
            | HarnessError::GridPoint { .. }
            | HarnessError::Usage(_) => 2,
            HarnessError::Sample { .. } | HarnessError::Runtime(_) | HarnessError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
