use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("numeric failure: {0}")]
    Numeric(#[from] causal_averaging_core::Error),
}

impl RunnerError {
    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        RunnerError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit status: 2 config, 3 data or IO, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Config(_) => 2,
            RunnerError::Data(_) | RunnerError::Io { .. } => 3,
            RunnerError::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, RunnerError>;
