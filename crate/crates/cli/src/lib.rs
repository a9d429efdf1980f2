//! Command-line front end: simulate example datasets, fit the example models
//! by HMC and summarise draws files.

pub mod commands;
pub mod data;
pub mod models;
pub mod simulate;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use models::ModelKind;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("inference failed: {0}")]
    Inference(String),
    #[error("{0}")]
    Diagnostics(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Inference(_) | CliError::Diagnostics(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse { .. } => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
