//! Experiment harness around `sam-core`: configuration, seeded training runs,
//! metrics and checkpoint files, score plots, and the verification suites
//! behind `sam verify`.

use std::path::PathBuf;

pub mod checkpoint;
pub mod checks;
pub mod config;
pub mod eval;
pub mod metrics;
pub mod plot;
pub mod train;
pub mod trajectory;

pub use config::{ExperimentConfig, Method};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error(transparent)]
    Core(#[from] sam_core::Error),
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}
