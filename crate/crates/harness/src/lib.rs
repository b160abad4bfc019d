//! Experiment runner for the `rarn` solvers: TOML configs, single runs,
//! ε-sweeps with log–log slope fits, trace invariant checks and report I/O.

pub mod config;
pub mod invariants;
pub mod io;
pub mod runner;

use std::path::PathBuf;

pub use config::{ExperimentConfig, ProblemConfig, StartConfig, SweepConfig};
pub use invariants::{verify_invariants, Rule, Severity, Violation};
pub use runner::{fit_slope, run_single, run_sweep, run_sweep_with_reports, SweepPoint, SweepResult};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// TOML syntax or schema error; the message carries line and column.
    #[error("{0}")]
    Parse(String),

    #[error("invalid experiment: {0}")]
    Invalid(String),

    #[error(transparent)]
    Solver(#[from] rarn::error::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Invalid(msg.into())
}
