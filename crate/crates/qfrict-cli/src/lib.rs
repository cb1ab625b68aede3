//! Batch front-end for `qfrict`: configuration, evaluation of the model
//! observables, sweeps, exponent fits, model comparison and oracle checks.
//! Every command returns plain data; `main` only formats and exits.

pub mod commands;
pub mod config;
pub mod fit;
pub mod observables;
pub mod oracle;
pub mod report;

pub use commands::{cmd_compare_models, cmd_compute, cmd_fit_exponent, cmd_oracle_check, cmd_sweep, CompareTable, FitRow};
pub use config::{ModelOptions, ModelTag, RunConfig, Sweep, SweepVar};
pub use oracle::{CheckRow, CheckStatus};
pub use report::Row;

use qfrict::QfError;
use std::fmt;

/// Everything that ends a run early, with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numeric(String),
    DegenerateFit(String),
    Invariant(Vec<String>),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Numeric(_) => 3,
            Self::DegenerateFit(_) => 4,
            Self::Invariant(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(s) => write!(f, "invalid configuration: {s}"),
            Self::Numeric(s) => write!(f, "numeric failure: {s}"),
            Self::DegenerateFit(s) => write!(f, "degenerate fit: {s}"),
            Self::Invariant(names) => write!(f, "invariant checks failed: {}", names.join(", ")),
            Self::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<QfError> for CliError {
    fn from(e: QfError) -> Self {
        match e {
            QfError::Numeric { .. } => Self::Numeric(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

/// Tolerance override from the environment, if set and parseable.
pub fn env_rel_tol() -> Result<Option<f64>, CliError> {
    match std::env::var("QFRICT_QUAD_TOL") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(x) if x > 1e-14 && x < 1.0 => Ok(Some(x)),
            _ => Err(CliError::Config(format!("QFRICT_QUAD_TOL must be a number in (1e-14, 1), got `{s}`"))),
        },
    }
}
