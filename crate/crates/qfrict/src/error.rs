use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QfError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("integral `{name}` did not converge (error estimate {residual:.3e})")]
    Numeric { name: String, residual: f64 },
    #[error("closed form invalid near resonance: {0}")]
    Resonance(String),
}

pub type Result<T> = std::result::Result<T, QfError>;
