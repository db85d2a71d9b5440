//! Error type shared across the crate.

/// Errors produced by validation, solvers, and lookups.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter failed its domain check. Names the offending field.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam {
        field: &'static str,
        reason: String,
    },

    /// A configuration document is structurally wrong (missing or duplicate blocks).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The requested operation is not defined for this control law.
    #[error("unsupported control law: {0}")]
    UnsupportedLaw(&'static str),

    /// An iterative solver ran out of iterations.
    #[error("no convergence after {iterations} iterations (last gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    /// A query time fell outside the sampled range.
    #[error("time {t} outside sampled range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
