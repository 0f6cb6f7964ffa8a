use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain mismatch between operands")]
    DomainMismatch,

    #[error("parameter `{name}` out of range: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported Lebesgue exponent p = {0}")]
    UnsupportedExponent(u32),

    #[error("center list is empty")]
    EmptyCenters,

    #[error("ensemble is degenerate (all fields vanish)")]
    DegenerateEnsemble,

    #[error("ledger does not cover [{start}, {end}]")]
    InsufficientCoverage { start: f64, end: f64 },

    #[error("ledgers use different center sets")]
    MismatchedCenters,

    #[error("run diverged; last good time t = {last_good_time}")]
    Diverged { last_good_time: f64 },

    #[error("Gronwall bootstrap failed: {0}")]
    Bootstrap(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
