use thiserror::Error;

/// Errors produced by the kernel-distance library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid orientation at point {index}: |u| = {norm}")]
    InvalidOrientation { index: usize, norm: f64 },

    #[error("numerical instability: squared distance {radicand:e} below -{tolerance:e}")]
    NumericalInstability { radicand: f64, tolerance: f64 },

    #[error("feature basis mismatch")]
    BasisMismatch,

    #[error("feature dimension {rho} exceeds the cap of {max}")]
    FeatureDimensionTooLarge { rho: u64, max: u64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("work budget exceeded: {work:e} > {limit:e}; {advice}")]
    BudgetExceeded {
        work: f64,
        limit: f64,
        advice: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{value} is not in (0, 1)")))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("{value} is not a positive finite number"),
        ))
    }
}
