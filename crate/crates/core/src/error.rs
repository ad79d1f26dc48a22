use thiserror::Error;

/// Errors raised by the memory, cavity, ensemble and protocol models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cross-correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("storage time must be non-negative, got {0} s")]
    NegativeTime(f64),

    #[error("query time {t} s precedes spin-wave creation at {write_time} s")]
    BeforeWrite { t: f64, write_time: f64 },

    #[error("lossless cavity with unit reflectivity has divergent finesse")]
    DegenerateCavity,

    #[error("search range [{lo}, {hi}] is empty or inverted")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("spin wave written at {write_time} s does not rephase before {horizon} s")]
    NoRephasing { write_time: f64, horizon: f64 },

    #[error("parameter sets disagree: {0}")]
    Mismatch(String),

    #[error("invalid timeline: {0}")]
    Timeline(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Checks `value` is a finite probability.
pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(invalid(name, format!("{value} is not in [0, 1]")))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{value} must be finite and > 0")))
    }
}
