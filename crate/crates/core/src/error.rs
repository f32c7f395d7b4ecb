use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model field `{field}`: {reason}")]
    InvalidModel { field: String, reason: String },

    #[error("failed to parse model: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty gamma range [{lo}, {hi}] with step {step}")]
    EmptyRange { lo: f64, hi: f64, step: f64 },

    #[error("gamma list must be non-empty and strictly increasing, got {0:?}")]
    NonIncreasingGammas(Vec<f64>),

    #[error("exponent pattern does not match: {0}")]
    PatternMismatch(String),

    #[error("state must stay positive in x-space mode: x({time}) = {value}")]
    NonPositiveState { time: f64, value: f64 },

    #[error("solution outran the step near t = {time}; it is blowing up or the step is too coarse")]
    Diverged { time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn model(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidModel {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
