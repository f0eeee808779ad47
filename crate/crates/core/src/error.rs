use thiserror::Error;

/// Errors raised by the betting library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("null mean must lie strictly inside (0, 1), got {0}")]
    NullMean(f64),

    #[error("bet fraction {lambda} outside [{lo}, {hi}]")]
    FractionOutOfRange { lambda: f64, lo: f64, hi: f64 },

    #[error("observation {0} outside [0, 1]")]
    Observation(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty sample")]
    EmptySample,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
