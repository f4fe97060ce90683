use thiserror::Error;

use crate::constants::ThresholdMode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {n} exceeds the enumeration limit {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("invalid number {text:?}: {reason}")]
    InvalidNumber { text: String, reason: &'static str },

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("malformed weight: {0}")]
    MalformedWeight(String),

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("P(w != 0) = {s} is not above the {mode} threshold {threshold:.12}")]
    BelowThreshold {
        s: f64,
        threshold: f64,
        mode: ThresholdMode,
    },

    #[error("no valid delta: threshold {tau} exceeds P(w != 0) = {s}")]
    NoValidDelta { tau: f64, s: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("sample count must be positive")]
    ZeroSampleCount,

    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
