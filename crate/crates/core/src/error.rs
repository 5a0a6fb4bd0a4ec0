use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("sample value {value} at position {index} is not a finite nonnegative number")]
    InvalidSampleValue { index: usize, value: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("rates must be finite and strictly positive (lambda = {lambda}, nu = {nu})")]
    InvalidRates { lambda: f64, nu: f64 },

    #[error("alpha pair ({alpha_x}, {alpha_y}) is outside 0..={m_x} x 0..={m_y}")]
    AlphaOutOfRange {
        alpha_x: usize,
        alpha_y: usize,
        m_x: usize,
        m_y: usize,
    },

    #[error("cannot draw {requested} values without replacement from a sample of {available}")]
    DrawImpossible { requested: usize, available: usize },

    #[error("Erlang distribution with zero stages is a point mass at 0 and has no density")]
    DegenerateDistribution,

    #[error("sample sum is zero, the rate estimate is undefined")]
    DegenerateSample,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure in {context}: best value {value}, error estimate {error_estimate:e}")]
    NumericFailure {
        context: String,
        value: f64,
        error_estimate: f64,
    },
}

impl Error {
    pub(crate) fn numeric(context: impl Into<String>, value: f64, error_estimate: f64) -> Self {
        Error::NumericFailure {
            context: context.into(),
            value,
            error_estimate,
        }
    }

    /// Prefix the context of a numeric failure, leaving other variants untouched.
    pub fn with_context(self, prefix: impl std::fmt::Display) -> Self {
        match self {
            Error::NumericFailure {
                context,
                value,
                error_estimate,
            } => Error::NumericFailure {
                context: format!("{prefix}: {context}"),
                value,
                error_estimate,
            },
            other => other,
        }
    }
}
