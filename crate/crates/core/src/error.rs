use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The instance is too large for the requested exhaustive computation.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A matrix decomposition did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A modelling assumption required by a probability bound does not hold.
    #[error("model assumption violated: {0}")]
    ModelAssumption(String),

    /// The configuration model could not produce a simple graph.
    #[error("configuration model failed to produce a simple graph after {retries} restarts")]
    MatchingFailed { retries: usize },

    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CoreError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        CoreError::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        CoreError::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
