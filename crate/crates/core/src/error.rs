use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix dimension {dim} exceeds the oracle cap of {cap}")]
    OracleCap { dim: usize, cap: usize },

    #[error("state space of {size} states exceeds the cap of {cap} (exact simulation is for small instances only)")]
    StateSpaceCap { size: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("distribution is not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("expectation has imaginary part {0:e}")]
    NonRealExpectation(f64),

    #[error("non-finite gradient at parameter {index}")]
    NonFiniteGradient { index: usize },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
