use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix dimension {0} not supported (need d >= 2)")]
    InvalidDimension(usize),

    #[error("operation requires d = 2, got d = {0}")]
    UnsupportedDimension(usize),

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("map {index} is not invertible (smallest singular value {sigma_min:e})")]
    NotInvertible { index: usize, sigma_min: f64 },

    #[error("system is not contracting (max norm {max_norm})")]
    NonContracting { max_norm: f64 },

    #[error("word budget exceeded: {required} words required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("matrix does not have real distinct eigenvalues")]
    NoRealEigenbasis,

    #[error("hypothesis fails: {0}")]
    HypothesisFailed(String),

    #[error("empty sample set")]
    EmptySample,

    #[error("malformed sample file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
