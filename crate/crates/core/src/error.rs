use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("solve error: {0}")]
    Solve(String),
    #[error("index {index} out of range 1..={n}")]
    Index { index: usize, n: usize },
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("missing argument: {0}")]
    Arity(String),
    #[error("admissibility violated at index {index}: {condition}")]
    Admissibility { index: usize, condition: String },
    #[error("point is zero")]
    ZeroPoint,
    #[error("domain error at r = {r}: {quantity} = {value}")]
    Domain { quantity: String, value: f64, r: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("ill-conditioned system (condition number {0:.3e})")]
    Conditioning(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
