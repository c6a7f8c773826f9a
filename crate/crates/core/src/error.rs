use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmlError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("refused by cost guard: {0}")]
    CostGuard(String),
    #[error("caustic: {0}")]
    Caustic(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl From<std::io::Error> for QmlError {
    fn from(e: std::io::Error) -> Self {
        QmlError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QmlError>;
