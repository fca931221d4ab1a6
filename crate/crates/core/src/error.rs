use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not invertible")]
    NotInvertible,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("hamming ball too large: {size} elements exceeds limit {limit}")]
    BallTooLarge { size: String, limit: u64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("invalid adversary model: {0}")]
    InvalidEve(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("infeasible: {0}")]
    Infeasible(String),
}
