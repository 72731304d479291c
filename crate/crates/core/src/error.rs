use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("radial sequence exhausted: a({index}) requested but only {len} terms are defined")]
    SequenceExhausted { index: u64, len: usize },

    #[error("weight is not strictly positive at {0}")]
    NonPositiveWeight(String),

    #[error("point lies outside the open unit ball (|w|^2 = {0})")]
    OutsideBall(f64),

    #[error("series tail is unreliable: ratio {ratio} >= 1 at truncation degree {degree}")]
    UnreliableTail { ratio: f64, degree: u64 },

    #[error("matrix is not Hermitian within tolerance (deviation {0:e})")]
    NotHermitian(f64),

    #[error("truncated tuple is inconsistent: {0}")]
    Inconsistent(String),

    #[error("weight specification: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
