use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: u32, right: u32 },
    #[error("element is not a unit")]
    NotAUnit,
    #[error("size cap exceeded: {size} > {cap}")]
    SizeCapExceeded { size: u128, cap: u128 },
    #[error("shape mismatch: expected {expected} coordinates, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("ideals are taken over different partitions")]
    PartitionMismatch,
    #[error("no part of the partition has length {0}")]
    NoMatchingColumn(u32),
    #[error("element does not lie in the orbit of the given ideal")]
    NotInOrbit,
    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("sum of B-sets requires an odd prime, got p = {0}")]
    EvenPrime(u32),
    #[error("structure constant not constant on orbital {orbital}: {witness}")]
    NonConstantCount { orbital: usize, witness: String },
}

pub type Result<T> = std::result::Result<T, Error>;
