use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid permutation: {0}")]
    InvalidPerm(String),
    #[error("local group is not 2-transitive")]
    NotTwoTransitive,
    #[error("inconsistent local actions: {0}")]
    Inconsistent(String),
    #[error("address `{0}` is not reduced")]
    NotReduced(String),
    #[error("element is not hyperbolic")]
    NotHyperbolic,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
