use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or mismatched input (wrong group ring, shape, range).
    #[error("specification error: {0}")]
    Spec(String),
    /// A chain-level witness failed validation.
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("contraction failure: {0}")]
    ContractionFailure(String),
    #[error("complex is not acyclic: {0}")]
    NotAcyclic(String),
    #[error("not a certified unit: {0}")]
    NotAUnit(String),
    #[error("trivial group: every generator is the identity")]
    TrivialGroup,
    #[error("derivation is not nilpotent within {0} steps")]
    NonNilpotent(usize),
    #[error("homotopy is not unipotent: {0}")]
    NonUnipotentHomotopy(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A computed result failed its own post-condition check.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
