use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("signature error: {0}")]
    Signature(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("element {element} out of range for a structure of size {size}")]
    OutOfRange { element: usize, size: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("size limit exceeded: {0}")]
    Limit(String),
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("search inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
