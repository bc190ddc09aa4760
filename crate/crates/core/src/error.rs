use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the domain closure: {0}")]
    OutsideDomain(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("admissibility refused: {0}")]
    Admissibility(String),

    #[error("iteration cap exceeded: {0}")]
    IterationCap(String),

    #[error("degenerate measurement: {0}")]
    Degenerate(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
