use thiserror::Error;

/// Errors raised by martonkit operations.
///
/// The variants map one-to-one onto the CLI exit-code contract: input
/// problems (`Validation`, `Usage`) exit with 2, `Numerical` with 3 and
/// `Resource` with 4.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Usage(_) => 2,
            Error::Numerical(_) => 3,
            Error::Resource(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
