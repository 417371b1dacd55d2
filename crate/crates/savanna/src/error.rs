//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a precondition (bad domain, bad config).
    /// Maps to exit code 2 at the CLI.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A computation could not be completed (bracket lost, domain too
    /// short, population cap, ...). Maps to exit code 3 at the CLI.
    #[error("runtime failure: {0}")]
    Runtime(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Error::Runtime(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
