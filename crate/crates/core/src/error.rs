use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Precondition or format violation in caller-supplied data.
    #[error("invalid input: {0}")]
    Input(String),
    /// A configured search or pivot budget was exhausted.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    /// A compression oracle returned output violating its contract.
    #[error("oracle contract violated: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn oracle(msg: impl Into<String>) -> Self {
        Error::Oracle(msg.into())
    }
}
