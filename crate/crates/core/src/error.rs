use thiserror::Error;

/// Failure modes shared by every module of the crate.
///
/// The variants line up with the CLI exit codes: `Domain` and `Numerical`
/// map to 3, `Resource` to 4, `Verification` to 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The predicted work or memory exceeds a configured guard.
    #[error("resource guard exceeded: {what} needs {needed} units, limit is {limit}")]
    Resource {
        what: String,
        needed: u128,
        limit: u128,
    },

    /// A numerical procedure could not reach the requested accuracy.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A structural identity that should hold exactly did not.
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, needed: u128, limit: u128) -> Self {
        Error::Resource {
            what: what.into(),
            needed,
            limit,
        }
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
