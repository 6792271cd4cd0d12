use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input value lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A structurally invalid argument (bad bounds, wrong lengths, grids
    /// too coarse, colliding windows).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A dataset that violates its invariants (empty, non-positive sigma,
    /// mismatched columns).
    #[error("dataset error: {0}")]
    Data(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
