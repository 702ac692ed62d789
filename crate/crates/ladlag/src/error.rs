use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// The set is not bounded away from zero, so constructions that
    /// require jump sizes of some minimum magnitude do not apply.
    #[error("set is not zero-separated: 0 lies in its closure")]
    NotInBStar,

    /// A configuration value violates its constraints.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numeric procedure produced a non-finite value or failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
