use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input does not satisfy a structural invariant (shape, normalization, hermiticity).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The requested construction exceeds the configured size limits.
    #[error("size guard exceeded: {what} needs {needed}, limit is {limit}")]
    Guard {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("target diagonal is not majorized by the spectrum")]
    Majorization,

    #[error("operator is not permutation invariant (deviation {0:.3e})")]
    NotInvariant(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
