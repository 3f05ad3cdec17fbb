use thiserror::Error;

use crate::family::Witness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value would leave the supported machine-word or memory range.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A family violates `2 ≤ q_1 < q_2 < ... < q_k ≤ x`.
    #[error("malformed family: {0}")]
    Structure(String),

    /// Two progressions that were required to be disjoint share an element.
    #[error("progressions intersect: {0}")]
    NotDisjoint(Witness),

    /// Unparseable input file.
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
