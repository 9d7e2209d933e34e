//! Error type shared across the workbench.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter or input rejected before any computation ran.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two objects that must live on the same lattice do not.
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    /// A configuration violates a stated hypothesis of the identity it
    /// exercises; the message names the violated condition.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// The requested object exists mathematically but is outside the
    /// implemented catalog (e.g. an associate space with no closed form).
    #[error("not representable in the implemented catalog: {0}")]
    Unsupported(String),

    /// Internal consistency check failed. This is a bug, not bad input.
    #[error("internal invariant broken: {0}")]
    Internal(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
