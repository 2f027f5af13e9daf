//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Exact searches refuse inputs above their cap instead of approximating.
    #[error("graph with {n} vertices exceeds the exact-search cap of {cap}")]
    SizeLimit { n: usize, cap: usize },

    /// Carries the best bracketing pair found before the solver gave up.
    #[error(
        "SDP did not converge within {iterations} iterations \
         (primal {primal:.9}, dual {dual:.9}, gap {gap:.3e})"
    )]
    SdpNonConvergence {
        iterations: usize,
        primal: f64,
        dual: f64,
        gap: f64,
    },

    #[error("incompatible context: measurements {a} and {b} are not exclusive (no edge)")]
    IncompatibleContext { a: String, b: String },

    #[error("table is missing contexts: {}", .0.join(", "))]
    IncompleteTable(Vec<String>),

    #[error("count record for context {context} has zero total counts")]
    DegenerateRecord { context: String },

    /// JSON ingestion failure; `path` points into the offending document.
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
