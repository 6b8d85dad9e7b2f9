//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by tensor operations, graph handling, training and metrics.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible for the requested operation.
    #[error("shape error in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    /// An input value lies outside the operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates its stated range or a required
    /// parameter is missing.
    #[error("config error: {0}")]
    Config(String),

    /// The input is structurally too small or empty for the operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An API contract was violated (e.g. backward from a non-scalar).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A parsed graph violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A relation name does not exist in the graph.
    #[error("unknown relation: {0}")]
    UnknownRelation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
