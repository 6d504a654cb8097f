//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by grid construction, file I/O, and the metric/kernel ops.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file contents (bad header fields, payload size mismatch,
    /// non-finite voxels).
    #[error("format error: {0}")]
    Format(String),

    /// Recognized but unsupported input (e.g. two-file NIfTI, exotic datatype).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Underlying filesystem failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Operand shapes (dims or tensor shapes) do not match.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A label value outside the {0,1,2,3} scheme.
    #[error("invalid label {value} at flat index {index}")]
    Label { index: usize, value: u8 },

    /// A value outside its required range (e.g. probability outside [0,1]).
    #[error("range error: {0}")]
    Range(String),

    /// Wrong number of arguments (empty ensemble, length mismatch, n < 2).
    #[error("arity error: {0}")]
    Arity(String),

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// An operation that requires a nonempty mask received an empty one.
    #[error("empty mask: {0}")]
    EmptyMask(String),

    /// Degenerate statistical input (e.g. zero-variance differences).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A score table with missing model/case cells.
    #[error("incomplete table: {0}")]
    Incomplete(String),

    /// A random construction that cannot satisfy its constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
