//! Crate-wide error type and result alias.

use thiserror::Error;

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error for dataset handling, model fitting, and optimization.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV header did not contain a required column.
    #[error("schema mismatch: column '{column}' {problem}")]
    SchemaMismatch { column: String, problem: String },

    /// A CSV cell could not be parsed as a finite number.
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// An operation that needs rows received none, or a filter removed all of them.
    #[error("{context}: no rows remain")]
    EmptyInput { context: String },

    /// Fold count outside `2..=n`.
    #[error("invalid fold count k={k} for {n} rows (need 2 <= k <= n)")]
    InvalidFoldCount { k: usize, n: usize },

    /// Vector or matrix extents disagree.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    /// Fewer observations than the operation can work with.
    #[error("insufficient data for {context}: need at least {need}, got {got}")]
    InsufficientData {
        context: String,
        need: usize,
        got: usize,
    },

    /// A neighbourhood size outside `1..n`.
    #[error("invalid neighbour count k={k} for {n} points (need 1 <= k < n)")]
    InvalidNeighbourCount { k: usize, n: usize },

    /// Unknown model family name.
    #[error("unknown model family '{family}'")]
    UnknownFamily { family: String },

    /// A registered family that this toolkit deliberately does not train.
    #[error("model family '{family}' is registered but not implemented: {note}")]
    UnimplementedFamily { family: String, note: String },

    /// A hyperparameter key or value was rejected by the family's validator.
    #[error("invalid hyperparameter for family '{family}': {message}")]
    InvalidHyperparameter { family: String, message: String },

    /// Paired test where every difference is exactly zero.
    #[error("degenerate paired difference: all {n} differences are exactly zero")]
    DegenerateDifference { n: usize },

    /// Malformed bounds, configs, or other caller-supplied structure.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A serialized model could not be read back.
    #[error("model format error at line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Underlying CSV reader failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
