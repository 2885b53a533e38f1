use thiserror::Error;

use crate::point::Layout;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch { expected: Layout, found: Layout },

    #[error("non-finite value in {0}")]
    NonFiniteValue(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("linear oracle returned an ascent direction (d = {d:e})")]
    InvalidDescent { d: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("matrix is numerically zero")]
    ZeroMatrix,

    #[error("sliced oracle infeasible: {0}")]
    InfeasibleOracle(String),

    #[error("sliced oracle degenerate: {0}")]
    DegenerateOracle(String),

    #[error("missing metadata: {0}")]
    MissingMetadata(String),

    #[error("problem provides no projection onto its domain")]
    MissingProjection,

    #[error("problem provides no sliced linear oracle")]
    MissingSlicedOracle,

    #[error("radius {radius} must exceed the least-norm solution norm {min_norm}")]
    RadiusTooSmall { radius: f64, min_norm: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate entry at row {row}, column {col}")]
    DuplicateEntry { row: usize, col: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteValue(what.to_string()))
    }
}
