//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dictionary construction, guarantee evaluation,
/// sampling, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} ({left} vs {right})")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} must be a power of two, got {1}")]
    NotPowerOfTwo(&'static str, usize),

    #[error("column {index} has norm {norm}, expected unit norm within {tol}")]
    ColumnNotUnitNorm { index: usize, norm: f64, tol: f64 },

    #[error("beta floor violated: {condition} requires beta >= {floor}, got {beta}")]
    BetaFloor {
        condition: &'static str,
        floor: f64,
        beta: f64,
    },

    #[error("out of scope: {0}")]
    OutOfScope(&'static str),

    #[error("iteration did not converge after {iterations} iterations (last estimate {last_estimate})")]
    NonConvergence {
        iterations: usize,
        last_estimate: f64,
    },

    #[error("rank-deficient sub-dictionary: sigma_min = {sigma_min}")]
    RankDeficient { sigma_min: f64 },

    #[error("combinatorial budget exceeded: {combinations} supports of size <= {max_sparsity} (limit {limit})")]
    BudgetExceeded {
        combinations: f64,
        max_sparsity: usize,
        limit: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
