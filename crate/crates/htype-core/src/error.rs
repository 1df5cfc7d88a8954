use thiserror::Error;

/// Errors surfaced by the group, metric, curve and optimizer layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("truncation mismatch: {0} blocks vs {1} blocks")]
    TruncationMismatch(usize, usize),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("axiom check failed: {identity} residual {residual:.3e} exceeds tol {tol:.3e}")]
    AxiomFailure {
        identity: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("metric is strong: {0}")]
    StrongMetric(String),

    #[error("ambient truncation too small: need at least {required} blocks, have {available}")]
    Capacity { required: usize, available: usize },

    #[error("curve is not horizontal: lift residual {0:.3e}")]
    NotHorizontal(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
