use thiserror::Error;

/// Failure signals raised by the kernels and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A triangular pivot fell below the relative threshold.
    #[error("rank-deficient factor: |R[{index}]| = {pivot:e} below {threshold:e}")]
    RankDeficiency {
        index: usize,
        pivot: f64,
        threshold: f64,
    },

    /// The inner Woodbury system is too badly conditioned to trust.
    #[error("ill-conditioned inner system (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    /// Non-finite evaluation, overflow or a broken positivity assumption.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
