use thiserror::Error;

/// Errors raised by the coherence library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty vector")]
    Empty,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },

    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entries are not normalized (total {total})")]
    NotNormalized { total: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible two-level step: mixing weight {weight} outside [0, 1]")]
    InfeasibleStep { weight: f64 },

    #[error("resource cap exceeded: {requested} amplitudes requested, cap is {cap}")]
    ResourceCap { requested: usize, cap: usize },

    #[error("invalid density matrix: {0}")]
    DensityMatrix(String),

    #[error("malformed Kraus set: {0}")]
    Kraus(String),

    #[error("Kraus set is not complete (residual {residual:e})")]
    Incomplete { residual: f64 },

    #[error("pruned branches carry non-negligible probability {lost:e}")]
    ProbabilityLeak { lost: f64 },

    #[error("conversion probability is zero; no ladder exists")]
    NoLadder,

    #[error("invalid ladder: {0}")]
    Ladder(String),
}

pub type Result<T> = std::result::Result<T, Error>;
