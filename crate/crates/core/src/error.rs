//! Error type shared by the whole crate.

use crate::report::SolveReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix deviates from conjugate symmetry by {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {lambda_min:.3e})")]
    NotPsd { lambda_min: f64 },
    #[error("matrix is not positive definite (min eigenvalue {lambda_min:.3e})")]
    NotPd { lambda_min: f64 },
    #[error("linear system is singular")]
    SingularMatrix,
    #[error("noise covariance is singular or indefinite")]
    SingularNoise,
    #[error("channel has no usable eigenmode")]
    ZeroChannel,
    #[error("antenna {antenna} appears in more than one group")]
    OverlappingGroups { antenna: usize },
    #[error("antenna {antenna} is not covered by any group")]
    IncompleteCover { antenna: usize },
    #[error("group {group} has non-positive budget {budget}")]
    NonPositiveBudget { group: usize, budget: f64 },
    #[error("group {group} is empty")]
    EmptyGroup { group: usize },
    #[error("expected {expected} budgets, got {got}")]
    BudgetCountMismatch { expected: usize, got: usize },
    #[error("dual multiplier for group {group} must be positive (got {value})")]
    NonPositiveMultiplier { group: usize, value: f64 },
    #[error("expected {expected} group multipliers, got {got}")]
    MultiplierCountMismatch { expected: usize, got: usize },
    #[error("antenna index {antenna} out of range for {n} antennas")]
    AntennaOutOfRange { antenna: usize, n: usize },
    #[error("Gram matrix has rank {rank} of {dim}; full rank required")]
    NotFullRank { rank: usize, dim: usize },
    #[error("closed-form covariance has eigenvalue {lambda_min:.3e}; outside the PSD regime")]
    NotPsdRegime { lambda_min: f64 },
    #[error("group {group} is orthogonal to the active signal subspace")]
    DegenerateGroup { group: usize },
    #[error("grid search supports at most 2 antennas (got {n})")]
    TooLarge { n: usize },
    #[error("barrier line search stalled (gradient norm {gradient_norm:.3e})")]
    NoProgress {
        gradient_norm: f64,
        report: Box<SolveReport>,
    },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
}

pub type Result<T> = std::result::Result<T, Error>;
