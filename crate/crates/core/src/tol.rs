//! Centralized numerical tolerances.
//!
//! Every threshold used by the library lives here so tests and callers have a
//! single knob. Values are relative unless noted otherwise.

/// Maximum deviation from conjugate symmetry accepted when constructing a
/// Hermitian matrix (relative to the largest entry magnitude). Inputs within
/// this band are symmetrized exactly.
pub const HERMITIAN_CONSTRUCTION: f64 = 1e-12;

/// Eigendecomposition quality gate: reconstruction and unitarity residuals
/// (relative Frobenius) must stay below this.
pub const EVD_RECONSTRUCTION: f64 = 1e-10;

/// Eigenvalues above `-PSD_CLAMP_REL * lambda_max` are treated as nonnegative
/// roundoff and clamped to zero; anything below is a genuine PSD violation.
pub const PSD_CLAMP_REL: f64 = 1e-10;

/// Hermitian square root residual: `sqrt(A)^2` must match `A` to this
/// relative Frobenius error.
pub const SQRT_RESIDUAL_REL: f64 = 1e-9;

/// Rank cut-off for the channel Gram matrix: eigenvalues above
/// `RANK_TOL * lambda_max` count toward the effective rank.
pub const RANK_TOL: f64 = 1e-10;

/// Accepted relative overshoot of a group power beyond its budget.
pub const FEASIBILITY_REL: f64 = 1e-8;

/// A group whose projector mass is below this is orthogonal to the active
/// signal subspace and is excluded from dual updates.
pub const DEGENERATE_GROUP: f64 = 1e-12;

/// Group powers below `REPAIR_ZERO_REL * budget` are treated as zero by the
/// feasibility repair (no rescaling), guarding against huge scale factors.
pub const REPAIR_ZERO_REL: f64 = 1e-12;
