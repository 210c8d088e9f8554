//! Capacity-maximizing transmit covariance for point-to-point MIMO links
//! whose transmit antennas are partitioned into groups, each group under its
//! own sum-power budget. One group is the classic total-power constraint,
//! singleton groups are per-antenna constraints, and anything in between
//! models clustered radio heads with heterogeneous amplifiers.
//!
//! Layout:
//! - [`matrix`], [`hermitian`] — dense complex linear algebra (deterministic
//!   Jacobi eigendecomposition, PSD projection, square roots, log-dets),
//! - [`model`] — channel/noise/partition types and derived quantities,
//! - [`solvers`] — closed-form, iterative, and one-shot water-filling
//!   solvers plus KKT diagnostics and algebraic identity checks,
//! - [`oracle`] — independent barrier and grid reference solvers used to
//!   verify the water-filling routes.

pub mod error;
pub mod hermitian;
pub mod matrix;
pub mod model;
pub mod oracle;
pub mod report;
pub mod solvers;
pub mod tol;

pub use error::{Error, Result};
pub use hermitian::{neg_part, EigenDecomposition, HermitianMatrix};
pub use matrix::ComplexMatrix;
pub use model::{complex, DualDiagonal, EffectiveBasis, PowerPartition, SystemModel};
pub use oracle::{grid_resolution_bound, grid_search_tiny, solve_barrier, BarrierOptions};
pub use report::{KktResiduals, SolveReport};
pub use solvers::{
    capacity, classical_waterfilling, count_active, covariance_from_dual, kkt_residuals,
    mmse_receiver, repair_feasibility, slack_orthogonality_residual, solve_full_rank,
    solve_iterative, solve_noniterative, update_dual, water_bottom_residual, whitened_evd,
    DualInit, IterativeOptions, WhitenedEvd,
};
