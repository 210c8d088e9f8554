//! Solver output containers.

use crate::hermitian::HermitianMatrix;
use crate::model::DualDiagonal;

/// Numerical optimality certificate for a candidate covariance.
///
/// All residuals are nonnegative; an exact optimum has every field at zero.
#[derive(Debug, Clone)]
pub struct KktResiduals {
    /// The larger of the anti-Hermitian norm and the negative-part norm of
    /// the slack matrix `D - (I + S Q)^{-1} S`.
    pub stationarity: f64,
    /// `|Tr(Q (D - (I + S Q)^{-1} S))|`.
    pub complementarity_q: f64,
    /// Per group: `|d_k * (p_k - group power)|`.
    pub complementarity_power: Vec<f64>,
    /// Largest relative budget overshoot.
    pub feasibility: f64,
    /// `|min eigenvalue of Q|` when negative, else zero.
    pub psd_violation: f64,
}

impl KktResiduals {
    /// Largest residual across all fields.
    pub fn max_residual(&self) -> f64 {
        let power = self
            .complementarity_power
            .iter()
            .fold(0.0f64, |a, &b| a.max(b));
        self.stationarity
            .max(self.complementarity_q)
            .max(power)
            .max(self.feasibility)
            .max(self.psd_violation)
    }
}

/// Result of any solve: the covariance plus bookkeeping.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Transmit covariance (PSD, group powers within budgets).
    pub q: HermitianMatrix,
    /// Dual weights when the solver produces them; the reference solvers
    /// leave this empty.
    pub dual: Option<DualDiagonal>,
    pub capacity_nats: f64,
    /// Dual-update iterations (closed forms report 0; the barrier reports
    /// its total inner step count).
    pub iterations: usize,
    /// Capacity after each iteration, starting with the initializer.
    pub capacity_trace: Vec<f64>,
    pub kkt: KktResiduals,
    /// Per group: budget minus delivered power.
    pub group_power_slack: Vec<f64>,
}

impl SolveReport {
    pub fn capacity_bits(&self) -> f64 {
        self.capacity_nats / std::f64::consts::LN_2
    }
}
