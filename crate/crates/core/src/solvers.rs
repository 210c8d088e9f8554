//! Solution procedures for the grouped-power covariance problem.
//!
//! The optimal covariance has the water-filling form
//! `Q = D^{-1/2} U_M (I - L^{-1})^+ U_M^H D^{-1/2}` where `(U_M, L)` is the
//! eigensystem of the dual-whitened Gram matrix and `D` carries one positive
//! weight per antenna group. Three routes compute it:
//!
//! * [`solve_full_rank`] — closed form when the Gram matrix has full rank and
//!   the resulting covariance is PSD (high SNR),
//! * [`solve_iterative`] — fixed-point iteration alternating the dual update
//!   with the whitened eigendecomposition, repairing feasibility each step,
//! * [`solve_noniterative`] — one-shot matrix water-filling with a PSD
//!   projection and a feasibility repair; with a single group it reduces to
//!   classical water-filling exactly.
//!
//! [`kkt_residuals`] certifies any candidate, and the two `*_residual`
//! identity checks validate the algebra the solvers rest on.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{neg_part, HermitianMatrix};
use crate::matrix::ComplexMatrix;
use crate::model::{DualDiagonal, EffectiveBasis, PowerPartition, SystemModel};
use crate::report::{KktResiduals, SolveReport};
use crate::tol;

/// Eigensystem of `D^{-1/2} U1 diag(lambda) U1^H D^{-1/2}` restricted to its
/// `K` nonzero eigenvalues, plus the count `T` of eigenvalues above one
/// (the modes that receive power).
#[derive(Debug, Clone)]
pub struct WhitenedEvd {
    u1_m: ComplexMatrix,
    lambda_tilde: Vec<f64>,
    t_active: usize,
}

impl WhitenedEvd {
    /// Assemble from parts; used by tests probing boundary conventions.
    pub fn from_parts(u1_m: ComplexMatrix, lambda_tilde: Vec<f64>, t_active: usize) -> Self {
        assert_eq!(u1_m.cols(), lambda_tilde.len());
        assert!(t_active <= lambda_tilde.len());
        Self {
            u1_m,
            lambda_tilde,
            t_active,
        }
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.u1_m
    }

    pub fn gains(&self) -> &[f64] {
        &self.lambda_tilde
    }

    /// Number of whitened gains strictly above one.
    pub fn active_modes(&self) -> usize {
        self.t_active
    }
}

/// Eigendecomposition of the dual-whitened effective Gram matrix.
pub fn whitened_evd(dual: &DualDiagonal, basis: &EffectiveBasis) -> WhitenedEvd {
    let inv_sqrt = dual.inv_sqrt_entries();
    let w = basis.effective_gram().conjugate_by_diag(&inv_sqrt);
    let e = w.evd();
    let k = basis.rank();
    let u1_m = e.vectors.leading_columns(k);
    let lambda_tilde: Vec<f64> = e.values[..k].iter().map(|&v| v.max(0.0)).collect();
    let t_active = count_active(&lambda_tilde);
    WhitenedEvd {
        u1_m,
        lambda_tilde,
        t_active,
    }
}

/// Number of entries strictly greater than one. Entries equal to one carry
/// zero power either way; the strict boundary keeps the count deterministic.
pub fn count_active(lambda_tilde: &[f64]) -> usize {
    lambda_tilde.iter().take_while(|&&v| v > 1.0).count()
}

/// Closed-form covariance for a given dual:
/// `Q = D^{-1/2} U_M (I - L^{-1})^+ U_M^H D^{-1/2}`.
pub fn covariance_from_dual(dual: &DualDiagonal, basis: &EffectiveBasis) -> HermitianMatrix {
    let w = whitened_evd(dual, basis);
    let weights: Vec<f64> = w
        .lambda_tilde
        .iter()
        .map(|&l| (1.0 - 1.0 / l).max(0.0))
        .collect();
    let core = HermitianMatrix::from_scaled_basis(&w.u1_m, &weights);
    core.conjugate_by_diag(&dual.inv_sqrt_entries())
}

/// One dual update: for each group the projector mass over the active modes
/// divided by budget plus the frozen water-bottom mass.
///
/// Errors with [`Error::DegenerateGroup`] when a group is orthogonal to the
/// active subspace; the solve loops instead zero that group's rows and
/// columns of `Q` and keep its previous weight.
pub fn update_dual(
    prev: &DualDiagonal,
    w: &WhitenedEvd,
    partition: &PowerPartition,
) -> Result<DualDiagonal> {
    assert!(w.t_active >= 1, "dual update needs at least one active mode");
    let (proj_diag, frozen_diag) = active_term_diagonals(prev, w);
    let (dual, degenerate) = grouped_dual(partition, &proj_diag, &frozen_diag, Some(prev));
    if let Some(&g) = degenerate.first() {
        return Err(Error::DegenerateGroup { group: g });
    }
    Ok(dual)
}

/// Diagonals of the active-mode projector and of the frozen water-bottom
/// term whitened by the previous dual.
fn active_term_diagonals(prev: &DualDiagonal, w: &WhitenedEvd) -> (Vec<f64>, Vec<f64>) {
    let n = w.u1_m.rows();
    let t = w.t_active;
    let prev_inv = prev.inv_sqrt_entries();
    let mut proj = vec![0.0; n];
    let mut frozen = vec![0.0; n];
    for j in 0..n {
        let mut p = 0.0;
        let mut f = 0.0;
        for c in 0..t {
            let m = w.u1_m.get(j, c).norm_sqr();
            p += m;
            f += m / w.lambda_tilde[c];
        }
        proj[j] = p;
        frozen[j] = f * prev_inv[j] * prev_inv[j];
    }
    (proj, frozen)
}

/// Shared grouped-dual formula: `d_k = sum(proj) / (p_k + sum(bottom))` with
/// degenerate groups (projector mass below [`tol::DEGENERATE_GROUP`]) left at
/// the fallback weight and reported.
fn grouped_dual(
    partition: &PowerPartition,
    proj_diag: &[f64],
    bottom_diag: &[f64],
    fallback: Option<&DualDiagonal>,
) -> (DualDiagonal, Vec<usize>) {
    let mut d = vec![1.0; partition.n_antennas()];
    let mut degenerate = Vec::new();
    for (k, group) in partition.groups().iter().enumerate() {
        let num: f64 = group.iter().map(|&j| proj_diag[j]).sum();
        let den: f64 = partition.budgets()[k] + group.iter().map(|&j| bottom_diag[j]).sum::<f64>();
        if num < tol::DEGENERATE_GROUP {
            degenerate.push(k);
            for &j in group {
                d[j] = fallback.map_or(1.0, |f| f.entries()[j]);
            }
        } else {
            for &j in group {
                d[j] = num / den;
            }
        }
    }
    (
        DualDiagonal::from_entries(d).expect("grouped dual entries are positive"),
        degenerate,
    )
}

/// PSD-project, then rescale each group's rows and columns so its power
/// meets the budget exactly. Groups carrying no power are left unscaled.
pub fn repair_feasibility(q: &HermitianMatrix, partition: &PowerPartition) -> HermitianMatrix {
    let projected = q.psd_project();
    let powers = partition.group_powers(&projected);
    let mut scale = vec![1.0; partition.n_antennas()];
    for (k, group) in partition.groups().iter().enumerate() {
        let p = partition.budgets()[k];
        let g = powers[k];
        if g > tol::REPAIR_ZERO_REL * p {
            let s = (p / g).sqrt();
            for &j in group {
                scale[j] = s;
            }
        }
    }
    projected.conjugate_by_diag(&scale)
}

/// Mutual-information of the link in nats, evaluated through the symmetrized
/// form `logdet(I + R^{-1/2} H Q H^H R^{-1/2})`.
pub fn capacity(q: &HermitianMatrix, model: &SystemModel) -> Result<f64> {
    let r_inv_sqrt = model.noise_inv_sqrt()?;
    let a = r_inv_sqrt.as_matrix().mul(model.channel());
    let g = a.mul(q.as_matrix()).mul(&a.adjoint());
    let inner = HermitianMatrix::symmetrized(ComplexMatrix::identity(g.rows()).add(&g))?;
    inner.logdet_pd()
}

/// Linear MMSE receive filter `G = Q H^H (H Q H^H + R_n)^{-1}`.
pub fn mmse_receiver(q: &HermitianMatrix, model: &SystemModel) -> Result<ComplexMatrix> {
    let h = model.channel();
    let hqh = h.mul(q.as_matrix()).mul(&h.adjoint());
    let denom = hqh.add(model.noise().as_matrix());
    let inv = denom.inverse().map_err(|_| Error::SingularNoise)?;
    Ok(q.as_matrix().mul(&h.adjoint()).mul(&inv))
}

/// Optimality residuals of a candidate `(Q, D)` pair.
pub fn kkt_residuals(
    q: &HermitianMatrix,
    dual: &DualDiagonal,
    model: &SystemModel,
    partition: &PowerPartition,
) -> Result<KktResiduals> {
    let s = model.gram_matrix()?;
    let n = q.dim();
    let m = ComplexMatrix::identity(n).add(&s.as_matrix().mul(q.as_matrix()));
    let inv_s = m.solve(s.as_matrix())?;
    let psi_raw = dual.as_matrix().sub(&inv_s);

    // split into Hermitian and anti-Hermitian parts
    let psi_adj = psi_raw.adjoint();
    let herm_part = psi_raw.add(&psi_adj).scale_re(0.5);
    let anti_norm = psi_raw.sub(&psi_adj).scale_re(0.5).fro_norm();
    let psi = HermitianMatrix::symmetrized(herm_part)?;
    let neg = neg_part(&psi.evd().values);
    let neg_norm = neg.iter().map(|v| v * v).sum::<f64>().sqrt();

    let complementarity_q = q.as_matrix().mul(&psi_raw).trace().norm();

    let powers = partition.group_powers(q);
    let complementarity_power = partition
        .groups()
        .iter()
        .zip(partition.budgets())
        .zip(&powers)
        .map(|((g, &p), &gp)| (dual.entries()[g[0]] * (p - gp)).abs())
        .collect();

    let feasibility = partition.max_relative_violation(q);
    let min_eig = q.min_eigenvalue();
    Ok(KktResiduals {
        stationarity: anti_norm.max(neg_norm),
        complementarity_q,
        complementarity_power,
        feasibility,
        psd_violation: (-min_eig).max(0.0),
    })
}

/// Classical single-budget water-filling over scalar gains. Returns the
/// per-mode powers in input order.
pub fn classical_waterfilling(gains: &[f64], total_power: f64) -> Vec<f64> {
    waterfill_with_level(gains, total_power).0
}

/// Water-filling plus the final water level (1 / dual weight).
pub(crate) fn waterfill_with_level(gains: &[f64], total_power: f64) -> (Vec<f64>, f64) {
    assert!(gains.iter().all(|&g| g > 0.0), "gains must be positive");
    let n = gains.len();
    if total_power <= 0.0 || n == 0 {
        let level = gains.iter().cloned().fold(0.0f64, f64::max);
        return (vec![0.0; n], if level > 0.0 { 1.0 / level } else { 0.0 });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| gains[j].partial_cmp(&gains[i]).unwrap());
    let inv: Vec<f64> = order.iter().map(|&i| 1.0 / gains[i]).collect();

    // grow the active set while the water level stays above the next bottom
    let mut active = 1;
    let mut sum_inv = inv[0];
    for m in 1..n {
        let level = (total_power + sum_inv + inv[m]) / (m as f64 + 1.0);
        if level > inv[m] {
            sum_inv += inv[m];
            active = m + 1;
        } else {
            break;
        }
    }
    let level = (total_power + sum_inv) / active as f64;
    let mut q = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        if rank < active {
            q[i] = (level - inv[rank]).max(0.0);
        }
    }
    (q, level)
}

/// Options for [`solve_iterative`].
#[derive(Debug, Clone)]
pub struct IterativeOptions {
    pub max_iter: usize,
    /// Stop once the relative capacity gain drops below this.
    pub tol: f64,
    pub init: DualInit,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-8,
            init: DualInit::NonIterative,
        }
    }
}

/// Initial dual for the iteration.
#[derive(Debug, Clone, Default)]
pub enum DualInit {
    /// Start from the non-iterative water-filling dual (fast convergence).
    #[default]
    NonIterative,
    /// Start from the all-ones dual.
    Identity,
    Given(DualDiagonal),
}

/// Closed form for a full-rank Gram matrix in the PSD regime:
/// `Q = D^{-1} - S^{-1}` with `d_k = |group| / (p_k + sum_j [S^{-1}]_jj)`.
///
/// Errors with [`Error::NotFullRank`] when the channel rank is deficient and
/// with [`Error::NotPsdRegime`] when the closed form leaves the PSD cone
/// (callers should fall back to the iterative or non-iterative route).
pub fn solve_full_rank(model: &SystemModel, partition: &PowerPartition) -> Result<SolveReport> {
    check_dims(model, partition)?;
    let s = model.gram_matrix()?;
    let basis = EffectiveBasis::from_gram(&s, tol::RANK_TOL)?;
    let n = model.n_tx();
    if basis.rank() < n {
        return Err(Error::NotFullRank {
            rank: basis.rank(),
            dim: n,
        });
    }
    let s_inv = basis.water_bottom(); // equals S^{-1} at full rank
    let s_inv_diag = s_inv.diag_re();
    let mut per_group = Vec::with_capacity(partition.n_groups());
    for (k, group) in partition.groups().iter().enumerate() {
        let inv_mass: f64 = group.iter().map(|&j| s_inv_diag[j]).sum();
        per_group.push(group.len() as f64 / (partition.budgets()[k] + inv_mass));
    }
    let dual = DualDiagonal::from_per_group(partition, &per_group)?;

    let d_inv: Vec<f64> = dual.entries().iter().map(|v| 1.0 / v).collect();
    let q = HermitianMatrix::from_real_diag(&d_inv).sub(&s_inv);
    let e = q.evd();
    let lambda_max = e.values.first().copied().unwrap_or(0.0);
    let lambda_min = e.values.last().copied().unwrap_or(0.0);
    if lambda_min < -tol::PSD_CLAMP_REL * lambda_max.abs().max(lambda_min.abs()) {
        return Err(Error::NotPsdRegime {
            lambda_min,
        });
    }

    let cap = capacity(&q, model)?;
    let kkt = kkt_residuals(&q, &dual, model, partition)?;
    let slack = power_slack(&q, partition);
    Ok(SolveReport {
        q,
        dual: Some(dual),
        capacity_nats: cap,
        iterations: 0,
        capacity_trace: vec![cap],
        kkt,
        group_power_slack: slack,
    })
}

/// One-shot matrix water-filling: dual from the high-SNR formula, covariance
/// `[D^{-1/2} U1 U1^H D^{-1/2} - U1 L^{-1} U1^H]^+`, then feasibility repair.
/// A single group reduces to classical water-filling exactly.
pub fn solve_noniterative(model: &SystemModel, partition: &PowerPartition) -> Result<SolveReport> {
    check_dims(model, partition)?;
    let s = model.gram_matrix()?;
    let basis = EffectiveBasis::from_gram(&s, tol::RANK_TOL)?;
    let (q, dual, _) = noniterative_core(partition, &basis);
    let cap = capacity(&q, model)?;
    let kkt = kkt_residuals(&q, &dual, model, partition)?;
    let slack = power_slack(&q, partition);
    Ok(SolveReport {
        q,
        dual: Some(dual),
        capacity_nats: cap,
        iterations: 0,
        capacity_trace: vec![cap],
        kkt,
        group_power_slack: slack,
    })
}

/// Shared non-iterative construction; also the default initializer for the
/// iterative solve. Returns `(Q, D, degenerate group indices)`.
fn noniterative_core(
    partition: &PowerPartition,
    basis: &EffectiveBasis,
) -> (HermitianMatrix, DualDiagonal, Vec<usize>) {
    if partition.is_single_group() {
        // With one group the dual is proportional to the identity and the
        // problem is classical water-filling over the channel gains; solve
        // the water level exactly instead of using the all-modes-active
        // formula, so inactive modes are handled without repair error.
        let total = partition.budgets()[0];
        let (q_modes, level) = waterfill_with_level(basis.gains(), total);
        let q = HermitianMatrix::from_scaled_basis(basis.basis(), &q_modes);
        let dual = DualDiagonal::uniform(partition.n_antennas(), 1.0 / level)
            .expect("water level is positive");
        return (repair_feasibility(&q, partition), dual, Vec::new());
    }

    let proj = basis.projector();
    let bottom = basis.water_bottom();
    let (dual, degenerate) = grouped_dual(partition, &proj.diag_re(), &bottom.diag_re(), None);
    let level_term = proj.conjugate_by_diag(&dual.inv_sqrt_entries());
    let mut q = level_term.sub(&bottom);
    if !degenerate.is_empty() {
        let idx: Vec<usize> = degenerate
            .iter()
            .flat_map(|&k| partition.groups()[k].iter().copied())
            .collect();
        q = q.zero_rows_cols(&idx);
    }
    (repair_feasibility(&q, partition), dual, degenerate)
}

/// Fixed-point iteration: refresh the whitened eigensystem from the previous
/// dual, update the dual from the active-mode projector, rebuild the
/// covariance with the frozen water-bottom term, repair feasibility, and
/// stop when the relative capacity gain drops below `opts.tol`.
///
/// The trace records every iterate as computed; the report returns the
/// best-capacity iterate, which is always feasible.
pub fn solve_iterative(
    model: &SystemModel,
    partition: &PowerPartition,
    opts: &IterativeOptions,
) -> Result<SolveReport> {
    check_dims(model, partition)?;
    let s = model.gram_matrix()?;
    let basis = EffectiveBasis::from_gram(&s, tol::RANK_TOL)?;
    let n = partition.n_antennas();

    let (q0, d0) = match &opts.init {
        DualInit::NonIterative => {
            let (q, d, _) = noniterative_core(partition, &basis);
            (q, d)
        }
        DualInit::Identity => {
            let d = DualDiagonal::uniform(n, 1.0).expect("positive");
            let q = repair_feasibility(&covariance_from_dual(&d, &basis), partition);
            (q, d)
        }
        DualInit::Given(d) => {
            if d.len() != n {
                return Err(Error::DimensionMismatch {
                    context: format!("initial dual has {} entries, expected {n}", d.len()),
                });
            }
            let q = repair_feasibility(&covariance_from_dual(d, &basis), partition);
            (q, d.clone())
        }
    };

    let cap0 = capacity(&q0, model)?;
    let mut trace = vec![cap0];
    let mut best_cap = cap0;
    let mut best_q = q0;
    let mut best_d = d0.clone();
    let mut d_prev = d0;
    let mut cap_prev = cap0;
    let mut iterations = 0;

    for it in 1..=opts.max_iter {
        let mut w = whitened_evd(&d_prev, &basis);
        if w.t_active == 0 {
            // Every whitened gain is at or below the water line, meaning the
            // current dual overweights all groups. Relax it so the top mode
            // sits just above the boundary and retry once.
            let top = w.lambda_tilde[0];
            if !(top > 0.0) {
                break;
            }
            d_prev = d_prev.scaled(top * (1.0 - 1e-9))?;
            w = whitened_evd(&d_prev, &basis);
            if w.t_active == 0 {
                break;
            }
        }
        let t = w.t_active;
        let ut = w.u1_m.leading_columns(t);
        let prev_inv_sqrt = d_prev.inv_sqrt_entries();
        let inv_gains: Vec<f64> = w.lambda_tilde[..t].iter().map(|l| 1.0 / l).collect();
        let frozen = HermitianMatrix::from_scaled_basis(&ut, &inv_gains)
            .conjugate_by_diag(&prev_inv_sqrt);
        let proj = HermitianMatrix::from_scaled_basis(&ut, &vec![1.0; t]);

        let (d_new, degenerate) =
            grouped_dual(partition, &proj.diag_re(), &frozen.diag_re(), Some(&d_prev));

        let mut q = proj
            .conjugate_by_diag(&d_new.inv_sqrt_entries())
            .sub(&frozen);
        if !degenerate.is_empty() {
            let idx: Vec<usize> = degenerate
                .iter()
                .flat_map(|&k| partition.groups()[k].iter().copied())
                .collect();
            q = q.zero_rows_cols(&idx);
        }
        let q = repair_feasibility(&q, partition);
        let cap = capacity(&q, model)?;
        trace.push(cap);
        iterations = it;
        if cap > best_cap {
            best_cap = cap;
            best_q = q;
            best_d = d_new.clone();
        }
        let gain = (cap - cap_prev) / cap_prev.abs().max(1e-12);
        cap_prev = cap;
        d_prev = d_new;
        if gain < opts.tol {
            break;
        }
    }

    let kkt = kkt_residuals(&best_q, &best_d, model, partition)?;
    let slack = power_slack(&best_q, partition);
    Ok(SolveReport {
        q: best_q,
        dual: Some(best_d),
        capacity_nats: best_cap,
        iterations,
        capacity_trace: trace,
        kkt,
        group_power_slack: slack,
    })
}

/// Checks the trace identity behind the multiplier construction: with
/// `M = I - D^{1/2} (S + alpha I)^{-1} D^{1/2}` and `Phi` the negative-part
/// completion of `M`, the product `(M + Phi) Phi` has zero trace. Evaluated
/// in the eigenbasis of `M`, where the identity holds per eigenvalue.
pub fn slack_orthogonality_residual(
    dual: &DualDiagonal,
    model: &SystemModel,
    alpha: f64,
) -> Result<f64> {
    assert!(alpha > 0.0, "regularization must be positive");
    let s = model.gram_matrix()?;
    let n = s.dim();
    if dual.len() != n {
        return Err(Error::DimensionMismatch {
            context: format!("dual has {} entries, expected {n}", dual.len()),
        });
    }
    let mut reg = s.as_matrix().clone();
    for i in 0..n {
        let v = reg.get(i, i) + Complex64::new(alpha, 0.0);
        reg.set(i, i, v);
    }
    let inv = reg.inverse()?;
    let sq = dual.sqrt_entries();
    let sandwich = HermitianMatrix::symmetrized(inv)?.conjugate_by_diag(&sq);
    let m = HermitianMatrix::identity(n).sub(&sandwich);
    let values = m.evd().values;
    let completion = neg_part(&values);
    let residual: f64 = values
        .iter()
        .zip(&completion)
        .map(|(&l, &z)| (l + z) * z)
        .sum();
    Ok(residual.abs())
}

/// Checks that the whitened water-bottom term, pulled back to the channel
/// eigenbasis, equals the inverse gains no matter what the dual weights are:
/// `U1^H D^{-1/2} U_M L^{-1} U_M^H D^{-1/2} U1 = diag(lambda)^{-1}`.
pub fn water_bottom_residual(dual: &DualDiagonal, basis: &EffectiveBasis) -> f64 {
    let w = whitened_evd(dual, basis);
    let inv_gains: Vec<f64> = w.lambda_tilde.iter().map(|l| 1.0 / l).collect();
    let bottom = HermitianMatrix::from_scaled_basis(&w.u1_m, &inv_gains)
        .conjugate_by_diag(&dual.inv_sqrt_entries());
    let pulled = basis
        .basis()
        .adjoint()
        .mul(bottom.as_matrix())
        .mul(basis.basis());
    let expect_inv: Vec<f64> = basis.gains().iter().map(|l| 1.0 / l).collect();
    pulled
        .sub(&ComplexMatrix::from_real_diag(&expect_inv))
        .fro_norm()
}

fn power_slack(q: &HermitianMatrix, partition: &PowerPartition) -> Vec<f64> {
    partition
        .group_powers(q)
        .iter()
        .zip(partition.budgets())
        .map(|(&g, &p)| p - g)
        .collect()
}

fn check_dims(model: &SystemModel, partition: &PowerPartition) -> Result<()> {
    if model.n_tx() != partition.n_antennas() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "channel has {} transmit antennas but the partition covers {}",
                model.n_tx(),
                partition.n_antennas()
            ),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::complex;

    fn white_model_from_diag(gains: &[f64]) -> SystemModel {
        // channel diag(sqrt(g)) with unit noise gives Gram diag(g)
        let h = ComplexMatrix::from_real_diag(
            &gains.iter().map(|g| g.sqrt()).collect::<Vec<_>>(),
        );
        SystemModel::with_white_noise(h, 1.0).unwrap()
    }

    fn basis_of(model: &SystemModel) -> EffectiveBasis {
        EffectiveBasis::from_gram(&model.gram_matrix().unwrap(), tol::RANK_TOL).unwrap()
    }

    #[test]
    fn whitened_evd_identity_dual_is_plain_evd() {
        let model = white_model_from_diag(&[4.0, 1.0]);
        let basis = basis_of(&model);
        let d = DualDiagonal::uniform(2, 1.0).unwrap();
        let w = whitened_evd(&d, &basis);
        assert!((w.gains()[0] - 4.0).abs() < 1e-12);
        assert!((w.gains()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn whitened_evd_uniform_scaling() {
        let model = white_model_from_diag(&[4.0, 1.0]);
        let basis = basis_of(&model);
        let d = DualDiagonal::uniform(2, 4.0).unwrap();
        let w = whitened_evd(&d, &basis);
        assert!((w.gains()[0] - 1.0).abs() < 1e-12);
        assert!((w.gains()[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn whitened_evd_rank_one() {
        // S = diag(4, 0), D = diag(1, 9): whitened matrix diag(4, 0), K = 1
        let h = ComplexMatrix::from_real_diag(&[2.0, 0.0]);
        // zero channel column is fine as long as H is nonzero
        let model = SystemModel::with_white_noise(h, 1.0).unwrap();
        let basis = basis_of(&model);
        assert_eq!(basis.rank(), 1);
        let d = DualDiagonal::from_entries(vec![1.0, 9.0]).unwrap();
        let w = whitened_evd(&d, &basis);
        assert_eq!(w.gains().len(), 1);
        assert!((w.gains()[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn count_active_boundary() {
        assert_eq!(count_active(&[2.0, 0.5]), 1);
        assert_eq!(count_active(&[3.0, 2.0, 1.5]), 3);
        assert_eq!(count_active(&[0.9]), 0);
        assert_eq!(count_active(&[1.0, 1.0]), 0);
    }

    #[test]
    fn covariance_from_dual_examples() {
        let model = white_model_from_diag(&[4.0, 1.0]);
        let basis = basis_of(&model);

        let d = DualDiagonal::uniform(2, 1.0).unwrap();
        let q = covariance_from_dual(&d, &basis);
        assert!((q.get(0, 0).re - 0.75).abs() < 1e-12);
        assert!(q.get(1, 1).re.abs() < 1e-12);

        let d = DualDiagonal::uniform(2, 2.0).unwrap();
        let q = covariance_from_dual(&d, &basis);
        assert!((q.get(0, 0).re - 0.25).abs() < 1e-12);
        assert!(q.get(1, 1).re.abs() < 1e-12);

        // all whitened gains at or below one: zero covariance
        let d = DualDiagonal::uniform(2, 8.0).unwrap();
        let q = covariance_from_dual(&d, &basis);
        assert!(q.fro_norm() < 1e-12);
    }

    #[test]
    fn update_dual_uniform_identity_gram() {
        // S = I_N, single group with budget P, all modes treated active:
        // d = N / (P + N) uniformly.
        let n = 4;
        let p = 2.5;
        let partition = PowerPartition::single_group(n, p).unwrap();
        let prev = DualDiagonal::uniform(n, 1.0).unwrap();
        let w = WhitenedEvd::from_parts(ComplexMatrix::identity(n), vec![1.0; n], n);
        let d = update_dual(&prev, &w, &partition).unwrap();
        for &v in d.entries() {
            assert!((v - n as f64 / (p + n as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn update_dual_degenerate_group() {
        // S = diag(4, 1), per-antenna groups, previous dual = I: only the
        // first mode is active, so the second group sees no projector mass.
        let model = white_model_from_diag(&[4.0, 1.0]);
        let basis = basis_of(&model);
        let p1 = 0.75;
        let partition = PowerPartition::per_antenna(vec![p1, 1.0]).unwrap();
        let prev = DualDiagonal::uniform(2, 1.0).unwrap();
        let w = whitened_evd(&prev, &basis);
        assert_eq!(w.active_modes(), 1);
        let err = update_dual(&prev, &w, &partition);
        assert!(matches!(err, Err(Error::DegenerateGroup { group: 1 })));

        // the masked path used by the solver keeps the previous weight
        let (proj, frozen) = active_term_diagonals(&prev, &w);
        let (d, degenerate) = grouped_dual(&partition, &proj, &frozen, Some(&prev));
        assert_eq!(degenerate, vec![1]);
        assert!((d.entries()[0] - 1.0 / (p1 + 0.25)).abs() < 1e-14);
        assert!((d.entries()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn update_dual_constant_within_groups() {
        let model = white_model_from_diag(&[5.0, 3.0, 2.0]);
        let basis = basis_of(&model);
        let partition =
            PowerPartition::new(3, vec![vec![0, 2], vec![1]], vec![1.0, 2.0]).unwrap();
        let prev = DualDiagonal::uniform(3, 0.5).unwrap();
        let w = whitened_evd(&prev, &basis);
        let d = update_dual(&prev, &w, &partition).unwrap();
        assert_eq!(d.entries()[0], d.entries()[2]);
    }

    #[test]
    fn repair_examples() {
        let single = PowerPartition::single_group(2, 1.0).unwrap();
        let q = HermitianMatrix::from_real_diag(&[2.0, -1.0]);
        let r = repair_feasibility(&q, &single);
        assert!((r.get(0, 0).re - 1.0).abs() < 1e-14);
        assert!(r.get(1, 1).re.abs() < 1e-14);

        // already feasible with exact powers: unchanged
        let p = PowerPartition::per_antenna(vec![1.0, 2.0]).unwrap();
        let q = HermitianMatrix::from_real_diag(&[1.0, 2.0]);
        let r = repair_feasibility(&q, &p);
        assert!(r.sub(&q).fro_norm() < 1e-12);

        // zero stays zero
        let z = HermitianMatrix::zeros(2);
        let r = repair_feasibility(&z, &single);
        assert!(r.fro_norm() == 0.0);
    }

    #[test]
    fn capacity_examples() {
        let model = white_model_from_diag(&[1.0, 4.0]);
        assert!(capacity(&HermitianMatrix::zeros(2), &model).unwrap().abs() < 1e-14);

        let h = ComplexMatrix::identity(1);
        let scalar = SystemModel::with_white_noise(h, 1.0).unwrap();
        let q = HermitianMatrix::from_real_diag(&[3.0]);
        assert!((capacity(&q, &scalar).unwrap() - 4.0f64.ln()).abs() < 1e-12);

        let h = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let model = SystemModel::with_white_noise(h, 1.0).unwrap();
        let q = HermitianMatrix::from_real_diag(&[0.125, 0.875]);
        assert!((capacity(&q, &model).unwrap() - 5.0625f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mmse_examples() {
        let model = white_model_from_diag(&[1.0, 1.0]);
        let zero = HermitianMatrix::zeros(2);
        assert!(mmse_receiver(&zero, &model).unwrap().fro_norm() < 1e-14);

        let q = HermitianMatrix::identity(2);
        let g = mmse_receiver(&q, &model).unwrap();
        assert!((g.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!(g.get(0, 1).norm() < 1e-12);

        // scalar h, q, sigma^2: q h / (|h|^2 q + sigma^2)
        let h = ComplexMatrix::new(1, 1, vec![complex(0.6, 0.8)]).unwrap();
        let model = SystemModel::with_white_noise(h, 2.0).unwrap();
        let q = HermitianMatrix::from_real_diag(&[3.0]);
        let g = mmse_receiver(&q, &model).unwrap();
        let expect = complex(0.6, -0.8) * 3.0 / (1.0 * 3.0 + 2.0);
        assert!((g.get(0, 0) - expect).norm() < 1e-12);
    }

    #[test]
    fn kkt_optimal_diagonal() {
        let model = white_model_from_diag(&[1.0, 1.0]);
        let partition = PowerPartition::per_antenna(vec![1.0, 2.0]).unwrap();
        let q = HermitianMatrix::from_real_diag(&[1.0, 2.0]);
        let d = DualDiagonal::from_entries(vec![0.5, 1.0 / 3.0]).unwrap();
        let kkt = kkt_residuals(&q, &d, &model, &partition).unwrap();
        assert!(kkt.max_residual() < 1e-10, "{kkt:?}");
    }

    #[test]
    fn kkt_flags_zero_covariance() {
        let model = white_model_from_diag(&[1.0, 1.0]);
        let partition = PowerPartition::per_antenna(vec![1.0, 2.0]).unwrap();
        let q = HermitianMatrix::zeros(2);
        let d = DualDiagonal::uniform(2, 1.0).unwrap();
        let kkt = kkt_residuals(&q, &d, &model, &partition).unwrap();
        assert!((kkt.complementarity_power[0] - 1.0).abs() < 1e-12);
        assert!((kkt.complementarity_power[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kkt_flags_budget_overshoot() {
        let model = white_model_from_diag(&[1.0, 1.0]);
        let partition = PowerPartition::per_antenna(vec![1.0, 2.0]).unwrap();
        let q = HermitianMatrix::from_real_diag(&[2.0, 2.0]);
        let d = DualDiagonal::uniform(2, 1.0).unwrap();
        let kkt = kkt_residuals(&q, &d, &model, &partition).unwrap();
        assert!(kkt.feasibility > 0.9);
    }

    #[test]
    fn waterfilling_examples() {
        let q = classical_waterfilling(&[1.0, 4.0], 1.0);
        assert!((q[0] - 0.125).abs() < 1e-12);
        assert!((q[1] - 0.875).abs() < 1e-12);

        assert_eq!(classical_waterfilling(&[2.0], 5.0), vec![5.0]);
        assert_eq!(classical_waterfilling(&[1.0, 2.0], 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn full_rank_examples() {
        let model = white_model_from_diag(&[1.0, 1.0]);
        let partition = PowerPartition::per_antenna(vec![1.0, 2.0]).unwrap();
        let r = solve_full_rank(&model, &partition).unwrap();
        assert!((r.q.get(0, 0).re - 1.0).abs() < 1e-12);
        assert!((r.q.get(1, 1).re - 2.0).abs() < 1e-12);
        let d = r.dual.unwrap();
        assert!((d.entries()[0] - 0.5).abs() < 1e-12);
        assert!((d.entries()[1] - 1.0 / 3.0).abs() < 1e-12);

        let single = PowerPartition::single_group(2, 3.0).unwrap();
        let r = solve_full_rank(&model, &single).unwrap();
        assert!((r.q.get(0, 0).re - 1.5).abs() < 1e-12);
        assert!((r.q.get(1, 1).re - 1.5).abs() < 1e-12);

        let deficient = white_model_from_diag(&[4.0, 0.0]);
        let err = solve_full_rank(&deficient, &single);
        assert!(matches!(err, Err(Error::NotFullRank { rank: 1, dim: 2 })));
    }

    #[test]
    fn full_rank_rejects_low_snr_regime() {
        // strong gain imbalance at low power pushes the closed form outside
        // the PSD cone
        let model = white_model_from_diag(&[100.0, 0.1]);
        let partition = PowerPartition::single_group(2, 0.01).unwrap();
        assert!(matches!(
            solve_full_rank(&model, &partition),
            Err(Error::NotPsdRegime { .. })
        ));
    }

    #[test]
    fn noniterative_examples() {
        // S = I_N, single group: Q = (P/N) I
        let n = 3;
        let model = white_model_from_diag(&[1.0, 1.0, 1.0]);
        let partition = PowerPartition::single_group(n, 2.0).unwrap();
        let r = solve_noniterative(&model, &partition).unwrap();
        for i in 0..n {
            assert!((r.q.get(i, i).re - 2.0 / 3.0).abs() < 1e-12);
        }
        let d = r.dual.unwrap();
        for &v in d.entries() {
            assert!((v - 3.0 / 5.0).abs() < 1e-12);
        }

        // H = diag(1, 2), single group P = 1: classical water level 1.125
        let h = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let model = SystemModel::with_white_noise(h, 1.0).unwrap();
        let partition = PowerPartition::single_group(2, 1.0).unwrap();
        let r = solve_noniterative(&model, &partition).unwrap();
        assert!((r.q.get(0, 0).re - 0.125).abs() < 1e-10);
        assert!((r.q.get(1, 1).re - 0.875).abs() < 1e-10);
    }

    #[test]
    fn noniterative_single_group_matches_classical_wf() {
        // inactive modes present: capacities still match exactly
        let model = white_model_from_diag(&[4.0, 1.0, 0.5]);
        let partition = PowerPartition::single_group(3, 1.0).unwrap();
        let r = solve_noniterative(&model, &partition).unwrap();
        let basis = basis_of(&model);
        let q_wf = classical_waterfilling(basis.gains(), 1.0);
        let cap_wf: f64 = basis
            .gains()
            .iter()
            .zip(&q_wf)
            .map(|(&g, &q)| (1.0 + g * q).ln())
            .sum();
        assert!((r.capacity_nats - cap_wf).abs() < 1e-9);
    }

    #[test]
    fn iterative_matches_full_rank_on_diagonal_channel() {
        let model = white_model_from_diag(&[2.0, 3.0]);
        let partition = PowerPartition::per_antenna(vec![1.0, 2.0]).unwrap();
        let fr = solve_full_rank(&model, &partition).unwrap();
        let it = solve_iterative(&model, &partition, &IterativeOptions::default()).unwrap();
        assert!((fr.capacity_nats - it.capacity_nats).abs() < 1e-8);
    }

    #[test]
    fn iterative_single_group_matches_classical_wf() {
        let model = white_model_from_diag(&[4.0, 1.0, 0.5]);
        let partition = PowerPartition::single_group(3, 1.0).unwrap();
        let it = solve_iterative(&model, &partition, &IterativeOptions::default()).unwrap();
        let basis = basis_of(&model);
        let q_wf = classical_waterfilling(basis.gains(), 1.0);
        let cap_wf: f64 = basis
            .gains()
            .iter()
            .zip(&q_wf)
            .map(|(&g, &q)| (1.0 + g * q).ln())
            .sum();
        assert!((it.capacity_nats - cap_wf).abs() < 1e-6);
    }

    #[test]
    fn iterative_identity_init_on_identity_gram() {
        // razor-edge start: whitened gains all exactly 1; the relaxation
        // guard must recover and land on the uniform optimum
        let n = 3;
        let model = white_model_from_diag(&[1.0; 3]);
        let partition = PowerPartition::single_group(n, 2.0).unwrap();
        let opts = IterativeOptions {
            init: DualInit::Identity,
            ..Default::default()
        };
        let r = solve_iterative(&model, &partition, &opts).unwrap();
        for i in 0..n {
            assert!((r.q.get(i, i).re - 2.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn slack_orthogonality_cases() {
        let model = white_model_from_diag(&[2.0, 0.5]);
        let d = DualDiagonal::from_entries(vec![0.7, 1.3]).unwrap();
        assert!(slack_orthogonality_residual(&d, &model, 1e-3).unwrap() <= 1e-10);
        // PSD M (small dual): completion vanishes
        let d = DualDiagonal::from_entries(vec![1e-6, 1e-6]).unwrap();
        assert!(slack_orthogonality_residual(&d, &model, 1.0).unwrap() <= 1e-10);
        // negative definite M (large dual)
        let d = DualDiagonal::from_entries(vec![1e6, 1e6]).unwrap();
        assert!(slack_orthogonality_residual(&d, &model, 1e-3).unwrap() <= 1e-10);
    }

    #[test]
    fn water_bottom_cases() {
        let model = white_model_from_diag(&[3.0, 1.5]);
        let basis = basis_of(&model);
        let d = DualDiagonal::uniform(2, 1.0).unwrap();
        assert!(water_bottom_residual(&d, &basis) < 1e-12);
        let d = DualDiagonal::from_entries(vec![0.3, 2.5]).unwrap();
        assert!(water_bottom_residual(&d, &basis) < 1e-10);

        // rank-deficient: K < N
        let h = ComplexMatrix::new(
            1,
            2,
            vec![complex(1.0, 0.0), complex(0.5, -0.5)],
        )
        .unwrap();
        let model = SystemModel::with_white_noise(h, 1.0).unwrap();
        let basis = basis_of(&model);
        assert_eq!(basis.rank(), 1);
        let d = DualDiagonal::from_entries(vec![0.8, 1.7]).unwrap();
        assert!(water_bottom_residual(&d, &basis) < 1e-10);
    }
}
