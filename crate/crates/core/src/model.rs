//! Physical setup: channel, noise covariance, antenna-group power partition,
//! and the derived quantities every solver consumes (noise-whitened Gram
//! matrix, its truncated eigenbasis, the diagonal dual weights).
//!
//! Antenna indices are 0-based throughout this crate; the 1-based convention
//! used in configuration files is translated at the serialization boundary.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::matrix::ComplexMatrix;
use crate::tol;

/// Point-to-point link: `y = H x + n` with `H` of size `M x N` and noise
/// covariance `R_n` of size `M x M` (positive definite).
#[derive(Debug, Clone)]
pub struct SystemModel {
    h: ComplexMatrix,
    r_n: HermitianMatrix,
}

impl SystemModel {
    pub fn new(h: ComplexMatrix, r_n: HermitianMatrix) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::NonFinite);
        }
        if r_n.dim() != h.rows() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "noise covariance is {}x{} but the channel has {} rows",
                    r_n.dim(),
                    r_n.dim(),
                    h.rows()
                ),
            });
        }
        if h.max_abs() == 0.0 {
            return Err(Error::ZeroChannel);
        }
        // noise must be strictly positive definite
        let e = r_n.evd();
        let lambda_max = e.values.first().copied().unwrap_or(0.0);
        let lambda_min = e.values.last().copied().unwrap_or(0.0);
        if lambda_max <= 0.0 || lambda_min <= tol::PSD_CLAMP_REL * lambda_max {
            return Err(Error::SingularNoise);
        }
        Ok(Self { h, r_n })
    }

    /// Channel with white noise of the given variance.
    pub fn with_white_noise(h: ComplexMatrix, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::SingularNoise);
        }
        let m = h.rows();
        Ok(Self::new(
            h,
            HermitianMatrix::from_real_diag(&vec![sigma2; m]),
        )?)
    }

    pub fn channel(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn noise(&self) -> &HermitianMatrix {
        &self.r_n
    }

    /// Number of transmit antennas (columns of `H`).
    pub fn n_tx(&self) -> usize {
        self.h.cols()
    }

    /// Number of receive antennas (rows of `H`).
    pub fn m_rx(&self) -> usize {
        self.h.rows()
    }

    /// Noise-whitened Gram matrix `H^H R_n^{-1} H` (N x N, PSD).
    pub fn gram_matrix(&self) -> Result<HermitianMatrix> {
        let e = self.r_n.evd();
        let lambda_max = e.values.first().copied().unwrap_or(0.0);
        let lambda_min = e.values.last().copied().unwrap_or(0.0);
        if lambda_max <= 0.0 || lambda_min <= tol::PSD_CLAMP_REL * lambda_max {
            return Err(Error::SingularNoise);
        }
        let inv: Vec<f64> = e.values.iter().map(|v| 1.0 / v).collect();
        let r_inv = HermitianMatrix::from_scaled_basis(&e.vectors, &inv);
        let s = self.h.adjoint().mul(r_inv.as_matrix()).mul(&self.h);
        HermitianMatrix::symmetrized(s)
    }

    /// `R_n^{-1/2}`, used for the symmetrized capacity form.
    pub fn noise_inv_sqrt(&self) -> Result<HermitianMatrix> {
        self.r_n.inv_sqrt().map_err(|_| Error::SingularNoise)
    }
}

/// Partition of the transmit antennas into disjoint groups, each with a
/// positive sum-power budget. One group covering everything is the classic
/// total-power constraint; singleton groups are per-antenna constraints.
#[derive(Debug, Clone)]
pub struct PowerPartition {
    n: usize,
    groups: Vec<Vec<usize>>,
    budgets: Vec<f64>,
}

impl PowerPartition {
    /// Validate and build. `groups` holds 0-based antenna indices; they must
    /// be pairwise disjoint, non-empty, and cover `0..n`.
    pub fn new(n: usize, groups: Vec<Vec<usize>>, budgets: Vec<f64>) -> Result<Self> {
        if budgets.len() != groups.len() {
            return Err(Error::BudgetCountMismatch {
                expected: groups.len(),
                got: budgets.len(),
            });
        }
        let mut owner = vec![usize::MAX; n];
        for (k, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::EmptyGroup { group: k });
            }
            for &j in group {
                if j >= n {
                    return Err(Error::AntennaOutOfRange { antenna: j, n });
                }
                if owner[j] != usize::MAX {
                    return Err(Error::OverlappingGroups { antenna: j });
                }
                owner[j] = k;
            }
        }
        if let Some(j) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::IncompleteCover { antenna: j });
        }
        for (k, &p) in budgets.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::NonPositiveBudget { group: k, budget: p });
            }
        }
        let groups = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        Ok(Self { n, groups, budgets })
    }

    /// As [`PowerPartition::new`] but with 1-based antenna indices, the
    /// convention used in configuration files.
    pub fn from_one_based(n: usize, groups: Vec<Vec<usize>>, budgets: Vec<f64>) -> Result<Self> {
        let zero_based = groups
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .map(|j| {
                        if j == 0 {
                            // 0 cannot be a 1-based index
                            Err(Error::AntennaOutOfRange { antenna: 0, n })
                        } else {
                            Ok(j - 1)
                        }
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, zero_based, budgets)
    }

    /// Singleton groups: antenna `j` gets budget `budgets[j]`.
    pub fn per_antenna(budgets: Vec<f64>) -> Result<Self> {
        let n = budgets.len();
        let groups = (0..n).map(|j| vec![j]).collect();
        Self::new(n, groups, budgets)
    }

    /// One group over all antennas with a total-power budget.
    pub fn single_group(n: usize, total: f64) -> Result<Self> {
        Self::new(n, vec![(0..n).collect()], vec![total])
    }

    pub fn n_antennas(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn is_single_group(&self) -> bool {
        self.groups.len() == 1
    }

    pub fn total_power(&self) -> f64 {
        self.budgets.iter().sum()
    }

    /// Real diagonal mass of `q` summed per group.
    pub fn group_powers(&self, q: &HermitianMatrix) -> Vec<f64> {
        assert_eq!(q.dim(), self.n, "covariance dimension must match partition");
        self.groups
            .iter()
            .map(|g| g.iter().map(|&j| q.get(j, j).re).sum())
            .collect()
    }

    /// Largest relative budget overshoot, zero when feasible.
    pub fn max_relative_violation(&self, q: &HermitianMatrix) -> f64 {
        self.group_powers(q)
            .iter()
            .zip(&self.budgets)
            .map(|(&g, &p)| ((g - p) / p).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// The rank-`K` eigenbasis of the Gram matrix: `U1` (N x K, orthonormal
/// columns) and the positive, decreasing gains `lambda`.
#[derive(Debug, Clone)]
pub struct EffectiveBasis {
    k: usize,
    u1: ComplexMatrix,
    lambda: Vec<f64>,
}

impl EffectiveBasis {
    /// Keep the eigenvalues above `rank_tol * lambda_max`.
    pub fn from_gram(s: &HermitianMatrix, rank_tol: f64) -> Result<Self> {
        let e = s.evd();
        let lambda_max = e.values.first().copied().unwrap_or(0.0);
        if lambda_max <= 0.0 {
            return Err(Error::ZeroChannel);
        }
        let cut = rank_tol * lambda_max;
        let k = e.values.iter().take_while(|&&v| v > cut).count();
        if k == 0 {
            return Err(Error::ZeroChannel);
        }
        Ok(Self {
            k,
            u1: e.vectors.leading_columns(k),
            lambda: e.values[..k].to_vec(),
        })
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.u1
    }

    pub fn gains(&self) -> &[f64] {
        &self.lambda
    }

    /// `U1 diag(lambda) U1^H`: the Gram matrix restricted to its range.
    pub fn effective_gram(&self) -> HermitianMatrix {
        HermitianMatrix::from_scaled_basis(&self.u1, &self.lambda)
    }

    /// `U1 U1^H`: orthogonal projector onto the signal subspace.
    pub fn projector(&self) -> HermitianMatrix {
        HermitianMatrix::from_scaled_basis(&self.u1, &vec![1.0; self.k])
    }

    /// `U1 diag(lambda)^{-1} U1^H`: the water-bottom term.
    pub fn water_bottom(&self) -> HermitianMatrix {
        let inv: Vec<f64> = self.lambda.iter().map(|l| 1.0 / l).collect();
        HermitianMatrix::from_scaled_basis(&self.u1, &inv)
    }
}

/// Diagonal matrix of dual weights, constant within each antenna group and
/// strictly positive. Stored as the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDiagonal {
    d: Vec<f64>,
}

impl DualDiagonal {
    /// Expand one positive value per group onto the antenna diagonal.
    pub fn from_per_group(partition: &PowerPartition, per_group: &[f64]) -> Result<Self> {
        if per_group.len() != partition.n_groups() {
            return Err(Error::MultiplierCountMismatch {
                expected: partition.n_groups(),
                got: per_group.len(),
            });
        }
        for (k, &v) in per_group.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveMultiplier { group: k, value: v });
            }
        }
        let mut d = vec![0.0; partition.n_antennas()];
        for (k, group) in partition.groups().iter().enumerate() {
            for &j in group {
                d[j] = per_group[k];
            }
        }
        Ok(Self { d })
    }

    /// Arbitrary positive diagonal; this is the per-antenna (singleton group)
    /// form used by the identity checks.
    pub fn from_entries(d: Vec<f64>) -> Result<Self> {
        for (j, &v) in d.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveMultiplier { group: j, value: v });
            }
        }
        Ok(Self { d })
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::from_entries(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    /// Read back one value per group (the first antenna's entry).
    pub fn per_group(&self, partition: &PowerPartition) -> Vec<f64> {
        partition.groups().iter().map(|g| self.d[g[0]]).collect()
    }

    pub fn inv_sqrt_entries(&self) -> Vec<f64> {
        self.d.iter().map(|v| 1.0 / v.sqrt()).collect()
    }

    pub fn sqrt_entries(&self) -> Vec<f64> {
        self.d.iter().map(|v| v.sqrt()).collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_entries(self.d.iter().map(|v| v * factor).collect())
    }

    pub fn as_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.d)
    }
}

/// Convenience for tests and callers holding raw complex data.
pub fn complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
