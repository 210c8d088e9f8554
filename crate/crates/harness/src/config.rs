//! JSON-facing configuration and problem types.
//!
//! Conventions: complex matrices are nested arrays of `[re, im]` pairs in
//! row-major order; antenna groups are 1-based index arrays.

use mwf_core::{ComplexMatrix, HermitianMatrix, PowerPartition, SolveReport, SystemModel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// One solver route by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    FullRank,
    Iterative,
    Noniterative,
    ClassicalWf,
    Oracle,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::FullRank => "full_rank",
            SolverKind::Iterative => "iterative",
            SolverKind::Noniterative => "noniterative",
            SolverKind::ClassicalWf => "classical_wf",
            SolverKind::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full_rank" => Ok(SolverKind::FullRank),
            "iterative" => Ok(SolverKind::Iterative),
            "noniterative" => Ok(SolverKind::Noniterative),
            "classical_wf" => Ok(SolverKind::ClassicalWf),
            "oracle" => Ok(SolverKind::Oracle),
            other => Err(HarnessError::Config(format!(
                "unknown solver '{other}' (expected full_rank, iterative, noniterative, classical_wf, oracle)"
            ))),
        }
    }
}

/// Monte Carlo experiment description. The defaults sweep a 4x8 link under
/// per-antenna budgets with an 8:7:...:1 power split.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    /// 1-based antenna groups; default: one singleton group per antenna.
    #[serde(default)]
    pub groups: Option<Vec<Vec<usize>>>,
    /// Per-group shares of the total power; default `N : N-1 : ... : 1`.
    #[serde(default)]
    pub power_ratios: Option<Vec<f64>>,
    /// Explicit budgets; override `power_ratios`/`total_power` when given.
    #[serde(default)]
    pub budgets: Option<Vec<f64>>,
    /// Total transmit power; defaults to `n`.
    #[serde(default)]
    pub total_power: Option<f64>,
    #[serde(default = "default_snr")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_m() -> usize {
    4
}
fn default_n() -> usize {
    8
}
fn default_snr() -> Vec<f64> {
    vec![0.0, 5.0, 10.0, 15.0, 20.0]
}
fn default_trials() -> usize {
    50
}
fn default_seed() -> u64 {
    7
}
fn default_solvers() -> Vec<SolverKind> {
    vec![
        SolverKind::Iterative,
        SolverKind::Noniterative,
        SolverKind::Oracle,
    ]
}
fn default_max_iter() -> usize {
    100
}
fn default_tol() -> f64 {
    1e-8
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(HarnessError::Config("snr_db must be non-empty".into()));
        }
        if self.solvers.is_empty() {
            return Err(HarnessError::Config("solvers must be non-empty".into()));
        }
        self.partition().map(|_| ())
    }

    /// Resolve groups/ratios/budgets into a validated partition.
    pub fn partition(&self) -> Result<PowerPartition> {
        let groups_1b: Vec<Vec<usize>> = match &self.groups {
            Some(g) => g.clone(),
            None => (1..=self.n).map(|j| vec![j]).collect(),
        };
        let budgets = match (&self.budgets, &self.power_ratios) {
            (Some(b), _) => b.clone(),
            (None, Some(r)) => {
                let total = self.total_power.unwrap_or(self.n as f64);
                budgets_from_ratios(r, total)?
            }
            (None, None) => {
                if self.groups.is_some() && groups_1b.len() != self.n {
                    return Err(HarnessError::Config(
                        "custom groups need power_ratios or budgets".into(),
                    ));
                }
                let k = groups_1b.len();
                let ratios: Vec<f64> = (0..k).map(|i| (k - i) as f64).collect();
                let total = self.total_power.unwrap_or(self.n as f64);
                budgets_from_ratios(&ratios, total)?
            }
        };
        Ok(PowerPartition::from_one_based(self.n, groups_1b, budgets)?)
    }

    pub fn total_power(&self) -> Result<f64> {
        Ok(self.partition()?.total_power())
    }
}

/// Split a total power along positive ratios: `p_k = total * r_k / sum(r)`.
pub fn budgets_from_ratios(ratios: &[f64], total_power: f64) -> Result<Vec<f64>> {
    if ratios.is_empty() {
        return Err(HarnessError::Config("power_ratios must be non-empty".into()));
    }
    if ratios.iter().any(|&r| !(r > 0.0)) {
        return Err(HarnessError::Config("power_ratios must be positive".into()));
    }
    let sum: f64 = ratios.iter().sum();
    Ok(ratios.iter().map(|r| total_power * r / sum).collect())
}

/// Noise description for a single problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    White { sigma2: f64 },
    Full { matrix: Vec<Vec<[f64; 2]>> },
}

/// One concrete problem: channel, noise, groups and budgets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// M rows of N `[re, im]` pairs.
    pub h: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    /// 1-based antenna groups.
    pub groups: Vec<Vec<usize>>,
    pub budgets: Vec<f64>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn model(&self) -> Result<SystemModel> {
        let h = matrix_from_json(&self.h)?;
        let m = h.rows();
        let model = match &self.noise {
            None => SystemModel::with_white_noise(h, 1.0)?,
            Some(NoiseSpec::White { sigma2 }) => SystemModel::with_white_noise(h, *sigma2)?,
            Some(NoiseSpec::Full { matrix }) => {
                let r = matrix_from_json(matrix)?;
                if r.rows() != m {
                    return Err(HarnessError::Config(format!(
                        "noise matrix is {}x{} but the channel has {m} rows",
                        r.rows(),
                        r.cols()
                    )));
                }
                SystemModel::new(h, HermitianMatrix::new(r)?)?
            }
        };
        Ok(model)
    }

    pub fn partition(&self) -> Result<PowerPartition> {
        let n = self.h.first().map(|row| row.len()).unwrap_or(0);
        Ok(PowerPartition::from_one_based(
            n,
            self.groups.clone(),
            self.budgets.clone(),
        )?)
    }
}

pub fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let m = rows.len();
    if m == 0 {
        return Err(HarnessError::Config("matrix has no rows".into()));
    }
    let n = rows[0].len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(HarnessError::Config(
            "matrix rows must be non-empty and equally long".into(),
        ));
    }
    let mut data = Vec::with_capacity(m * n);
    for row in rows {
        for &[re, im] in row {
            data.push(Complex64::new(re, im));
        }
    }
    Ok(ComplexMatrix::new(m, n, data)?)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let z = m.get(i, j);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

/// JSON rendering of a solve report (written by `mwf solve --out`).
#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub capacity_nats: f64,
    pub capacity_bits: f64,
    pub iterations: usize,
    pub q: Vec<Vec<[f64; 2]>>,
    pub group_powers: Vec<f64>,
    pub budgets: Vec<f64>,
    pub dual: Option<Vec<f64>>,
    pub kkt: KktJson,
    pub capacity_trace: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct KktJson {
    pub stationarity: f64,
    pub complementarity_q: f64,
    pub complementarity_power: Vec<f64>,
    pub feasibility: f64,
    pub psd_violation: f64,
}

impl ReportJson {
    pub fn new(report: &SolveReport, partition: &PowerPartition) -> Self {
        Self {
            capacity_nats: report.capacity_nats,
            capacity_bits: report.capacity_bits(),
            iterations: report.iterations,
            q: matrix_to_json(report.q.as_matrix()),
            group_powers: partition.group_powers(&report.q),
            budgets: partition.budgets().to_vec(),
            dual: report.dual.as_ref().map(|d| d.entries().to_vec()),
            kkt: KktJson {
                stationarity: report.kkt.stationarity,
                complementarity_q: report.kkt.complementarity_q,
                complementarity_power: report.kkt.complementarity_power.clone(),
                feasibility: report.kkt.feasibility,
                psd_violation: report.kkt.psd_violation,
            },
            capacity_trace: report.capacity_trace.clone(),
        }
    }
}
