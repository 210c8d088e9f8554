//! Independent reference solvers used only for verification.
//!
//! [`solve_barrier`] maximizes the capacity over the feasible set with a
//! log-barrier interior-point scheme, deliberately sharing no solution
//! machinery with the water-filling routes in [`crate::solvers`]: the
//! objective and feasibility checks run on their own LU/Cholesky kernels,
//! and the search ascends the barrier objective directly.
//!
//! [`grid_search_tiny`] is a brute-force grid for one or two antennas,
//! with the capacity evaluated from a hand-expanded 2x2 determinant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::matrix::ComplexMatrix;
use crate::model::{DualDiagonal, PowerPartition, SystemModel};
use crate::report::SolveReport;
use crate::solvers::{capacity, kkt_residuals};

/// Log-barrier controls. The defaults converge in well under a second for
/// the desk-scale problems this crate targets.
#[derive(Debug, Clone)]
pub struct BarrierOptions {
    /// Initial barrier weight.
    pub t0: f64,
    /// Multiplicative growth of the barrier weight per outer round.
    pub t_mult: f64,
    /// Inner stop: norm of the gradient of the weight-normalized objective.
    pub inner_tol: f64,
    /// Outer stop: (#constraints) / t below this.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Ridge inside `logdet(Q + ridge I)` admitting rank-deficient optima.
    pub ridge: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            t0: 1.0,
            t_mult: 8.0,
            inner_tol: 1e-9,
            outer_tol: 1e-7,
            max_outer: 20,
            max_inner: 500,
            ridge: 1e-12,
        }
    }
}

/// Maximize `logdet(I + S Q)` over PSD `Q` with grouped power budgets by a
/// log-barrier method. Inner centering ascends with Newton directions and a
/// backtracking (Armijo) line search that keeps every iterate strictly
/// feasible; it falls back to plain gradient steps if the Newton system is
/// ever indefinite.
///
/// The report's dual field is empty; the KKT block is computed with the
/// multipliers recovered from the barrier, `d_k = 1 / (t (p_k - g_k))`.
pub fn solve_barrier(
    model: &SystemModel,
    partition: &PowerPartition,
    opts: &BarrierOptions,
) -> Result<SolveReport> {
    let n = model.n_tx();
    if n != partition.n_antennas() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "channel has {} transmit antennas but the partition covers {}",
                n,
                partition.n_antennas()
            ),
        });
    }
    let s = model.gram_matrix()?;

    // strictly feasible diagonal start: half of each budget, split evenly
    let mut q0 = vec![0.0; n];
    for (k, group) in partition.groups().iter().enumerate() {
        let share = 0.5 * partition.budgets()[k] / group.len() as f64;
        for &j in group {
            q0[j] = share;
        }
    }
    let mut q = HermitianMatrix::from_real_diag(&q0);

    let theta = (n + partition.n_groups()) as f64;
    let mut t = opts.t0;
    let mut capacity_trace = Vec::new();
    let mut total_inner = 0usize;

    for outer in 0..opts.max_outer {
        match center(&mut q, &s, partition, t, opts) {
            Ok(steps) => total_inner += steps,
            Err(gradient_norm) => {
                let report = finish(q, model, partition, t, total_inner, capacity_trace)?;
                return Err(Error::NoProgress {
                    gradient_norm,
                    report: Box::new(report),
                });
            }
        }
        capacity_trace.push(capacity(&q, model)?);
        if theta / t < opts.outer_tol || outer + 1 == opts.max_outer {
            break;
        }
        t *= opts.t_mult;
    }

    finish(q, model, partition, t, total_inner, capacity_trace)
}

fn finish(
    q: HermitianMatrix,
    model: &SystemModel,
    partition: &PowerPartition,
    t: f64,
    iterations: usize,
    capacity_trace: Vec<f64>,
) -> Result<SolveReport> {
    let powers = partition.group_powers(&q);
    let per_group: Vec<f64> = partition
        .budgets()
        .iter()
        .zip(&powers)
        .map(|(&p, &g)| (1.0 / (t * (p - g))).max(f64::MIN_POSITIVE))
        .collect();
    let recovered = DualDiagonal::from_per_group(partition, &per_group)?;
    let kkt = kkt_residuals(&q, &recovered, model, partition)?;
    let cap = capacity(&q, model)?;
    let slack: Vec<f64> = partition
        .budgets()
        .iter()
        .zip(&powers)
        .map(|(&p, &g)| p - g)
        .collect();
    Ok(SolveReport {
        q,
        dual: None,
        capacity_nats: cap,
        iterations,
        capacity_trace,
        kkt,
        group_power_slack: slack,
    })
}

/// Inner centering at fixed barrier weight. Works on the normalized
/// objective `f(Q) = logdet(I+SQ) + [logdet(Q + ridge I) + sum_k log(p_k -
/// g_k)] / t`. Returns the number of accepted steps, or `Err(grad_norm)` if
/// the line search stalls with a large gradient.
fn center(
    q: &mut HermitianMatrix,
    s: &HermitianMatrix,
    partition: &PowerPartition,
    t: f64,
    opts: &BarrierOptions,
) -> std::result::Result<usize, f64> {
    let n = q.dim();
    let dim = n * n;
    let mut steps = 0usize;

    let mut f_cur = objective(q, s, partition, t, opts.ridge).expect("start must be feasible");

    for _ in 0..opts.max_inner {
        let grad = gradient(q, s, partition, t, opts.ridge);
        let gvec = herm_to_vec(&grad);
        let gnorm = norm(&gvec);
        if gnorm <= opts.inner_tol {
            return Ok(steps);
        }

        // Newton direction on the real coordinates of the Hermitian space;
        // the Hessian of -f is positive definite thanks to the ridge barrier.
        let hess = neg_hessian(q, s, partition, t, opts.ridge);
        let dir_vec = match cholesky_solve(&hess, dim, &gvec) {
            Some(d) => d,
            None => gvec.clone(),
        };
        let mut slope = dot(&gvec, &dir_vec);
        let dir = if slope > 0.0 {
            vec_to_herm(n, &dir_vec)
        } else {
            slope = gnorm * gnorm;
            grad.clone()
        };

        let mut step = 1.0;
        let mut accepted = false;
        for _bt in 0..70 {
            let candidate = q.add(&dir.scale_re(step));
            if let Some(f_new) = objective(&candidate, s, partition, t, opts.ridge) {
                if f_new >= f_cur + 1e-4 * step * slope {
                    *q = candidate;
                    f_cur = f_new;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // Flat to machine precision around the center: fine. A stall
            // with a genuinely large gradient is reported instead.
            if gnorm <= 1e6 * opts.inner_tol {
                return Ok(steps);
            }
            return Err(gnorm);
        }
        steps += 1;
    }
    Ok(steps)
}

/// Normalized barrier objective; `None` when infeasible.
fn objective(
    q: &HermitianMatrix,
    s: &HermitianMatrix,
    partition: &PowerPartition,
    t: f64,
    ridge: f64,
) -> Option<f64> {
    let mut barrier = cholesky_logdet(q, ridge)?;
    for (k, group) in partition.groups().iter().enumerate() {
        let g: f64 = group.iter().map(|&j| q.get(j, j).re).sum();
        let slack = partition.budgets()[k] - g;
        if slack <= 0.0 {
            return None;
        }
        barrier += slack.ln();
    }
    let m = ComplexMatrix::identity(q.dim()).add(&s.as_matrix().mul(q.as_matrix()));
    let cap = m.log_abs_det().ok()?;
    Some(cap + barrier / t)
}

/// Gradient of the normalized objective as a Hermitian matrix.
fn gradient(
    q: &HermitianMatrix,
    s: &HermitianMatrix,
    partition: &PowerPartition,
    t: f64,
    ridge: f64,
) -> HermitianMatrix {
    let n = q.dim();
    let m = ComplexMatrix::identity(n).add(&s.as_matrix().mul(q.as_matrix()));
    let a = m.solve(s.as_matrix()).expect("I + SQ is invertible");

    let mut qr = q.as_matrix().clone();
    for i in 0..n {
        let v = qr.get(i, i) + Complex64::new(ridge, 0.0);
        qr.set(i, i, v);
    }
    let c = qr.inverse().expect("Q + ridge I is invertible");

    let mut g = a.add(&c.scale_re(1.0 / t));
    let powers = partition.group_powers(q);
    for (k, group) in partition.groups().iter().enumerate() {
        let slack = partition.budgets()[k] - powers[k];
        for &j in group {
            let v = g.get(j, j) - Complex64::new(1.0 / (t * slack), 0.0);
            g.set(j, j, v);
        }
    }
    HermitianMatrix::symmetrized(g).expect("gradient is square and finite")
}

/// Positive-definite real matrix `-Hessian` of the normalized objective in
/// the orthonormal Hermitian coordinates.
fn neg_hessian(
    q: &HermitianMatrix,
    s: &HermitianMatrix,
    partition: &PowerPartition,
    t: f64,
    ridge: f64,
) -> Vec<f64> {
    let n = q.dim();
    let dim = n * n;
    let m = ComplexMatrix::identity(n).add(&s.as_matrix().mul(q.as_matrix()));
    let a = {
        let raw = m.solve(s.as_matrix()).expect("I + SQ is invertible");
        HermitianMatrix::symmetrized(raw).expect("square, finite")
    };
    let c = {
        let mut qr = q.as_matrix().clone();
        for i in 0..n {
            let v = qr.get(i, i) + Complex64::new(ridge, 0.0);
            qr.set(i, i, v);
        }
        HermitianMatrix::symmetrized(qr.inverse().expect("invertible")).expect("square, finite")
    };

    let mut h = vec![0.0; dim * dim];
    let inv_t = 1.0 / t;
    for bidx in 0..dim {
        // M_b = A E_b A + (1/t) C E_b C, assembled from column outer products
        let mb = basis_quad_form(&a, &c, inv_t, n, bidx);
        let col = herm_to_vec(&mb);
        for aidx in 0..dim {
            h[aidx * dim + bidx] = col[aidx];
        }
    }
    // power-constraint curvature: rank-one per group over the diagonal
    // coordinates (the first n basis elements)
    let powers = partition.group_powers(q);
    for (k, group) in partition.groups().iter().enumerate() {
        let slack = partition.budgets()[k] - powers[k];
        let w = inv_t / (slack * slack);
        for &i in group {
            for &j in group {
                h[i * dim + j] += w;
            }
        }
    }
    // enforce exact symmetry
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (h[i * dim + j] + h[j * dim + i]);
            h[i * dim + j] = avg;
            h[j * dim + i] = avg;
        }
    }
    h
}

/// `A E_b A + w C E_b C` for the `bidx`-th orthonormal Hermitian basis
/// element. With `E = e_i e_j^H` terms this reduces to outer products of the
/// i-th and j-th columns.
fn basis_quad_form(
    a: &HermitianMatrix,
    c: &HermitianMatrix,
    w: f64,
    n: usize,
    bidx: usize,
) -> HermitianMatrix {
    let (i, j, imag) = basis_index(n, bidx);
    let mut out = ComplexMatrix::zeros(n, n);
    let add_outer = |out: &mut ComplexMatrix, m: &HermitianMatrix, scale: Complex64| {
        // scale * m_col_i * m_col_j^H  (+ Hermitian pairing handled by caller)
        for r in 0..n {
            let mr = m.get(r, i) * scale;
            for cidx in 0..n {
                let v = out.get(r, cidx) + mr * m.get(j, cidx);
                out.set(r, cidx, v);
            }
        }
    };
    if i == j {
        add_outer(&mut out, a, Complex64::new(1.0, 0.0));
        add_outer(&mut out, c, Complex64::new(w, 0.0));
    } else {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let (si, sj) = if imag {
            (
                Complex64::new(0.0, inv_sqrt2),
                Complex64::new(0.0, -inv_sqrt2),
            )
        } else {
            (
                Complex64::new(inv_sqrt2, 0.0),
                Complex64::new(inv_sqrt2, 0.0),
            )
        };
        // E_b = si e_i e_j^H + sj e_j e_i^H
        for r in 0..n {
            let ari = a.get(r, i);
            let arj = a.get(r, j);
            let cri = c.get(r, i) * w;
            let crj = c.get(r, j) * w;
            for cc in 0..n {
                let v = out.get(r, cc)
                    + ari * si * a.get(j, cc)
                    + arj * sj * a.get(i, cc)
                    + cri * si * c.get(j, cc)
                    + crj * sj * c.get(i, cc);
                out.set(r, cc, v);
            }
        }
    }
    HermitianMatrix::symmetrized(out).expect("square, finite")
}

/// Orthonormal basis enumeration: diagonals first, then for each pair
/// (i < j) the symmetric and the imaginary element.
fn basis_index(n: usize, idx: usize) -> (usize, usize, bool) {
    if idx < n {
        return (idx, idx, false);
    }
    let mut rest = idx - n;
    for i in 0..n {
        for j in (i + 1)..n {
            if rest == 0 {
                return (i, j, false);
            }
            if rest == 1 {
                return (i, j, true);
            }
            rest -= 2;
        }
    }
    unreachable!("basis index out of range");
}

/// Real coordinates of a Hermitian matrix in the orthonormal basis.
fn herm_to_vec(m: &HermitianMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        v.push(m.get(i, i).re);
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = m.get(i, j);
            v.push(sqrt2 * z.re);
            v.push(sqrt2 * z.im);
        }
    }
    v
}

fn vec_to_herm(n: usize, v: &[f64]) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, Complex64::new(v[i], 0.0));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = Complex64::new(v[idx] * inv_sqrt2, v[idx + 1] * inv_sqrt2);
            idx += 2;
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    HermitianMatrix::symmetrized(m).expect("square, finite")
}

/// `logdet(Q + ridge I)` through a complex Cholesky factorization; `None`
/// when the shifted matrix is not positive definite (doubles as the
/// feasibility check for the PSD barrier).
fn cholesky_logdet(q: &HermitianMatrix, ridge: f64) -> Option<f64> {
    let n = q.dim();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    let mut logdet = 0.0;
    for j in 0..n {
        let mut diag = q.get(j, j).re + ridge;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        let root = diag.sqrt();
        l[j * n + j] = Complex64::new(root, 0.0);
        logdet += 2.0 * root.ln();
        for i in (j + 1)..n {
            let mut acc = q.get(i, j);
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = acc / root;
        }
    }
    Some(logdet)
}

/// Dense real Cholesky solve of `H x = b`; `None` if `H` is not positive
/// definite (a tiny ridge retry is attempted first).
fn cholesky_solve(h: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    for boost in [0.0, 1e-12, 1e-8] {
        if let Some(x) = try_cholesky_solve(h, n, b, boost) {
            return Some(x);
        }
    }
    None
}

fn try_cholesky_solve(h: &[f64], n: usize, b: &[f64], boost: f64) -> Option<Vec<f64>> {
    let scale = h
        .iter()
        .enumerate()
        .filter(|(i, _)| i % (n + 1) == 0)
        .map(|(_, &v)| v.abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = h[j * n + j] + boost * scale;
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        let root = diag.sqrt();
        l[j * n + j] = root;
        for i in (j + 1)..n {
            let mut acc = h[i * n + j];
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = acc / root;
        }
    }
    // forward then backward substitution
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let v = y[k];
            y[i] -= l[i * n + k] * v;
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let v = y[k];
            y[i] -= l[k * n + i] * v;
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Exhaustive grid search over the real parametrization of `Q` for links
/// with one or two transmit antennas. Runtime is O(resolution^4) for two
/// antennas; accuracy is bounded by the grid spacing (see
/// [`grid_resolution_bound`]).
pub fn grid_search_tiny(
    model: &SystemModel,
    partition: &PowerPartition,
    resolution: usize,
) -> Result<SolveReport> {
    let n = model.n_tx();
    if n > 2 {
        return Err(Error::TooLarge { n });
    }
    assert!(resolution >= 2, "resolution must be at least 2");
    let s = model.gram_matrix()?;

    let best_q = if n == 1 {
        let p = partition.budgets()[0];
        let s0 = s.get(0, 0).re;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=resolution {
            let qv = p * i as f64 / resolution as f64;
            let cap = (1.0 + s0 * qv).ln();
            if cap > best.0 {
                best = (cap, qv);
            }
        }
        HermitianMatrix::from_real_diag(&[best.1])
    } else {
        grid_two_antennas(&s, partition, resolution)
    };

    let cap = capacity(&best_q, model)?;
    let recovered = recover_dual(&best_q, &s, partition)?;
    let kkt = kkt_residuals(&best_q, &recovered, model, partition)?;
    let powers = partition.group_powers(&best_q);
    let slack = partition
        .budgets()
        .iter()
        .zip(&powers)
        .map(|(&p, &g)| p - g)
        .collect();
    Ok(SolveReport {
        q: best_q,
        dual: None,
        capacity_nats: cap,
        iterations: resolution,
        capacity_trace: vec![cap],
        kkt,
        group_power_slack: slack,
    })
}

fn grid_two_antennas(
    s: &HermitianMatrix,
    partition: &PowerPartition,
    resolution: usize,
) -> HermitianMatrix {
    let s1 = s.get(0, 0).re;
    let s2 = s.get(1, 1).re;
    let w = s.get(0, 1);
    let w_sq = w.norm_sqr();
    let delta = w_sq - s1 * s2; // coefficient of |z|^2; equals -det(S)

    // ranges for the two diagonal entries
    let (amax, bmax, coupled) = if partition.is_single_group() {
        let p = partition.budgets()[0];
        (p, p, Some(p))
    } else {
        // two groups; identify which covers which antenna
        let g0 = &partition.groups()[0];
        let (pa, pb) = if g0 == &[0] {
            (partition.budgets()[0], partition.budgets()[1])
        } else {
            (partition.budgets()[1], partition.budgets()[0])
        };
        (pa, pb, None)
    };

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0, 0.0);
    let res = resolution as f64;
    for ia in 0..=resolution {
        let a = amax * ia as f64 / res;
        for ib in 0..=resolution {
            let b = bmax * ib as f64 / res;
            if let Some(p) = coupled {
                if a + b > p {
                    break;
                }
            }
            let c1 = (1.0 + a * s1) * (1.0 + b * s2) - a * b * w_sq;
            let r = (a * b).sqrt();
            // det(I + QS) = c1 + 2(x Re w + y Im w) + (x^2 + y^2) delta
            for ix in 0..=resolution {
                let x = -r + 2.0 * r * ix as f64 / res;
                for iy in 0..=resolution {
                    let y = -r + 2.0 * r * iy as f64 / res;
                    if x * x + y * y > a * b {
                        continue;
                    }
                    let det = c1 + 2.0 * (x * w.re + y * w.im) + (x * x + y * y) * delta;
                    if det > best.0 {
                        best = (det, a, b, x, y);
                    }
                }
            }
        }
    }
    let (_, a, b, x, y) = best;
    let m = ComplexMatrix::new(
        2,
        2,
        vec![
            Complex64::new(a, 0.0),
            Complex64::new(x, y),
            Complex64::new(x, -y),
            Complex64::new(b, 0.0),
        ],
    )
    .expect("2x2");
    HermitianMatrix::new(m).expect("hermitian by construction")
}

/// Capacity error bound of the grid: gradient norm of the objective is at
/// most `tr(S)`, and the optimum is within one spacing of a feasible grid
/// point in every coordinate.
pub fn grid_resolution_bound(
    model: &SystemModel,
    partition: &PowerPartition,
    resolution: usize,
) -> Result<f64> {
    let s = model.gram_matrix()?;
    let pmax = partition
        .budgets()
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let spacing = 2.0 * pmax / resolution as f64;
    Ok(2.0 * s.trace_re() * spacing)
}

/// Dual recovery for grid outputs: group averages of the diagonal of
/// `(I + S Q)^{-1} S`, clamped positive. Only used to fill in KKT numbers.
fn recover_dual(
    q: &HermitianMatrix,
    s: &HermitianMatrix,
    partition: &PowerPartition,
) -> Result<DualDiagonal> {
    let n = q.dim();
    let m = ComplexMatrix::identity(n).add(&s.as_matrix().mul(q.as_matrix()));
    let a = m.solve(s.as_matrix())?;
    let per_group: Vec<f64> = partition
        .groups()
        .iter()
        .map(|g| {
            let avg: f64 = g.iter().map(|&j| a.get(j, j).re).sum::<f64>() / g.len() as f64;
            avg.max(1e-12)
        })
        .collect();
    DualDiagonal::from_per_group(partition, &per_group)
}
