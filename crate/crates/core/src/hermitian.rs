//! Complex Hermitian primitives: eigendecomposition, PSD projection,
//! negative-part extraction, square root, log-determinant.
//!
//! The eigensolver is a cyclic complex Jacobi iteration. It is not the
//! fastest choice but it is simple, numerically excellent (residuals near
//! machine precision) and fully deterministic: identical input bits give
//! identical output bits, with eigenvalues sorted in decreasing order and
//! each eigenvector phase-normalized so its dominant entry is real positive.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tol;

const MAX_JACOBI_SWEEPS: usize = 60;
/// Off-diagonal Frobenius mass below this (relative to the matrix norm)
/// counts as diagonalized.
const SWEEP_TOL: f64 = 1e-15;

/// Square complex matrix with exact conjugate symmetry.
///
/// Construction symmetrizes the input, so `get(i, j) == get(j, i).conj()`
/// holds bit-for-bit and diagonals are exactly real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: ComplexMatrix,
}

impl HermitianMatrix {
    /// Accepts matrices within [`tol::HERMITIAN_CONSTRUCTION`] of conjugate
    /// symmetry (relative to the largest entry) and symmetrizes them.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = mat.hermitian_deviation();
        if deviation > tol::HERMITIAN_CONSTRUCTION * mat.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::force(mat))
    }

    /// Symmetrize without the deviation gate. For products that are Hermitian
    /// by algebra and only drift by roundoff.
    pub fn symmetrized(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self::force(mat))
    }

    fn force(mat: ComplexMatrix) -> Self {
        let n = mat.rows();
        let mut out = mat;
        for i in 0..n {
            let d = out.get(i, i);
            out.set(i, i, Complex64::new(d.re, 0.0));
            for j in (i + 1)..n {
                let avg = (out.get(i, j) + out.get(j, i).conj()) * 0.5;
                out.set(i, j, avg);
                out.set(j, i, avg.conj());
            }
        }
        Self { mat: out }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(n),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self {
            mat: ComplexMatrix::from_real_diag(diag),
        }
    }

    /// `U diag(w) U^H` for a (typically orthonormal) column block `u`.
    pub fn from_scaled_basis(u: &ComplexMatrix, weights: &[f64]) -> Self {
        assert_eq!(u.cols(), weights.len());
        let n = u.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, &w) in weights.iter().enumerate() {
                    acc += u.get(i, c) * u.get(j, c).conj() * w;
                }
                out.set(i, j, acc);
                out.set(j, i, acc.conj());
            }
        }
        Self::force(out)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat.get(i, j)
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn diag_re(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace_re(&self) -> f64 {
        self.diag_re().iter().sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.mat.fro_norm()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::force(self.mat.add(&rhs.mat))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::force(self.mat.sub(&rhs.mat))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::force(self.mat.scale_re(s))
    }

    /// `diag(v) * A * diag(v)` for real `v`; stays exactly Hermitian.
    pub fn conjugate_by_diag(&self, v: &[f64]) -> Self {
        assert_eq!(v.len(), self.dim());
        let n = self.dim();
        let mut out = self.mat.clone();
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, out.get(i, j) * (v[i] * v[j]));
            }
        }
        Self { mat: out }
    }

    /// Copy with the given rows and columns zeroed out.
    pub fn zero_rows_cols(&self, idx: &[usize]) -> Self {
        let n = self.dim();
        let mut out = self.mat.clone();
        for &i in idx {
            for j in 0..n {
                out.set(i, j, Complex64::new(0.0, 0.0));
                out.set(j, i, Complex64::new(0.0, 0.0));
            }
        }
        Self { mat: out }
    }

    /// Full eigendecomposition, eigenvalues sorted decreasing.
    pub fn evd(&self) -> EigenDecomposition {
        let (vectors, values) = jacobi(&self.mat);
        EigenDecomposition { vectors, values }
    }

    /// Zero out the negative eigenvalues.
    pub fn psd_project(&self) -> Self {
        let e = self.evd();
        let clamped: Vec<f64> = e.values.iter().map(|&v| v.max(0.0)).collect();
        Self::from_scaled_basis(&e.vectors, &clamped)
    }

    /// Hermitian square root of a PSD matrix. Eigenvalues slightly negative
    /// from roundoff are clamped; genuine negatives are rejected.
    pub fn sqrt(&self) -> Result<Self> {
        let e = self.evd();
        let lambda_max = e.values.first().copied().unwrap_or(0.0).max(0.0);
        let floor = -tol::PSD_CLAMP_REL * lambda_max;
        if let Some(&min) = e.values.last() {
            if min < floor {
                return Err(Error::NotPsd { lambda_min: min });
            }
        }
        let roots: Vec<f64> = e.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
        Ok(Self::from_scaled_basis(&e.vectors, &roots))
    }

    /// Sum of natural logs of the eigenvalues of a positive definite matrix.
    pub fn logdet_pd(&self) -> Result<f64> {
        let e = self.evd();
        let lambda_max = e.values.first().copied().unwrap_or(0.0);
        let min = e.values.last().copied().unwrap_or(0.0);
        if lambda_max <= 0.0 || min <= tol::PSD_CLAMP_REL * lambda_max {
            return Err(Error::NotPd { lambda_min: min });
        }
        Ok(e.values.iter().map(|v| v.ln()).sum())
    }

    /// Inverse Hermitian square root of a positive definite matrix.
    pub fn inv_sqrt(&self) -> Result<Self> {
        let e = self.evd();
        let lambda_max = e.values.first().copied().unwrap_or(0.0);
        let min = e.values.last().copied().unwrap_or(0.0);
        if lambda_max <= 0.0 || min <= tol::PSD_CLAMP_REL * lambda_max {
            return Err(Error::NotPd { lambda_min: min });
        }
        let w: Vec<f64> = e.values.iter().map(|v| 1.0 / v.sqrt()).collect();
        Ok(Self::from_scaled_basis(&e.vectors, &w))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.evd().values.last().copied().unwrap_or(0.0)
    }
}

/// Negative part of a real diagonal: `x >= 0` maps to 0, otherwise to `-x`.
pub fn neg_part(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&x| if x >= 0.0 { 0.0 } else { -x }).collect()
}

/// Unitary eigenvectors (columns) and real eigenvalues sorted decreasing.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub vectors: ComplexMatrix,
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_scaled_basis(&self.vectors, &self.values)
    }

    /// `||V^H V - I||_F`
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.vectors.cols();
        let gram = self.vectors.adjoint().mul(&self.vectors);
        gram.sub(&ComplexMatrix::identity(n)).fro_norm()
    }

    /// Relative Frobenius distance between `V diag(values) V^H` and `a`.
    pub fn reconstruction_residual(&self, a: &HermitianMatrix) -> f64 {
        let diff = self.reconstruct().as_matrix().sub(a.as_matrix()).fro_norm();
        diff / a.fro_norm().max(1.0)
    }
}

/// Cyclic complex Jacobi on an exactly-Hermitian matrix.
fn jacobi(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let fro = m.fro_norm();

    if n > 1 && fro > 0.0 {
        for _sweep in 0..MAX_JACOBI_SWEEPS {
            let mut off_sq = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off_sq += m.get(p, q).norm_sqr();
                }
            }
            if (2.0 * off_sq).sqrt() <= SWEEP_TOL * fro {
                break;
            }
            for p in 0..(n - 1) {
                for q in (p + 1)..n {
                    rotate(&mut m, &mut v, p, q, fro);
                }
            }
        }
    }

    // Sort decreasing with a stable order, then fix each eigenvector's phase
    // so runs are reproducible.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(diag[src]);
        let mut max_abs = 0.0f64;
        for i in 0..n {
            max_abs = max_abs.max(v.get(i, src).norm());
        }
        let mut phase = Complex64::new(1.0, 0.0);
        for i in 0..n {
            let z = v.get(i, src);
            if z.norm() >= 0.5 * max_abs && max_abs > 0.0 {
                phase = z.conj() / z.norm();
                break;
            }
        }
        for i in 0..n {
            vectors.set(i, dst, v.get(i, src) * phase);
        }
    }
    (vectors, values)
}

/// One Jacobi rotation zeroing the (p, q) entry.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, fro: f64) {
    let apq = m.get(p, q);
    let r = apq.norm();
    if r <= 1e-300 || r <= f64::EPSILON * 1e-4 * fro {
        return;
    }
    let app = m.get(p, p).re;
    let aqq = m.get(q, q).re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let phase = apq / r;
    let sigma = phase * s; // rotation: J = [[c, sigma], [-conj(sigma), c]]

    let n = m.rows();
    // rows: M <- J^H M
    for j in 0..n {
        let mp = m.get(p, j);
        let mq = m.get(q, j);
        m.set(p, j, mp * c - mq * sigma);
        m.set(q, j, mp * sigma.conj() + mq * c);
    }
    // columns: M <- M J, and accumulate V <- V J
    for i in 0..n {
        let mp = m.get(i, p);
        let mq = m.get(i, q);
        m.set(i, p, mp * c - mq * sigma.conj());
        m.set(i, q, mp * sigma + mq * c);

        let vp = v.get(i, p);
        let vq = v.get(i, q);
        v.set(i, p, vp * c - vq * sigma.conj());
        v.set(i, q, vp * sigma + vq * c);
    }
    // exact zeros and real diagonals
    let new_pp = c * c * app + s * s * aqq - 2.0 * c * s * r;
    let new_qq = s * s * app + c * c * aqq + 2.0 * c * s * r;
    m.set(p, p, Complex64::new(new_pp, 0.0));
    m.set(q, q, Complex64::new(new_qq, 0.0));
    m.set(p, q, Complex64::new(0.0, 0.0));
    m.set(q, p, Complex64::new(0.0, 0.0));
}
