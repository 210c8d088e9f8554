//! Dense complex matrices in row-major order.
//!
//! Only the operations the solvers actually need: products, adjoints, LU
//! solves and a few norms. Everything is `f64`-precision and allocation-happy;
//! problem sizes here are at most a few hundred rows.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major entries. Dimensions must be at least 1x1.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                context: format!("matrix dimensions must be positive, got {rows}x{cols}"),
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "expected {} entries for a {rows}x{cols} matrix, got {}",
                    rows * cols,
                    data.len()
                ),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(d, 0.0));
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "inner dimensions must agree ({}x{} * {}x{})",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_off = i * rhs.cols;
                let rhs_off = k * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[row_off + j] += a * rhs.data[rhs_off + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest |a_ij - conj(a_ji)| over all entry pairs.
    pub fn hermitian_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// First `k` columns as a new matrix.
    pub fn leading_columns(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.cols);
        Self::from_fn(self.rows, k, |i, j| self.get(i, j))
    }

    /// Solve `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        assert!(self.is_square(), "solve requires a square matrix");
        assert_eq!(self.rows, rhs.rows, "rhs row count must match");
        let n = self.rows;
        let k = rhs.cols;
        let mut lu = self.data.clone();
        let mut b = rhs.data.clone();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let tiny = (n as f64) * f64::EPSILON * scale;

        for col in 0..n {
            // partial pivot
            let mut piv = col;
            let mut piv_abs = lu[col * n + col].norm();
            for r in (col + 1)..n {
                let a = lu[r * n + col].norm();
                if a > piv_abs {
                    piv = r;
                    piv_abs = a;
                }
            }
            if piv_abs <= tiny {
                return Err(Error::SingularMatrix);
            }
            if piv != col {
                for c in 0..n {
                    lu.swap(col * n + c, piv * n + c);
                }
                for c in 0..k {
                    b.swap(col * k + c, piv * k + c);
                }
            }
            let d = lu[col * n + col];
            for r in (col + 1)..n {
                let f = lu[r * n + col] / d;
                lu[r * n + col] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for c in (col + 1)..n {
                    let v = lu[col * n + c];
                    lu[r * n + c] -= f * v;
                }
                for c in 0..k {
                    let v = b[col * k + c];
                    b[r * k + c] -= f * v;
                }
            }
        }
        // back substitution
        for col in (0..n).rev() {
            let d = lu[col * n + col];
            for c in 0..k {
                let mut acc = b[col * k + c];
                for j in (col + 1)..n {
                    acc -= lu[col * n + j] * b[j * k + c];
                }
                b[col * k + c] = acc / d;
            }
        }
        Ok(Self {
            rows: n,
            cols: k,
            data: b,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    /// `ln |det(self)|` via LU; errors on singular input.
    pub(crate) fn log_abs_det(&self) -> Result<f64> {
        assert!(self.is_square());
        let n = self.rows;
        let mut lu = self.data.clone();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let tiny = (n as f64) * f64::EPSILON * scale;
        let mut acc = 0.0;
        for col in 0..n {
            let mut piv = col;
            let mut piv_abs = lu[col * n + col].norm();
            for r in (col + 1)..n {
                let a = lu[r * n + col].norm();
                if a > piv_abs {
                    piv = r;
                    piv_abs = a;
                }
            }
            if piv_abs <= tiny {
                return Err(Error::SingularMatrix);
            }
            if piv != col {
                for c in 0..n {
                    lu.swap(col * n + c, piv * n + c);
                }
            }
            let d = lu[col * n + col];
            acc += d.norm().ln();
            for r in (col + 1)..n {
                let f = lu[r * n + col] / d;
                for c in (col + 1)..n {
                    let v = lu[col * n + c];
                    lu[r * n + c] -= f * v;
                }
            }
        }
        Ok(acc)
    }
}
