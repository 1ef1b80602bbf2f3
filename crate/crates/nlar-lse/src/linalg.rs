//! Small dense symmetric matrix helpers.
//!
//! The information matrices in this toolkit are m×m with m rarely above 8,
//! and always of the form I + Σφφᵀ (symmetric, eigenvalues ≥ 1), so a
//! minimal row-major matrix with a Cholesky solve and a cyclic Jacobi
//! eigensolver is all that is needed.

use crate::error::{Error, Result};

/// Square row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// self += alpha * v vᵀ
    pub fn add_outer(&mut self, alpha: f64, v: &[f64]) {
        debug_assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            let avi = alpha * v[i];
            for j in 0..self.n {
                self.data[i * self.n + j] += avi * v[j];
            }
        }
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn mat_mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// self ← (self + selfᵀ)/2, suppressing floating-point asymmetry drift.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|x| x.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// ‖self·other − I‖_∞, the residual of an inverse-pair check.
    pub fn inverse_pair_residual(&self, other: &Matrix) -> f64 {
        let mut prod = self.mat_mul(other);
        for i in 0..self.n {
            let d = prod.get(i, i) - 1.0;
            prod.set(i, i, d);
        }
        prod.inf_norm()
    }
}

/// Solves A x = b for symmetric positive-definite A by Cholesky factorization.
pub fn cholesky_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::invalid(format!(
            "right-hand side length {} does not match matrix dimension {}",
            b.len(),
            n
        )));
    }
    // Lower-triangular factor L with A = L Lᵀ.
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::Numeric {
                        step: i,
                        message: format!("matrix not positive definite (pivot {s})"),
                    });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(x)
}

/// Extreme eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps rotate away every off-diagonal element in turn until the
/// off-diagonal Frobenius norm falls below `rel_tol`·‖A‖_F. Returns
/// (λ_min, λ_max).
pub fn jacobi_eigen_extremes(a: &Matrix, rel_tol: f64) -> Result<(f64, f64)> {
    const MAX_SWEEPS: usize = 60;
    let n = a.dim();
    if n == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    if n == 1 {
        let v = a.get(0, 0);
        return Ok((v, v));
    }
    let mut m = a.clone();
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let threshold = rel_tol * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * m.get(i, j) * m.get(i, j);
            }
        }
        if off.sqrt() < threshold {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                lo = lo.min(m.get(i, i));
                hi = hi.max(m.get(i, i));
            }
            return Ok((lo, hi));
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    // Avoid overflow in theta²; limit of the formula below.
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Apply the rotation on both sides.
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
            }
        }
    }
    Err(Error::Numeric {
        step: MAX_SWEEPS,
        message: "Jacobi rotations did not converge".into(),
    })
}
