use super::{DenseMatrix, LinalgError};
use crate::Scalar;

/// Dense Cholesky factorization `A = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    // lower triangle, row-major, packed as a full n x n buffer
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self, LinalgError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(LinalgError::NotSquare {
                rows: n,
                cols: a.cols(),
            });
        }
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > T::zero()) {
                        return Err(LinalgError::NotPositiveDefinite { pivot: i });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = rhs`.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
        let n = self.n;
        if rhs.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: rhs.len(),
            });
        }
        let mut w = rhs.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: T = row.iter().zip(&w[..i]).map(|(&a, &b)| a * b).sum();
            w[i] = (w[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * w[k];
            }
            w[i] = s / self.l[i * n + i];
        }
        Ok(w)
    }
}

/// Cholesky factorization of a symmetric positive definite tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct SymTridiagonalCholesky<T> {
    diag: Vec<T>,
    sub: Vec<T>,
}

impl<T: Scalar> SymTridiagonalCholesky<T> {
    /// `diag` has length n, `off` (the sub/super-diagonal) length n - 1.
    pub fn factor(diag: &[T], off: &[T]) -> Result<Self, LinalgError> {
        let n = diag.len();
        if n > 0 && off.len() + 1 != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n.saturating_sub(1),
                found: off.len(),
            });
        }
        let mut d = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let mut v = diag[i];
            if i > 0 {
                let li: T = s[i - 1];
                v -= li * li;
            }
            if !(v > T::zero()) {
                return Err(LinalgError::NotPositiveDefinite { pivot: i });
            }
            let di = v.sqrt();
            d.push(di);
            if i + 1 < n {
                s.push(off[i] / di);
            }
        }
        Ok(Self { diag: d, sub: s })
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
        let n = self.diag.len();
        if rhs.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: rhs.len(),
            });
        }
        let mut w = rhs.to_vec();
        for i in 0..n {
            if i > 0 {
                let prev = w[i - 1];
                w[i] -= self.sub[i - 1] * prev;
            }
            w[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                let next = w[i + 1];
                w[i] -= self.sub[i] * next;
            }
            w[i] /= self.diag[i];
        }
        Ok(w)
    }
}
