//! Dense and sparse linear algebra used by the solvers and the problem suite.
//!
//! Vectors are plain `Vec<T>` / `&[T]`. Matrices come in two storage
//! flavours, [`DenseMatrix`] (row-major) and [`CsrMatrix`], both of which
//! implement [`MatVec`].

mod cholesky;
mod csr;
mod dense;
mod mm;
mod qr;

pub use cholesky::{Cholesky, SymTridiagonalCholesky};
pub use csr::CsrMatrix;
pub use dense::DenseMatrix;
pub use mm::{parse_matrix_market, read_matrix_market, write_matrix_market, MatrixMarketError};
pub use qr::{qr_least_squares, LeastSquaresSolution, DEFAULT_RANK_TOL};
pub(crate) use qr::least_squares_columns;

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("rank tolerance must be positive")]
    InvalidRankTol,
}

/// Anything that can form `y = A x`.
pub trait MatVec<T: Scalar> {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// Writes `A x` into `y`. Callers guarantee the lengths.
    fn mat_vec_into(&self, x: &[T], y: &mut [T]);
}

/// Returns `A x`, checking dimensions.
pub fn mat_vec<T: Scalar, A: MatVec<T> + ?Sized>(a: &A, x: &[T]) -> Result<Vec<T>, LinalgError> {
    if x.len() != a.ncols() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.ncols(),
            found: x.len(),
        });
    }
    let mut y = vec![T::zero(); a.nrows()];
    a.mat_vec_into(x, &mut y);
    Ok(y)
}

/// Euclidean norm. Falls back to a scaled sum when the plain sum of squares
/// overflows or underflows.
pub fn norm2<T: Scalar>(x: &[T]) -> T {
    let ss: T = x.iter().map(|&v| v * v).sum();
    if ss.is_nan() || (ss.is_finite() && ss >= T::min_positive_value() / T::epsilon()) {
        return ss.sqrt();
    }
    let scale = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() || scale.is_infinite() {
        return scale;
    }
    let s: T = x.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

/// `y += alpha * x`
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `x - y`
pub fn sub<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}

pub fn all_finite<T: Scalar>(x: &[T]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Jacobi (diagonal) scaling: returns `(D⁻¹A, D⁻¹b)` with `D = diag(A)`.
pub fn jacobi_scale<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
) -> Result<(CsrMatrix<T>, Vec<T>), LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if b.len() != a.nrows() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|d| *d == T::zero()) {
        return Err(LinalgError::ZeroDiagonal { row });
    }
    let inv: Vec<T> = diag.iter().map(|&d| T::one() / d).collect();
    let scaled_b = b.iter().zip(&inv).map(|(&bi, &di)| bi * di).collect();
    Ok((a.scale_rows(&inv), scaled_b))
}
