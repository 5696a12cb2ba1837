//! Full (unrestarted) GMRES with residual history.
//!
//! Arnoldi uses modified Gram–Schmidt with one reorthogonalization pass; the
//! Hessenberg least-squares problem is updated with Givens rotations, so the
//! residual norm of every iterate is available without forming it.

use thiserror::Error;

use crate::fixedpoint::StopRule;
use crate::linalg::{all_finite, axpy, dot, norm2, CsrMatrix, MatVec};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GmresError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular Hessenberg matrix at iteration {iteration}")]
    Singular { iteration: usize },
    #[error("non-finite value at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresResult<T> {
    pub solution: Vec<T>,
    /// `‖b - A x_k‖` for `k = 0..=iterations`, from the Givens recurrence.
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `x_0, x_1, …` when requested.
    pub iterates: Option<Vec<Vec<T>>>,
}

fn givens<T: Scalar>(a: T, b: T) -> (T, T, T) {
    let r = a.hypot(b);
    if r == T::zero() {
        (T::one(), T::zero(), T::zero())
    } else {
        (a / r, b / r, r)
    }
}

/// Solves `A x = b` by GMRES started from `x0`.
///
/// Stops when the residual satisfies `stop` (relative to `‖b - A x0‖`), after
/// `min(max_iters, n)` iterations, or at a happy breakdown, which counts as
/// convergence.
pub fn gmres_solve<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    stop: &StopRule,
    keep_iterates: bool,
) -> Result<GmresResult<T>, GmresError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(GmresError::NotSquare { rows: n, cols: a.ncols() });
    }
    for len in [b.len(), x0.len()] {
        if len != n {
            return Err(GmresError::DimensionMismatch { expected: n, found: len });
        }
    }
    stop.validate().map_err(|e| GmresError::InvalidConfig(e.to_string()))?;

    let mut ax = vec![T::zero(); n];
    a.mat_vec_into(x0, &mut ax);
    let r0: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    if !all_finite(&r0) {
        return Err(GmresError::NonFinite { iteration: 0 });
    }
    let beta = norm2(&r0);
    let threshold = stop.threshold(beta.as_f64());
    let mut result = GmresResult {
        solution: x0.to_vec(),
        residual_norms: vec![beta.as_f64()],
        iterations: 0,
        converged: false,
        iterates: keep_iterates.then(|| vec![x0.to_vec()]),
    };
    if beta.as_f64() <= threshold || n == 0 {
        result.converged = true;
        return Ok(result);
    }

    let kmax = stop.max_iters.min(n);
    let mut basis: Vec<Vec<T>> = vec![r0.iter().map(|&v| v / beta).collect()];
    // column k of the rotated Hessenberg matrix, i.e. R[0..=k, k]
    let mut r_cols: Vec<Vec<T>> = Vec::with_capacity(kmax);
    let mut cs: Vec<T> = Vec::with_capacity(kmax);
    let mut sn: Vec<T> = Vec::with_capacity(kmax);
    let mut g = vec![beta];

    for k in 1..=kmax {
        let mut w = vec![T::zero(); n];
        a.mat_vec_into(&basis[k - 1], &mut w);
        let w_norm = norm2(&w);
        let mut h = vec![T::zero(); k + 1];
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let hi = dot(&w, v);
                axpy(-hi, v, &mut w);
                h[i] += hi;
            }
        }
        let h_next = norm2(&w);
        h[k] = h_next;
        if !all_finite(&h) {
            return Err(GmresError::NonFinite { iteration: k });
        }

        for i in 0..k - 1 {
            let (hi, hj) = (h[i], h[i + 1]);
            h[i] = cs[i] * hi + sn[i] * hj;
            h[i + 1] = -sn[i] * hi + cs[i] * hj;
        }
        let (c, s, rkk) = givens(h[k - 1], h[k]);
        h[k - 1] = rkk;
        h.truncate(k);
        cs.push(c);
        sn.push(s);
        let gk = g[k - 1];
        g[k - 1] = c * gk;
        g.push(-s * gk);
        r_cols.push(h);

        let res = g[k].abs();
        result.residual_norms.push(res.as_f64());
        result.iterations = k;

        let breakdown = h_next <= T::epsilon() * w_norm || k == n;
        let done = res.as_f64() <= threshold || breakdown;
        let last = done || k == kmax;

        if keep_iterates || last {
            let y = back_substitute(&r_cols, &g[..k]).ok_or(GmresError::Singular { iteration: k })?;
            let mut x = x0.to_vec();
            for (yi, v) in y.iter().zip(&basis) {
                axpy(*yi, v, &mut x);
            }
            if !all_finite(&x) {
                return Err(GmresError::NonFinite { iteration: k });
            }
            if let Some(it) = result.iterates.as_mut() {
                it.push(x.clone());
            }
            result.solution = x;
        }
        if done {
            result.converged = true;
            break;
        }
        if k < kmax {
            basis.push(w.iter().map(|&v| v / h_next).collect());
        }
    }
    Ok(result)
}

fn back_substitute<T: Scalar>(r_cols: &[Vec<T>], g: &[T]) -> Option<Vec<T>> {
    let k = g.len();
    let mut y = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for j in i + 1..k {
            acc -= r_cols[j][i] * y[j];
        }
        let d = r_cols[i][i];
        if d == T::zero() {
            return None;
        }
        y[i] = acc / d;
    }
    Some(y)
}
