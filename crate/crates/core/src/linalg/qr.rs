use super::{dot, norm2, DenseMatrix, LinalgError};
use crate::Scalar;

/// Default relative pivot threshold for declaring a column numerically dependent.
pub const DEFAULT_RANK_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolution<T> {
    pub coefficients: Vec<T>,
    pub numerical_rank: usize,
    /// `numerical_rank < cols`; the dropped coefficients are zero.
    pub truncated: bool,
}

/// Solves `min_γ ‖rhs + B γ‖₂` by Householder QR with column pivoting.
///
/// Pivots whose magnitude falls below `rank_tol · |R₁₁|` end the
/// factorization; the corresponding coefficients are returned as zero and the
/// solution is the minimizer over the retained pivot columns.
pub fn qr_least_squares<T: Scalar>(
    b: &DenseMatrix<T>,
    rhs: &[T],
    rank_tol: T,
) -> Result<LeastSquaresSolution<T>, LinalgError> {
    let m = b.rows();
    let n = b.cols();
    if rhs.len() != m {
        return Err(LinalgError::DimensionMismatch {
            expected: m,
            found: rhs.len(),
        });
    }
    if !(rank_tol > T::zero()) {
        return Err(LinalgError::InvalidRankTol);
    }
    let cols: Vec<Vec<T>> = (0..n).map(|j| b.column(j)).collect();
    Ok(least_squares_columns(cols, rhs, rank_tol))
}

/// Column-major core of [`qr_least_squares`]; `cols` are consumed as
/// workspace. Lengths and `rank_tol > 0` are the caller's responsibility.
pub(crate) fn least_squares_columns<T: Scalar>(
    mut cols: Vec<Vec<T>>,
    rhs: &[T],
    rank_tol: T,
) -> LeastSquaresSolution<T> {
    let m = rhs.len();
    let n = cols.len();
    if n == 0 {
        return LeastSquaresSolution {
            coefficients: Vec::new(),
            numerical_rank: 0,
            truncated: false,
        };
    }
    debug_assert!(cols.iter().all(|c| c.len() == m));

    // the target is -rhs
    let mut y: Vec<T> = rhs.iter().map(|&v| -v).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let two = T::lit(2.0);

    let kmax = m.min(n);
    let mut steps = 0;
    for j in 0..kmax {
        let mut best = j;
        let mut best_norm = norm2(&cols[j][j..]);
        for (p, c) in cols.iter().enumerate().skip(j + 1) {
            let cn = norm2(&c[j..]);
            if cn > best_norm {
                best = p;
                best_norm = cn;
            }
        }
        if best_norm == T::zero() {
            break;
        }
        cols.swap(j, best);
        perm.swap(j, best);

        let x0 = cols[j][j];
        let alpha = if x0 >= T::zero() { -best_norm } else { best_norm };
        let mut v: Vec<T> = cols[j][j..].to_vec();
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        if vtv > T::zero() {
            for c in cols.iter_mut().skip(j + 1) {
                let s = two * dot(&v, &c[j..]) / vtv;
                for (ci, &vi) in c[j..].iter_mut().zip(&v) {
                    *ci -= s * vi;
                }
            }
            let s = two * dot(&v, &y[j..]) / vtv;
            for (yi, &vi) in y[j..].iter_mut().zip(&v) {
                *yi -= s * vi;
            }
        }
        cols[j][j] = alpha;
        for ci in &mut cols[j][j + 1..] {
            *ci = T::zero();
        }
        steps = j + 1;
    }

    let r11 = if steps > 0 { cols[0][0].abs() } else { T::zero() };
    let threshold = rank_tol * r11;
    let rank = (0..steps)
        .take_while(|&i| r11 > T::zero() && cols[i][i].abs() > threshold)
        .count();

    // back substitution on the leading rank x rank block of R
    let mut z = vec![T::zero(); rank];
    for i in (0..rank).rev() {
        let mut acc = y[i];
        for (k, zk) in z.iter().enumerate().skip(i + 1) {
            acc -= cols[k][i] * *zk;
        }
        z[i] = acc / cols[i][i];
    }

    let mut coefficients = vec![T::zero(); n];
    for (i, zi) in z.into_iter().enumerate() {
        coefficients[perm[i]] = zi;
    }
    LeastSquaresSolution {
        coefficients,
        numerical_rank: rank,
        truncated: rank < n,
    }
}
