//! Linear model problems.

use std::f64::consts::PI;

use super::ProblemError;
use crate::linalg::CsrMatrix;
use crate::Scalar;

/// Cyclic permutation `A e_j = e_{j+1}` (indices mod `n`) and `b = e₁`.
///
/// `A` is orthogonal with all eigenvalues on the unit circle, so Richardson
/// iteration does not converge and GMRES from zero stagnates until step `n`.
pub fn build_permutation_system<T: Scalar>(n: usize) -> Result<(CsrMatrix<T>, Vec<T>), ProblemError> {
    if n < 2 {
        return Err(ProblemError::InvalidParameter(format!("permutation size must be at least 2, got {n}")));
    }
    let trip: Vec<_> = (0..n).map(|j| ((j + 1) % n, j, T::one())).collect();
    let mut b = vec![T::zero(); n];
    b[0] = T::one();
    Ok((CsrMatrix::from_triplets(n, n, &trip)?, b))
}

/// Five-point finite-difference Poisson problem on `[-1, 1]²`.
#[derive(Debug, Clone)]
pub struct PoissonProblem<T> {
    /// `h²`-scaled stencil: 4 on the diagonal, -1 for each neighbour.
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    /// Exact solution sampled at the interior nodes.
    pub exact: Vec<T>,
    pub grid_points_per_side: usize,
    pub h: f64,
}

/// Discretizes `-Δu = (π²/2) cos(πx/2) cos(πy/2)` on `[-1, 1]²` with
/// `u = 1` on the boundary, whose solution is
/// `u = cos(πx/2) cos(πy/2) + 1`.
///
/// Unknowns are the `N × N` interior nodes, ordered row-major
/// (`index = j·N + i` for `x_i`, `y_j`), with spacing `h = 2/(N+1)`.
pub fn build_poisson_fd<T: Scalar>(grid_points_per_side: usize) -> Result<PoissonProblem<T>, ProblemError> {
    let n = grid_points_per_side;
    if n < 3 {
        return Err(ProblemError::InvalidParameter(format!("need at least 3 grid points per side, got {n}")));
    }
    let h = 2.0 / (n as f64 + 1.0);
    let coord = |i: usize| -1.0 + (i as f64 + 1.0) * h;
    let f = |x: f64, y: f64| 0.5 * PI * PI * (0.5 * PI * x).cos() * (0.5 * PI * y).cos();
    let u = |x: f64, y: f64| (0.5 * PI * x).cos() * (0.5 * PI * y).cos() + 1.0;
    let g = 1.0;

    let dim = n * n;
    let mut trip = Vec::with_capacity(5 * dim);
    let mut rhs = Vec::with_capacity(dim);
    let mut exact = Vec::with_capacity(dim);
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            let (x, y) = (coord(i), coord(j));
            trip.push((k, k, T::lit(4.0)));
            let mut bk = h * h * f(x, y);
            let neighbours = [
                (i > 0, k.wrapping_sub(1)),
                (i + 1 < n, k + 1),
                (j > 0, k.wrapping_sub(n)),
                (j + 1 < n, k + n),
            ];
            for (inside, idx) in neighbours {
                if inside {
                    trip.push((k, idx, -T::one()));
                } else {
                    bk += g;
                }
            }
            rhs.push(T::lit(bk));
            exact.push(T::lit(u(x, y)));
        }
    }
    Ok(PoissonProblem {
        matrix: CsrMatrix::from_triplets(dim, dim, &trip)?,
        rhs,
        exact,
        grid_points_per_side: n,
        h,
    })
}
