//! Scaled-form ADMM written as a fixed-point map on `[y, λ̄]`.
//!
//! For `min f(x) + g(y)` subject to `A x = y`, one sweep is
//!
//! ```text
//! x⁺ = argmin f(x) + (μ/2)‖A x - y + λ̄‖²
//! y⁺ = prox_{g/μ}(A x⁺ + λ̄)
//! λ̄⁺ = λ̄ + A x⁺ - y⁺
//! ```
//!
//! and `(y, λ̄) ↦ (y⁺, λ̄⁺)` is the map handed to the accelerators.

use super::prox::{project_nonneg, soft_threshold};
use super::ProblemError;
use crate::fixedpoint::FixedPointMap;
use crate::linalg::{norm2, sub, Cholesky, CsrMatrix, DenseMatrix, MatVec, SymTridiagonalCholesky};
use crate::Scalar;

/// Problem-specific pieces of one ADMM sweep.
pub trait AdmmSplitting<T: Scalar> {
    fn x_dim(&self) -> usize;
    fn y_dim(&self) -> usize;
    fn mu(&self) -> T;
    /// Solves the x-subproblem given `v = y - λ̄`.
    fn x_update(&self, v: &[T]) -> Vec<T>;
    /// `A x`
    fn apply_a(&self, x: &[T]) -> Vec<T>;
    /// `Aᵀ v`
    fn apply_at(&self, v: &[T]) -> Vec<T>;
    /// `prox_{g/μ}(v)`
    fn prox(&self, v: &[T]) -> Vec<T>;
}

/// The pair `(y, λ̄)`; its concatenation is the fixed-point vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState<T> {
    pub y: Vec<T>,
    pub lambda_bar: Vec<T>,
}

impl<T: Scalar> AdmmState<T> {
    pub fn zeros(y_dim: usize) -> Self {
        Self {
            y: vec![T::zero(); y_dim],
            lambda_bar: vec![T::zero(); y_dim],
        }
    }

    pub fn from_vector(z: &[T]) -> Self {
        let half = z.len() / 2;
        Self {
            y: z[..half].to_vec(),
            lambda_bar: z[half..].to_vec(),
        }
    }

    pub fn to_vector(&self) -> Vec<T> {
        let mut z = self.y.clone();
        z.extend_from_slice(&self.lambda_bar);
        z
    }
}

/// Primal and dual feasibility of one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    /// `‖A x⁺ - y⁺‖`
    pub primal: f64,
    /// `‖μ Aᵀ(y⁺ - y)‖`
    pub dual: f64,
}

/// One full sweep, with everything needed for monitoring.
#[derive(Debug, Clone)]
pub struct AdmmSweep<T> {
    pub x: Vec<T>,
    pub next: AdmmState<T>,
    pub feasibility: Feasibility,
}

/// [`FixedPointMap`] wrapper around an [`AdmmSplitting`].
#[derive(Debug, Clone)]
pub struct AdmmMap<P> {
    splitting: P,
}

impl<P> AdmmMap<P> {
    pub fn new(splitting: P) -> Self {
        Self { splitting }
    }

    pub fn splitting(&self) -> &P {
        &self.splitting
    }
}

impl<P> AdmmMap<P> {
    /// Initial state `y = 0`, `λ̄ = 0` as a fixed-point vector.
    pub fn initial_state<T: Scalar>(&self) -> Vec<T>
    where
        P: AdmmSplitting<T>,
    {
        AdmmState::zeros(self.splitting.y_dim()).to_vector()
    }

    pub fn sweep<T: Scalar>(&self, z: &[T]) -> AdmmSweep<T>
    where
        P: AdmmSplitting<T>,
    {
        let p = &self.splitting;
        let state = AdmmState::from_vector(z);
        let v = sub(&state.y, &state.lambda_bar);
        let x = p.x_update(&v);
        let ax = p.apply_a(&x);
        let shifted: Vec<T> = ax.iter().zip(&state.lambda_bar).map(|(&a, &l)| a + l).collect();
        let y = p.prox(&shifted);
        let gap = sub(&ax, &y);
        let lambda_bar: Vec<T> = state.lambda_bar.iter().zip(&gap).map(|(&l, &g)| l + g).collect();
        let dy = sub(&y, &state.y);
        let dual = p.mu() * norm2(&p.apply_at(&dy));
        AdmmSweep {
            feasibility: Feasibility {
                primal: norm2(&gap).as_f64(),
                dual: dual.as_f64(),
            },
            x,
            next: AdmmState { y, lambda_bar },
        }
    }

    /// The primal iterate `x⁺` produced from state `z`.
    pub fn primal<T: Scalar>(&self, z: &[T]) -> Vec<T>
    where
        P: AdmmSplitting<T>,
    {
        let state = AdmmState::from_vector(z);
        self.splitting.x_update(&sub(&state.y, &state.lambda_bar))
    }

    pub fn feasibility<T: Scalar>(&self, z: &[T]) -> Feasibility
    where
        P: AdmmSplitting<T>,
    {
        self.sweep(z).feasibility
    }
}

impl<T: Scalar, P: AdmmSplitting<T>> FixedPointMap<T> for AdmmMap<P> {
    fn dimension(&self) -> usize {
        2 * self.splitting.y_dim()
    }

    fn eval(&self, z: &[T]) -> Vec<T> {
        self.sweep(z).next.to_vector()
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), ProblemError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(ProblemError::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Total variation denoising `min ½‖x̂ - x‖² + β‖G x‖₁` with `G` the forward
/// difference `(G x)_i = x_{i+1} - x_i`.
#[derive(Debug, Clone)]
pub struct TvSplitting<T> {
    x_hat: Vec<T>,
    beta: T,
    mu: T,
    factor: SymTridiagonalCholesky<T>,
}

impl<T: Scalar> TvSplitting<T> {
    pub fn new(x_hat: Vec<T>, beta: T, mu: T) -> Result<Self, ProblemError> {
        let n = x_hat.len();
        if n < 2 {
            return Err(ProblemError::InvalidParameter("TV needs at least two samples".into()));
        }
        if !(beta >= T::zero()) {
            return Err(ProblemError::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
        }
        check_positive("mu", mu.as_f64())?;
        // I + μ GᵀG, with GᵀG = tridiag(-1, [1, 2, …, 2, 1], -1)
        let two = T::lit(2.0);
        let diag: Vec<T> = (0..n)
            .map(|i| T::one() + mu * if i == 0 || i == n - 1 { T::one() } else { two })
            .collect();
        let off = vec![-mu; n - 1];
        let factor = SymTridiagonalCholesky::factor(&diag, &off)?;
        Ok(Self { x_hat, beta, mu, factor })
    }

    /// The `(n-1) × n` difference matrix `G`.
    pub fn difference_matrix(n: usize) -> CsrMatrix<T> {
        let mut trip = Vec::with_capacity(2 * n);
        for i in 0..n.saturating_sub(1) {
            trip.push((i, i, -T::one()));
            trip.push((i, i + 1, T::one()));
        }
        CsrMatrix::from_triplets(n.saturating_sub(1), n, &trip).expect("indices in range")
    }
}

impl<T: Scalar> AdmmSplitting<T> for TvSplitting<T> {
    fn x_dim(&self) -> usize {
        self.x_hat.len()
    }
    fn y_dim(&self) -> usize {
        self.x_hat.len() - 1
    }
    fn mu(&self) -> T {
        self.mu
    }
    fn x_update(&self, v: &[T]) -> Vec<T> {
        let gtv = self.apply_at(v);
        let rhs: Vec<T> = self.x_hat.iter().zip(&gtv).map(|(&xh, &g)| xh + self.mu * g).collect();
        self.factor.solve(&rhs).expect("dimension fixed at construction")
    }
    fn apply_a(&self, x: &[T]) -> Vec<T> {
        x.windows(2).map(|w| w[1] - w[0]).collect()
    }
    fn apply_at(&self, v: &[T]) -> Vec<T> {
        let n = v.len() + 1;
        (0..n)
            .map(|i| {
                let up = if i > 0 { v[i - 1] } else { T::zero() };
                let down = if i < n - 1 { v[i] } else { T::zero() };
                up - down
            })
            .collect()
    }
    fn prox(&self, v: &[T]) -> Vec<T> {
        soft_threshold(v, self.beta / self.mu)
    }
}

/// Normal-equations factor `(w CᵀC + μI)` and the fixed part `w Cᵀx̂`.
#[derive(Debug, Clone)]
struct RegularizedNormal<T> {
    factor: Cholesky<T>,
    ct_xhat: Vec<T>,
    mu: T,
}

impl<T: Scalar> RegularizedNormal<T> {
    fn new(c: &CsrMatrix<T>, x_hat: &[T], weight: T, mu: T) -> Result<Self, ProblemError> {
        if x_hat.len() != c.nrows() {
            return Err(ProblemError::InvalidParameter(format!(
                "data has length {} but C has {} rows",
                x_hat.len(),
                c.nrows()
            )));
        }
        check_positive("mu", mu.as_f64())?;
        let gram = c.gram();
        let n = gram.rows();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = weight * gram.get(i, j) + if i == j { mu } else { T::zero() };
                m.set(i, j, v);
            }
        }
        let factor = Cholesky::factor(&m)?;
        let ct_xhat = c.transpose_mat_vec(x_hat)?.into_iter().map(|v| weight * v).collect();
        Ok(Self { factor, ct_xhat, mu })
    }

    fn solve(&self, v: &[T]) -> Vec<T> {
        let rhs: Vec<T> = self.ct_xhat.iter().zip(v).map(|(&c, &vi)| c + self.mu * vi).collect();
        self.factor.solve(&rhs).expect("dimension fixed at construction")
    }
}

/// Lasso `min ½‖C x - x̂‖² + β‖x‖₁` with splitting `x = y`.
#[derive(Debug, Clone)]
pub struct LassoSplitting<T> {
    normal: RegularizedNormal<T>,
    beta: T,
}

impl<T: Scalar> LassoSplitting<T> {
    pub fn new(c: &CsrMatrix<T>, x_hat: &[T], beta: T, mu: T) -> Result<Self, ProblemError> {
        if !(beta >= T::zero()) {
            return Err(ProblemError::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
        }
        Ok(Self {
            normal: RegularizedNormal::new(c, x_hat, T::one(), mu)?,
            beta,
        })
    }
}

impl<T: Scalar> AdmmSplitting<T> for LassoSplitting<T> {
    fn x_dim(&self) -> usize {
        self.normal.ct_xhat.len()
    }
    fn y_dim(&self) -> usize {
        self.normal.ct_xhat.len()
    }
    fn mu(&self) -> T {
        self.normal.mu
    }
    fn x_update(&self, v: &[T]) -> Vec<T> {
        self.normal.solve(v)
    }
    fn apply_a(&self, x: &[T]) -> Vec<T> {
        x.to_vec()
    }
    fn apply_at(&self, v: &[T]) -> Vec<T> {
        v.to_vec()
    }
    fn prox(&self, v: &[T]) -> Vec<T> {
        soft_threshold(v, self.beta / self.normal.mu)
    }
}

/// Nonnegative least squares `min ‖C x - x̂‖²` subject to `x ≥ 0`, with
/// splitting `x = y`, `y ≥ 0`.
#[derive(Debug, Clone)]
pub struct NnlsSplitting<T> {
    normal: RegularizedNormal<T>,
}

impl<T: Scalar> NnlsSplitting<T> {
    pub fn new(c: &CsrMatrix<T>, x_hat: &[T], mu: T) -> Result<Self, ProblemError> {
        Ok(Self {
            normal: RegularizedNormal::new(c, x_hat, T::lit(2.0), mu)?,
        })
    }
}

impl<T: Scalar> AdmmSplitting<T> for NnlsSplitting<T> {
    fn x_dim(&self) -> usize {
        self.normal.ct_xhat.len()
    }
    fn y_dim(&self) -> usize {
        self.normal.ct_xhat.len()
    }
    fn mu(&self) -> T {
        self.normal.mu
    }
    fn x_update(&self, v: &[T]) -> Vec<T> {
        self.normal.solve(v)
    }
    fn apply_a(&self, x: &[T]) -> Vec<T> {
        x.to_vec()
    }
    fn apply_at(&self, v: &[T]) -> Vec<T> {
        v.to_vec()
    }
    fn prox(&self, v: &[T]) -> Vec<T> {
        project_nonneg(v)
    }
}

pub fn tv_admm_map<T: Scalar>(x_hat: Vec<T>, beta: T, mu: T) -> Result<AdmmMap<TvSplitting<T>>, ProblemError> {
    Ok(AdmmMap::new(TvSplitting::new(x_hat, beta, mu)?))
}

pub fn lasso_admm_map<T: Scalar>(
    c: &CsrMatrix<T>,
    x_hat: &[T],
    beta: T,
    mu: T,
) -> Result<AdmmMap<LassoSplitting<T>>, ProblemError> {
    Ok(AdmmMap::new(LassoSplitting::new(c, x_hat, beta, mu)?))
}

pub fn nnls_admm_map<T: Scalar>(
    c: &CsrMatrix<T>,
    x_hat: &[T],
    mu: T,
) -> Result<AdmmMap<NnlsSplitting<T>>, ProblemError> {
    Ok(AdmmMap::new(NnlsSplitting::new(c, x_hat, mu)?))
}
