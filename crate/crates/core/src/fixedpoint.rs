//! Fixed-point maps, stopping rules, iteration traces, and the plain
//! fixed-point driver.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::anderson::AndersonError;
use crate::linalg::{all_finite, jacobi_scale, norm2, sub, CsrMatrix, LinalgError, MatVec};
use crate::Scalar;

/// A map `q: ℝⁿ → ℝⁿ` whose fixed point `x* = q(x*)` is sought.
pub trait FixedPointMap<T: Scalar> {
    fn dimension(&self) -> usize;

    /// Evaluates `q(x)`.
    fn eval(&self, x: &[T]) -> Vec<T>;

    /// Returns `(q(x), q(x) - x)`. Maps with a cheaper or more accurate
    /// closed form for the residual override this.
    fn eval_with_residual(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let qx = self.eval(x);
        let r = sub(&qx, x);
        (qx, r)
    }
}

impl<T: Scalar, M: FixedPointMap<T> + ?Sized> FixedPointMap<T> for &M {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn eval(&self, x: &[T]) -> Vec<T> {
        (**self).eval(x)
    }
    fn eval_with_residual(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        (**self).eval_with_residual(x)
    }
}

/// Wraps a closure as a [`FixedPointMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Scalar, F: Fn(&[T]) -> Vec<T>> FixedPointMap<T> for FnMap<F> {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[T]) -> Vec<T> {
        (self.f)(x)
    }
}

/// `q(x) - x`, with a dimension check.
pub fn residual<T: Scalar, Q: FixedPointMap<T> + ?Sized>(q: &Q, x: &[T]) -> Result<Vec<T>, SolveError> {
    check_dim(q.dimension(), x.len())?;
    Ok(q.eval_with_residual(x).1)
}

/// Richardson iteration `q(x) = (I - A) x + b` for `A x = b`.
///
/// The residual is evaluated as `b - A x` directly.
#[derive(Debug, Clone)]
pub struct RichardsonMap<T> {
    a: CsrMatrix<T>,
    b: Vec<T>,
}

impl<T: Scalar> RichardsonMap<T> {
    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.a
    }

    pub fn rhs(&self) -> &[T] {
        &self.b
    }

    /// `b - A x`
    pub fn linear_residual(&self, x: &[T]) -> Vec<T> {
        let mut ax = vec![T::zero(); self.a.nrows()];
        self.a.mat_vec_into(x, &mut ax);
        self.b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect()
    }

    /// Applies the iteration matrix `M = I - A` to `v`.
    pub fn apply_iteration_matrix(&self, v: &[T]) -> Vec<T> {
        let mut av = vec![T::zero(); self.a.nrows()];
        self.a.mat_vec_into(v, &mut av);
        v.iter().zip(&av).map(|(&vi, &ai)| vi - ai).collect()
    }
}

impl<T: Scalar> FixedPointMap<T> for RichardsonMap<T> {
    fn dimension(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        self.eval_with_residual(x).0
    }

    fn eval_with_residual(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let r = self.linear_residual(x);
        let qx = x.iter().zip(&r).map(|(&xi, &ri)| xi + ri).collect();
        (qx, r)
    }
}

pub fn richardson_map<T: Scalar>(a: CsrMatrix<T>, b: Vec<T>) -> Result<RichardsonMap<T>, LinalgError> {
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
    Ok(RichardsonMap { a, b })
}

/// Jacobi iteration `q(x) = x + D⁻¹(b - A x)`: Richardson on the
/// diagonally scaled system.
pub fn jacobi_map<T: Scalar>(a: &CsrMatrix<T>, b: &[T]) -> Result<RichardsonMap<T>, LinalgError> {
    let (sa, sb) = jacobi_scale(a, b)?;
    richardson_map(sa, sb)
}

/// Stop when `‖r_k‖ ≤ max(rel_tol·‖r₀‖, abs_tol)` or after `max_iters` iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iters: usize,
}

impl StopRule {
    pub fn new(rel_tol: f64, abs_tol: f64, max_iters: usize) -> Result<Self, SolveError> {
        let s = Self {
            rel_tol,
            abs_tol,
            max_iters,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn relative(rel_tol: f64, max_iters: usize) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            max_iters,
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.rel_tol >= 0.0) || !(self.abs_tol >= 0.0) {
            return Err(SolveError::InvalidConfig("tolerances must be nonnegative".into()));
        }
        if self.max_iters == 0 {
            return Err(SolveError::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub fn threshold(&self, r0: f64) -> f64 {
        (self.rel_tol * r0).max(self.abs_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Fp,
    Aa,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Fp => "FP",
            StepKind::Aa => "AA",
        })
    }
}

/// Per-iteration history of a solve.
///
/// `residual_norms[k]` is `‖r(x_k)‖` for `k = 0..=iterations`;
/// `step_kinds[k - 1]` says how `x_k` was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub residual_norms: Vec<f64>,
    pub step_kinds: Vec<StepKind>,
    /// Wall-clock seconds since the start of the solve, one per residual.
    pub elapsed_seconds: Vec<f64>,
    /// Iterations whose least-squares problem was rank-truncated.
    pub truncated_steps: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub elapsed: Duration,
}

impl IterationTrace {
    /// Step kind of row `k` (`None` for the initial guess).
    pub fn step_kind_at(&self, k: usize) -> Option<StepKind> {
        k.checked_sub(1).and_then(|i| self.step_kinds.get(i).copied())
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_norms.last().unwrap_or(&f64::NAN)
    }

    /// True when both traces followed the same path: identical residual bits,
    /// step labels and outcome. Timing is ignored.
    pub fn same_path(&self, other: &Self) -> bool {
        self.iterations == other.iterations
            && self.converged == other.converged
            && self.step_kinds == other.step_kinds
            && self.residual_norms.len() == other.residual_norms.len()
            && self
                .residual_norms
                .iter()
                .zip(&other.residual_norms)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite iterate at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: Box<IterationTrace>,
    },
    #[error("unbounded Anderson window exceeded its hard cap of {cap} columns at iteration {iteration}")]
    WindowCapExceeded {
        cap: usize,
        iteration: usize,
        trace: Box<IterationTrace>,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Anderson(#[from] AndersonError),
}

impl SolveError {
    /// The partial trace carried by divergence and window errors.
    pub fn partial_trace(&self) -> Option<&IterationTrace> {
        match self {
            SolveError::Diverged { trace, .. } | SolveError::WindowCapExceeded { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<(), SolveError> {
    if expected != found {
        return Err(SolveError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Incrementally builds an [`IterationTrace`] and applies the stop rule.
pub(crate) struct Recorder {
    stop: StopRule,
    start: Instant,
    threshold: f64,
    trace: IterationTrace,
}

pub(crate) enum Status {
    Converged,
    Exhausted,
    Continue,
}

impl Recorder {
    pub(crate) fn new(stop: StopRule) -> Self {
        Self {
            stop,
            start: Instant::now(),
            threshold: 0.0,
            trace: IterationTrace {
                residual_norms: Vec::new(),
                step_kinds: Vec::new(),
                elapsed_seconds: Vec::new(),
                truncated_steps: Vec::new(),
                converged: false,
                iterations: 0,
                elapsed: Duration::ZERO,
            },
        }
    }

    /// Index of the iterate whose residual is recorded next.
    pub(crate) fn next_index(&self) -> usize {
        self.trace.residual_norms.len()
    }

    /// Records `‖r(x_k)‖` for the next `k` and reports whether to stop.
    pub(crate) fn record<T: Scalar>(&mut self, r: &[T]) -> Result<Status, SolveError> {
        let k = self.next_index();
        let norm = norm2(r).as_f64();
        if !norm.is_finite() || !all_finite(r) {
            self.trace.iterations = k.saturating_sub(1);
            let trace = self.take();
            return Err(SolveError::Diverged {
                iteration: k,
                trace: Box::new(trace),
            });
        }
        if k == 0 {
            self.threshold = self.stop.threshold(norm);
        }
        self.trace.residual_norms.push(norm);
        self.trace.elapsed_seconds.push(self.start.elapsed().as_secs_f64());
        self.trace.iterations = k;
        if norm <= self.threshold {
            self.trace.converged = true;
            Ok(Status::Converged)
        } else if k >= self.stop.max_iters {
            Ok(Status::Exhausted)
        } else {
            Ok(Status::Continue)
        }
    }

    pub(crate) fn push_kind(&mut self, kind: StepKind) {
        self.trace.step_kinds.push(kind);
    }

    pub(crate) fn mark_truncated(&mut self, k: usize) {
        self.trace.truncated_steps.push(k);
    }

    pub(crate) fn fail_window(&mut self, cap: usize) -> SolveError {
        let iteration = self.next_index();
        SolveError::WindowCapExceeded {
            cap,
            iteration,
            trace: Box::new(self.take()),
        }
    }

    pub(crate) fn finish(mut self) -> IterationTrace {
        self.take()
    }

    fn take(&mut self) -> IterationTrace {
        // a trace ends at the last recorded residual
        self.trace.step_kinds.truncate(self.trace.residual_norms.len().saturating_sub(1));
        self.trace.elapsed = self.start.elapsed();
        std::mem::replace(&mut self.trace, Recorder::new(self.stop).trace)
    }
}

/// Plain fixed-point iteration `x_{k+1} = q(x_k)`.
pub fn fp_solve<T: Scalar, Q: FixedPointMap<T> + ?Sized>(
    q: &Q,
    x0: &[T],
    stop: &StopRule,
) -> Result<(Vec<T>, IterationTrace), SolveError> {
    check_dim(q.dimension(), x0.len())?;
    stop.validate()?;
    let mut rec = Recorder::new(*stop);
    let mut x = x0.to_vec();
    loop {
        let (qx, r) = q.eval_with_residual(&x);
        check_dim(x.len(), qx.len())?;
        match rec.record(&r)? {
            Status::Converged | Status::Exhausted => return Ok((x, rec.finish())),
            Status::Continue => {}
        }
        x = qx;
        rec.push_kind(StepKind::Fp);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    fn diag(values: &[f64]) -> CsrMatrix<f64> {
        let t: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        CsrMatrix::from_triplets(values.len(), values.len(), &t).unwrap()
    }

    #[test]
    fn identity_map_has_zero_residual() {
        let q = FnMap::new(3, |x: &[f64]| x.to_vec());
        assert_eq!(residual(&q, &[1.0, -2.0, 3.0]).unwrap(), vec![0.0; 3]);
        assert!(residual(&q, &[1.0]).is_err());
    }

    #[test]
    fn zero_iteration_matrix_residual() {
        // M = 0 <=> A = I
        let q = richardson_map(CsrMatrix::identity(2), vec![3.0, -1.0]).unwrap();
        assert_eq!(residual(&q, &[1.0, 1.0]).unwrap(), vec![2.0, -2.0]);
        assert_eq!(q.eval(&[7.0, 9.0]), vec![3.0, -1.0]);
        let (x, tr) = fp_solve(&q, &[7.0, 9.0], &StopRule::relative(1e-12, 10)).unwrap();
        assert_eq!(x, vec![3.0, -1.0]);
        assert_eq!(tr.iterations, 1);
    }

    #[test]
    fn permutation_initial_residual() {
        let n = 26;
        let t: Vec<_> = (0..n).map(|j| ((j + 1) % n, j, 1.0)).collect();
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let q = richardson_map(a, b).unwrap();
        let r0: Vec<f64> = residual(&q, &vec![1.0; n]).unwrap();
        assert!((norm2(&r0) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_contraction_halves_residual() {
        let q = FnMap::new(1, |x: &[f64]| vec![0.5 * x[0] + 1.0]);
        let (x, tr) = fp_solve(&q, &[0.0], &StopRule::relative(1e-10, 100)).unwrap();
        assert!(tr.converged);
        assert!((x[0] - 2.0).abs() < 1e-9);
        for w in tr.residual_norms.windows(2) {
            assert_eq!(w[1] / w[0], 0.5);
        }
        assert_eq!(tr.residual_norms.len(), tr.iterations + 1);
        assert_eq!(tr.step_kinds.len(), tr.iterations);
        assert!(tr.step_kinds.iter().all(|&k| k == StepKind::Fp));
    }

    #[test]
    fn reflection_keeps_residual_constant() {
        // A = 2I => M = -I
        let q = richardson_map(diag(&[2.0, 2.0]), vec![1.0, 2.0]).unwrap();
        let (_, tr) = fp_solve(&q, &[0.0, 0.0], &StopRule::relative(1e-8, 20)).unwrap();
        assert!(!tr.converged);
        assert_eq!(tr.iterations, 20);
        let b = 5f64.sqrt();
        assert!(tr.residual_norms.iter().all(|&r| (r - b).abs() < 1e-14));
    }

    #[test]
    fn richardson_residual_is_linear_residual_bitwise() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 0.3), (0, 1, 0.1), (1, 1, 0.7)]).unwrap();
        let q = richardson_map(a.clone(), vec![0.1, 0.2]).unwrap();
        let x = [0.123456789f64, -9.87654321];
        let r = residual(&q, &x).unwrap();
        let ax = crate::linalg::mat_vec(&a, &x).unwrap();
        let want = [0.1 - ax[0], 0.2 - ax[1]];
        assert_eq!(r[0].to_bits(), want[0].to_bits());
        assert_eq!(r[1].to_bits(), want[1].to_bits());
    }

    #[test]
    fn identity_system_converges_in_one_step() {
        let q = richardson_map(CsrMatrix::identity(3), vec![1.0, 2.0, 3.0]).unwrap();
        let (x, tr) = fp_solve(&q, &[5.0, 5.0, 5.0], &StopRule::relative(1e-12, 5)).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        assert_eq!(tr.iterations, 1);
        assert!(tr.converged);
    }

    #[test]
    fn diagonal_jacobi_converges_in_one_step() {
        let q = jacobi_map(&diag(&[2.0, -4.0, 8.0]), &[2.0, 4.0, 4.0]).unwrap();
        let (x, tr) = fp_solve(&q, &[0.3, 0.2, 0.1], &StopRule::relative(1e-12, 5)).unwrap();
        assert_eq!(x, vec![1.0, -1.0, 0.5]);
        assert_eq!(tr.iterations, 1);
    }

    #[test]
    fn non_square_rejected() {
        let a = CsrMatrix::<f64>::zeros(2, 3);
        assert!(richardson_map(a, vec![0.0; 2]).is_err());
    }

    #[test]
    fn divergence_is_reported_with_trace() {
        let q = FnMap::new(1, |x: &[f64]| vec![x[0] * 1e200 + 1.0]);
        let err = fp_solve(&q, &[1.0], &StopRule::relative(1e-12, 100)).unwrap_err();
        match err {
            SolveError::Diverged { trace, .. } => {
                assert!(!trace.residual_norms.is_empty());
                assert!(trace.residual_norms.iter().all(|r| r.is_finite()));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn stop_rule_validation() {
        assert!(StopRule::new(1e-8, 0.0, 0).is_err());
        assert!(StopRule::new(-1.0, 0.0, 10).is_err());
        let s = StopRule::new(1e-8, 1e-3, 10).unwrap();
        assert_eq!(s.threshold(1.0), 1e-3);
        assert_eq!(s.threshold(1e6), 1e-2);
    }
}
