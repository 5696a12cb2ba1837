//! Windowed Anderson acceleration AA(m).
//!
//! [`AndersonHistory`] keeps the most recent fixed-point evaluations
//! `q̄_k, q̄_{k-1}, …` and residuals `r_k, r_{k-1}, …` newest first. An AA step
//! minimizes `‖r_k + B_k γ‖` over the difference columns and returns
//! `q̄_k + C_k γ`. Two equivalent parameterizations are provided:
//!
//! * [`aa_step_gamma`]: columns `r_k - r_{k-i}` and `q̄_k - q̄_{k-i}`,
//! * [`aa_step_tau`]: consecutive differences `r_{k-i+1} - r_{k-i}`.
//!
//! In exact arithmetic they give the same iterate with
//! `τ_j = Σ_{i≥j} γ_i`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::alternating::{aafp_solve, ScheduleConfig};
use crate::fixedpoint::{FixedPointMap, IterationTrace, SolveError, StopRule};
use crate::linalg::{axpy, least_squares_columns, norm2, sub, DEFAULT_RANK_TOL};
use crate::Scalar;

/// Anderson window size `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Bounded(usize),
    /// `m = ∞`, limited to `hard_cap` difference columns; exceeding the
    /// cap is an error, never a silent restart.
    Unbounded { hard_cap: usize },
}

impl Window {
    pub const DEFAULT_HARD_CAP: usize = 500;

    pub fn unbounded() -> Self {
        Window::Unbounded {
            hard_cap: Self::DEFAULT_HARD_CAP,
        }
    }

    /// Largest number of difference columns the window may hold.
    pub fn max_columns(&self) -> usize {
        match *self {
            Window::Bounded(m) => m,
            Window::Unbounded { hard_cap } => hard_cap,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Window::Unbounded { .. })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Bounded(m) => write!(f, "{m}"),
            Window::Unbounded { .. } => f.write_str("inf"),
        }
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "infinity" | "∞" => Ok(Window::unbounded()),
            other => other
                .parse::<usize>()
                .map(Window::Bounded)
                .map_err(|_| format!("invalid window size `{other}` (expected an integer or `inf`)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AndersonError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unbounded window exceeded its hard cap of {cap} columns")]
    WindowCapExceeded { cap: usize },
    #[error("Anderson step requested on an empty history")]
    EmptyHistory,
    #[error("rank tolerance must be positive")]
    InvalidRankTol,
}

/// Sliding window of fixed-point evaluations and residuals, newest first.
#[derive(Debug, Clone)]
pub struct AndersonHistory<T> {
    window: Window,
    dim: usize,
    q_values: VecDeque<Vec<T>>,
    residuals: VecDeque<Vec<T>>,
}

impl<T: Scalar> AndersonHistory<T> {
    pub fn new(window: Window, dim: usize) -> Self {
        Self {
            window,
            dim,
            q_values: VecDeque::new(),
            residuals: VecDeque::new(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored pairs (`m_k + 1`).
    pub fn len(&self) -> usize {
        self.q_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_values.is_empty()
    }

    /// Number of difference columns an AA step would use (`m_k`).
    pub fn depth(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn q_values(&self) -> impl Iterator<Item = &[T]> {
        self.q_values.iter().map(Vec::as_slice)
    }

    pub fn residuals(&self) -> impl Iterator<Item = &[T]> {
        self.residuals.iter().map(Vec::as_slice)
    }

    /// Pushes the newest pair to the front, dropping the oldest once more
    /// than `m + 1` pairs are held.
    pub fn push(&mut self, q_val: Vec<T>, r_val: Vec<T>) -> Result<(), AndersonError> {
        for v in [&q_val, &r_val] {
            if v.len() != self.dim {
                return Err(AndersonError::DimensionMismatch {
                    expected: self.dim,
                    found: v.len(),
                });
            }
        }
        match self.window {
            Window::Bounded(m) => {
                self.q_values.push_front(q_val);
                self.residuals.push_front(r_val);
                self.q_values.truncate(m + 1);
                self.residuals.truncate(m + 1);
            }
            Window::Unbounded { hard_cap } => {
                if self.len() > hard_cap {
                    return Err(AndersonError::WindowCapExceeded { cap: hard_cap });
                }
                self.q_values.push_front(q_val);
                self.residuals.push_front(r_val);
            }
        }
        Ok(())
    }

    pub fn clear(&mut self) {
        self.q_values.clear();
        self.residuals.clear();
    }
}

/// Diagnostics of one Anderson step.
#[derive(Debug, Clone, PartialEq)]
pub struct AaStepReport<T> {
    /// Least-squares coefficients: γ for [`aa_step_gamma`], τ for [`aa_step_tau`].
    pub coefficients: Vec<T>,
    /// `‖r_k + B_k γ‖`, never larger than `‖r_k‖`.
    pub ls_residual_norm: T,
    pub numerical_rank: usize,
    pub truncated: bool,
}

fn newest<T: Scalar>(h: &AndersonHistory<T>, rank_tol: T) -> Result<(&[T], &[T]), AndersonError> {
    if !(rank_tol > T::zero()) {
        return Err(AndersonError::InvalidRankTol);
    }
    match (h.q_values.front(), h.residuals.front()) {
        (Some(q), Some(r)) => Ok((q, r)),
        _ => Err(AndersonError::EmptyHistory),
    }
}

fn plain_step<T: Scalar>(q: &[T], r: &[T]) -> (Vec<T>, AaStepReport<T>) {
    (
        q.to_vec(),
        AaStepReport {
            coefficients: Vec::new(),
            ls_residual_norm: norm2(r),
            numerical_rank: 0,
            truncated: false,
        },
    )
}

/// Solves the least-squares problem over `b_cols` and assembles
/// `q_k + Σ c_i e_cols[i]`.
fn combine<T: Scalar>(
    q_k: &[T],
    r_k: &[T],
    b_cols: Vec<Vec<T>>,
    e_cols: &[Vec<T>],
    rank_tol: T,
) -> (Vec<T>, AaStepReport<T>) {
    let ls = least_squares_columns(b_cols.clone(), r_k, rank_tol);
    let mut fitted = r_k.to_vec();
    let mut x = q_k.to_vec();
    for ((c, bc), ec) in ls.coefficients.iter().zip(&b_cols).zip(e_cols) {
        if *c != T::zero() {
            axpy(*c, bc, &mut fitted);
            axpy(*c, ec, &mut x);
        }
    }
    let report = AaStepReport {
        ls_residual_norm: norm2(&fitted),
        coefficients: ls.coefficients,
        numerical_rank: ls.numerical_rank,
        truncated: ls.truncated,
    };
    (x, report)
}

/// Anderson step in the γ-form.
///
/// With `m_k = 0` this is the plain fixed-point step `q̄_k`.
pub fn aa_step_gamma<T: Scalar>(
    history: &AndersonHistory<T>,
    rank_tol: T,
) -> Result<(Vec<T>, AaStepReport<T>), AndersonError> {
    let (q_k, r_k) = newest(history, rank_tol)?;
    let mk = history.depth();
    if mk == 0 {
        return Ok(plain_step(q_k, r_k));
    }
    let b_cols: Vec<Vec<T>> = history.residuals.iter().skip(1).map(|r| sub(r_k, r)).collect();
    let c_cols: Vec<Vec<T>> = history.q_values.iter().skip(1).map(|q| sub(q_k, q)).collect();
    Ok(combine(q_k, r_k, b_cols, &c_cols, rank_tol))
}

/// Anderson step in the τ-form (consecutive differences).
pub fn aa_step_tau<T: Scalar>(
    history: &AndersonHistory<T>,
    rank_tol: T,
) -> Result<(Vec<T>, AaStepReport<T>), AndersonError> {
    let (q_k, r_k) = newest(history, rank_tol)?;
    let mk = history.depth();
    if mk == 0 {
        return Ok(plain_step(q_k, r_k));
    }
    let d_cols: Vec<Vec<T>> = (1..=mk)
        .map(|i| sub(&history.residuals[i - 1], &history.residuals[i]))
        .collect();
    let e_cols: Vec<Vec<T>> = (1..=mk)
        .map(|i| sub(&history.q_values[i - 1], &history.q_values[i]))
        .collect();
    Ok(combine(q_k, r_k, d_cols, &e_cols, rank_tol))
}

/// AA(m) driver: `x₁ = q(x₀)`, then an Anderson step every iteration.
///
/// `Window::Bounded(0)` reproduces [`fp_solve`](crate::fixedpoint::fp_solve)
/// exactly.
pub fn aa_solve<T: Scalar, Q: FixedPointMap<T> + ?Sized>(
    q: &Q,
    x0: &[T],
    window: Window,
    stop: &StopRule,
) -> Result<(Vec<T>, IterationTrace), SolveError> {
    let cfg = ScheduleConfig {
        window,
        s: 1,
        t: 0,
        rank_tol: DEFAULT_RANK_TOL,
    };
    aafp_solve(q, x0, &cfg, stop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::{fp_solve, richardson_map, FnMap, StepKind};
    use crate::linalg::CsrMatrix;
    use proptest::prelude::*;

    fn history_from(pairs: &[(Vec<f64>, Vec<f64>)], window: Window) -> AndersonHistory<f64> {
        let mut h = AndersonHistory::new(window, pairs[0].0.len());
        for (q, r) in pairs {
            h.push(q.clone(), r.clone()).unwrap();
        }
        h
    }

    #[test]
    fn bounded_window_is_fifo() {
        let mut h = AndersonHistory::new(Window::Bounded(1), 1);
        for v in [1.0, 2.0, 3.0] {
            h.push(vec![v], vec![v]).unwrap();
        }
        let q: Vec<_> = h.q_values().map(|v| v[0]).collect();
        assert_eq!(q, vec![3.0, 2.0]);

        let mut h = AndersonHistory::new(Window::Bounded(3), 1);
        for v in 0..5 {
            h.push(vec![v as f64], vec![0.0]).unwrap();
        }
        assert_eq!(h.len(), 4);
        assert_eq!(h.depth(), 3);
        assert_eq!(h.q_values().next().unwrap(), &[4.0]);
    }

    #[test]
    fn unbounded_window_keeps_everything_until_cap() {
        let mut h = AndersonHistory::new(Window::unbounded(), 1);
        for v in 0..40 {
            h.push(vec![v as f64], vec![0.0]).unwrap();
        }
        assert_eq!(h.len(), 40);

        let mut h = AndersonHistory::new(Window::Unbounded { hard_cap: 2 }, 1);
        for v in 0..3 {
            h.push(vec![v as f64], vec![0.0]).unwrap();
        }
        assert_eq!(
            h.push(vec![9.0], vec![0.0]),
            Err(AndersonError::WindowCapExceeded { cap: 2 })
        );
    }

    #[test]
    fn push_checks_dimension() {
        let mut h = AndersonHistory::<f64>::new(Window::Bounded(2), 2);
        assert!(h.push(vec![1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn window_parsing() {
        assert_eq!("inf".parse::<Window>().unwrap(), Window::unbounded());
        assert_eq!("5".parse::<Window>().unwrap(), Window::Bounded(5));
        assert!("-1".parse::<Window>().is_err());
        assert_eq!(Window::unbounded().to_string(), "inf");
    }

    #[test]
    fn scalar_linear_map_solved_by_one_secant_step() {
        // q(x) = 0.5 x + 1, fixed point 2
        let q = |x: f64| 0.5 * x + 1.0;
        let (x0, x1) = (-3.0, 7.5);
        let h = history_from(
            &[(vec![q(x0)], vec![q(x0) - x0]), (vec![q(x1)], vec![q(x1) - x1])],
            Window::Bounded(1),
        );
        let (x, rep) = aa_step_gamma(&h, 1e-14).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!(rep.ls_residual_norm < 1e-14);
    }

    #[test]
    fn stagnated_window_falls_back_to_fp() {
        let h = history_from(
            &[(vec![1.0, 2.0], vec![0.5, 0.5]), (vec![3.0, 4.0], vec![0.5, 0.5])],
            Window::Bounded(1),
        );
        let (x, rep) = aa_step_gamma(&h, 1e-14).unwrap();
        assert_eq!(x, vec![3.0, 4.0]);
        assert!(rep.truncated);
        assert_eq!(rep.coefficients, vec![0.0]);
    }

    #[test]
    fn two_dimensional_linear_system_exact_after_two_fp_steps() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.5), (1, 1, 3.0)]).unwrap();
        let q = richardson_map(a, vec![1.0, 1.0]).unwrap();
        let mut h = AndersonHistory::new(Window::Bounded(2), 2);
        let mut x = vec![0.0f64, 0.0];
        for _ in 0..3 {
            let (qx, r) = q.eval_with_residual(&x);
            h.push(qx.clone(), r).unwrap();
            x = qx;
        }
        let (x_next, _) = aa_step_gamma(&h, 1e-14).unwrap();
        assert!((x_next[0] - 1.0 / 1.5).abs() < 1e-12);
        assert!((x_next[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tau_equals_gamma_for_single_column() {
        let h = history_from(
            &[(vec![1.0, 0.0, 2.0], vec![0.3, -0.1, 0.7]), (vec![0.5, 1.0, 1.0], vec![0.1, 0.4, -0.2])],
            Window::Bounded(1),
        );
        let (xg, rg) = aa_step_gamma(&h, 1e-14).unwrap();
        let (xt, rt) = aa_step_tau(&h, 1e-14).unwrap();
        assert_eq!(rg.coefficients, rt.coefficients);
        assert_eq!(xg, xt);
    }

    #[test]
    fn empty_history_is_an_error() {
        let h = AndersonHistory::<f64>::new(Window::Bounded(2), 2);
        assert_eq!(aa_step_gamma(&h, 1e-14).unwrap_err(), AndersonError::EmptyHistory);
    }

    #[test]
    fn aa0_reproduces_fp_bitwise() {
        let q = FnMap::new(3, |x: &[f64]| {
            vec![0.3 * x[1].sin() + 0.1, 0.5 * x[0] - 0.2 * x[2], 0.25 * (x[0] + x[1]).cos()]
        });
        let stop = StopRule::relative(1e-12, 200);
        let (xa, ta) = aa_solve(&q, &[1.0, 2.0, 3.0], Window::Bounded(0), &stop).unwrap();
        let (xf, tf) = fp_solve(&q, &[1.0, 2.0, 3.0], &stop).unwrap();
        assert_eq!(xa, xf);
        assert!(ta.same_path(&tf));
    }

    #[test]
    fn aa_labels_and_contraction() {
        let d = [0.9, -0.7, 0.5, 0.2, -0.85];
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, 1.0 - v)).collect();
        let q = richardson_map(CsrMatrix::from_triplets(5, 5, &t).unwrap(), vec![1.0; 5]).unwrap();
        let (_, tr) = aa_solve(&q, &[0.0; 5], Window::Bounded(2), &StopRule::relative(1e-12, 100)).unwrap();
        assert!(tr.converged);
        assert_eq!(tr.step_kinds[0], StepKind::Fp);
        assert!(tr.step_kinds[1..].iter().all(|&k| k == StepKind::Aa));
        for w in tr.residual_norms.windows(2) {
            assert!(w[1] <= 0.9 * w[0] + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn ls_never_worse_than_fp(
            dim in 2usize..8,
            depth in 1usize..4,
            seed in prop::collection::vec(-1.0f64..1.0, 80),
        ) {
            let mut it = seed.iter().cycle().copied();
            let pairs: Vec<_> = (0..=depth)
                .map(|_| {
                    let q: Vec<f64> = (0..dim).map(|_| it.next().unwrap()).collect();
                    let r: Vec<f64> = (0..dim).map(|_| it.next().unwrap() * 0.7).collect();
                    (q, r)
                })
                .collect();
            let h = history_from(&pairs, Window::Bounded(depth));
            let r_k = h.residuals().next().unwrap().to_vec();
            let (_, rep) = aa_step_gamma(&h, 1e-14).unwrap();
            prop_assert!(rep.ls_residual_norm <= norm2(&r_k) * (1.0 + 1e-12));
            prop_assert_eq!(rep.coefficients.len(), depth);
        }
    }
}
