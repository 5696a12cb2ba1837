//! Alternating Anderson acceleration aAA(m)[s]–FP[t].
//!
//! After the start `x₁ = q(x₀)`, every period of `p = s + t` iterations
//! consists of `t` plain fixed-point steps followed by `s` Anderson steps.
//! The history window is updated on every iteration, FP steps included.

use crate::anderson::{aa_step_gamma, AndersonError, AndersonHistory, Window};
use crate::fixedpoint::{check_dim, FixedPointMap, IterationTrace, Recorder, SolveError, Status, StepKind, StopRule};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::Scalar;

/// The schedule `(m, s, t)` plus the least-squares rank tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig {
    pub window: Window,
    /// Anderson steps per period, at least 1.
    pub s: usize,
    /// Fixed-point steps per period.
    pub t: usize,
    pub rank_tol: f64,
}

impl ScheduleConfig {
    pub fn new(window: Window, s: usize, t: usize) -> Result<Self, SolveError> {
        let cfg = Self {
            window,
            s,
            t,
            rank_tol: DEFAULT_RANK_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if self.s == 0 {
            return Err(SolveError::InvalidConfig("s must be at least 1".into()));
        }
        if !(self.rank_tol > 0.0) || !self.rank_tol.is_finite() {
            return Err(SolveError::InvalidConfig("rank_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.s + self.t
    }
}

/// Kind of step that produces `x_k` for `k ≥ 2`: FP iff `(k-1) mod (s+t) < t`.
///
/// `k = 1` (and `k = 0`, for convenience) is always FP.
pub fn step_kind(k: usize, s: usize, t: usize) -> StepKind {
    if k < 2 || (k - 1) % (s + t) < t {
        StepKind::Fp
    } else {
        StepKind::Aa
    }
}

/// Runs aAA(m)[s]–FP[t] from `x0`.
///
/// Returns the first iterate whose residual satisfies `stop`, or the last
/// iterate once `max_iters` is reached. An Anderson step with an empty
/// difference window (`m = 0`) is a plain FP step and is labelled as such.
pub fn aafp_solve<T: Scalar, Q: FixedPointMap<T> + ?Sized>(
    q: &Q,
    x0: &[T],
    cfg: &ScheduleConfig,
    stop: &StopRule,
) -> Result<(Vec<T>, IterationTrace), SolveError> {
    let n = q.dimension();
    check_dim(n, x0.len())?;
    stop.validate()?;
    cfg.validate()?;
    let rank_tol = T::lit(cfg.rank_tol).max(T::epsilon());

    let mut rec = Recorder::new(*stop);
    let mut history = AndersonHistory::new(cfg.window, n);
    let mut x = x0.to_vec();
    loop {
        let (q_bar, r) = q.eval_with_residual(&x);
        check_dim(n, q_bar.len())?;
        match rec.record(&r)? {
            Status::Converged | Status::Exhausted => return Ok((x, rec.finish())),
            Status::Continue => {}
        }
        let k = rec.next_index();
        match history.push(q_bar, r) {
            Ok(()) => {}
            Err(AndersonError::WindowCapExceeded { cap }) => return Err(rec.fail_window(cap)),
            Err(e) => return Err(e.into()),
        }

        if step_kind(k, cfg.s, cfg.t) == StepKind::Fp || history.depth() == 0 {
            x = history.q_values().next().expect("just pushed").to_vec();
            rec.push_kind(StepKind::Fp);
        } else {
            let (x_next, report) = aa_step_gamma(&history, rank_tol)?;
            if report.truncated {
                rec.mark_truncated(k);
            }
            x = x_next;
            rec.push_kind(StepKind::Aa);
        }
    }
}
