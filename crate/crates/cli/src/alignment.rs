//! Side-by-side runs of aAA(∞)[1]–FP[t] and GMRES on a linear problem.
//!
//! After every period `p = t + 1` the Anderson residual `r_{jp}` should
//! have the norm of `M r^G_{jp-1}`, where `r^G_k` is the GMRES residual
//! at step `k` and `M = I - A` is the iteration matrix.

use aafp_core::linalg::norm2;
use aafp_core::{aafp_solve, gmres_solve, RichardsonMap, ScheduleConfig, StopRule, Window};

use crate::CliError;

/// GMRES residuals at or below this fraction of `‖r₀‖` are not compared.
pub const RELATIVE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentCheck {
    /// Iteration index `jp`.
    pub index: usize,
    pub anderson_norm: f64,
    /// `‖M r^G_{jp-1}‖`.
    pub predicted_norm: f64,
    pub relative_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    pub t: usize,
    pub period: usize,
    pub checks: Vec<AlignmentCheck>,
    pub anderson_iterations: usize,
    pub anderson_converged: bool,
    pub gmres_iterations: usize,
}

impl AlignmentReport {
    pub fn max_mismatch(&self) -> f64 {
        self.checks.iter().map(|c| c.relative_mismatch).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "t = {}, period {}: aAA {} iterations ({}), GMRES {} iterations\n{:>6} {:>14} {:>14} {:>11}\n",
            self.t,
            self.period,
            self.anderson_iterations,
            if self.anderson_converged { "converged" } else { "not converged" },
            self.gmres_iterations,
            "k",
            "||r_k||",
            "||M r^G||",
            "mismatch"
        );
        for c in &self.checks {
            s.push_str(&format!(
                "{:>6} {:>14.6e} {:>14.6e} {:>11.3e}\n",
                c.index, c.anderson_norm, c.predicted_norm, c.relative_mismatch
            ));
        }
        s.push_str(&format!("max relative mismatch {:.3e} over {} checks\n", self.max_mismatch(), self.checks.len()));
        s
    }
}

/// Compares the two runs at every multiple of `p = t + 1` for as long as the
/// GMRES residuals decrease strictly and stay above [`RELATIVE_FLOOR`].
pub fn check_alignment(q: &RichardsonMap<f64>, x0: &[f64], t: usize, stop: &StopRule) -> Result<AlignmentReport, CliError> {
    let cfg = ScheduleConfig::new(Window::unbounded(), 1, t)?;
    let (_, trace) = aafp_solve(q, x0, &cfg, stop)?;
    let gstop = StopRule::relative(stop.rel_tol.min(1e-12), stop.max_iters);
    let g = gmres_solve(q.matrix(), q.rhs(), x0, &gstop, true)?;
    let iterates = g.iterates.as_deref().unwrap_or_default();

    let p = t + 1;
    let r0 = g.residual_norms[0];
    let mut checks = Vec::new();
    let mut k = p;
    while k <= trace.iterations && k <= iterates.len() {
        let prev = k - 1;
        if (1..=prev).any(|i| g.residual_norms[i] >= g.residual_norms[i - 1]) {
            break;
        }
        let rg = q.linear_residual(&iterates[prev]);
        if norm2(&rg) <= RELATIVE_FLOOR * r0 {
            break;
        }
        let predicted = norm2(&q.apply_iteration_matrix(&rg));
        let actual = trace.residual_norms[k];
        checks.push(AlignmentCheck {
            index: k,
            anderson_norm: actual,
            predicted_norm: predicted,
            relative_mismatch: (actual - predicted).abs() / predicted,
        });
        k += p;
    }
    Ok(AlignmentReport {
        t,
        period: p,
        checks,
        anderson_iterations: trace.iterations,
        anderson_converged: trace.converged,
        gmres_iterations: g.iterations,
    })
}
