//! Alternating Anderson acceleration for fixed-point iterations.
//!
//! The crate provides
//!
//! * [`fixedpoint`]: the [`FixedPointMap`] abstraction, stop rules, traces and
//!   the plain fixed-point driver, plus Richardson/Jacobi maps for `Ax = b`;
//! * [`anderson`] and [`alternating`]: windowed Anderson acceleration AA(m)
//!   and its periodic interleaving with plain steps, aAA(m)[s]–FP[t];
//! * [`gmres`]: a full GMRES baseline with residual history;
//! * [`bounds`]: Chebyshev-based convergence constants;
//! * [`problems`]: model problems (permutation, Poisson, ADMM, logistic
//!   regression) and their data formats.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`).
//!
//! ```
//! use aafp_core::{aafp_solve, FnMap, ScheduleConfig, StopRule, Window};
//!
//! let q = FnMap::new(1, |x: &[f64]| vec![x[0].cos()]);
//! let cfg = ScheduleConfig::new(Window::Bounded(2), 1, 1).unwrap();
//! let (x, trace) = aafp_solve(&q, &[1.0], &cfg, &StopRule::relative(1e-12, 100)).unwrap();
//! assert!(trace.converged);
//! assert!((x[0] - x[0].cos()).abs() < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod alternating;
pub mod anderson;
pub mod bounds;
pub mod fixedpoint;
pub mod gmres;
pub mod linalg;
pub mod problems;
mod scalar;

pub use alternating::{aafp_solve, step_kind, ScheduleConfig};
pub use anderson::{aa_solve, aa_step_gamma, aa_step_tau, AaStepReport, AndersonError, AndersonHistory, Window};
pub use fixedpoint::{
    fp_solve, jacobi_map, residual, richardson_map, FixedPointMap, FnMap, IterationTrace, RichardsonMap, SolveError,
    StepKind, StopRule,
};
pub use gmres::{gmres_solve, GmresError, GmresResult};
pub use linalg::{CsrMatrix, DenseMatrix, LinalgError};
pub use scalar::Scalar;

pub type CsrMatrixF64 = CsrMatrix<f64>;
pub type CsrMatrixF32 = CsrMatrix<f32>;
pub type DenseMatrixF64 = DenseMatrix<f64>;
pub type DenseMatrixF32 = DenseMatrix<f32>;
pub type RichardsonMapF64 = RichardsonMap<f64>;
pub type RichardsonMapF32 = RichardsonMap<f32>;
pub type AndersonHistoryF64 = AndersonHistory<f64>;
pub type GmresResultF64 = GmresResult<f64>;
