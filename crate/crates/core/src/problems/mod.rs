//! Model problems used by the experiments.
//!
//! * [`linear`]: the cyclic permutation system and a finite-difference
//!   Poisson problem;
//! * [`prox`] and [`admm`]: ADMM for total variation denoising, lasso and
//!   nonnegative least squares, written as fixed-point maps on `[y, λ̄]`;
//! * [`logistic`]: regularized logistic regression by gradient descent and a
//!   LIBSVM reader;
//! * [`rng`]: the seeded generator behind every random instance.

pub mod admm;
pub mod linear;
pub mod logistic;
pub mod prox;
pub mod rng;

pub use admm::{
    lasso_admm_map, nnls_admm_map, tv_admm_map, AdmmMap, AdmmSplitting, AdmmState, AdmmSweep, Feasibility, LassoSplitting,
    NnlsSplitting, TvSplitting,
};
pub use linear::{build_permutation_system, build_poisson_fd, PoissonProblem};
pub use logistic::{
    gd_map, logistic_gradient, logistic_objective, parse_libsvm, parse_libsvm_reader, GdMap, LibsvmData, LibsvmError,
    LogisticDataset,
};
pub use prox::{project_nonneg, soft_threshold};
pub use rng::{rng_normal, sparse_random, SeededRng};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
