//! Experiment runner for alternating Anderson acceleration.
//!
//! Configurations come from `key = value` files and command-line flags
//! (flags win). Runs produce an [`aafp_core::IterationTrace`]-like
//! [`RunTrace`] that is written as CSV with the columns
//! `iteration,step_kind,residual_norm,elapsed_seconds`.

use std::io;

use thiserror::Error;

use aafp_core::linalg::MatrixMarketError;
use aafp_core::problems::{LibsvmError, ProblemError};
use aafp_core::{GmresError, LinalgError, SolveError};

pub mod alignment;
pub mod config;
pub mod experiment;
pub mod race;

pub use alignment::{check_alignment, AlignmentCheck, AlignmentReport};
pub use config::{ExperimentConfig, InitialGuess, ProblemConfig, SolverConfig};
pub use experiment::{build_instance, initial_guess, run_experiment, solve, Instance, RunTrace};
pub use race::{race, race_csv, race_table, RaceEntry};

/// Exit code for a converged run.
pub const EXIT_CONVERGED: i32 = 0;
/// Exit code for a run that hit `max_iters` or diverged.
pub const EXIT_NOT_CONVERGED: i32 = 2;
/// Exit code for an invalid configuration.
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    MatrixMarket(#[from] MatrixMarketError),
    #[error(transparent)]
    Libsvm(#[from] LibsvmError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Gmres(#[from] GmresError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl CliError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::Problem(_)
            | CliError::Gmres(GmresError::InvalidConfig(_) | GmresError::NotSquare { .. } | GmresError::DimensionMismatch { .. })
            | CliError::Solve(
                SolveError::InvalidConfig(_) | SolveError::WindowCapExceeded { .. } | SolveError::DimensionMismatch { .. },
            ) => EXIT_CONFIG,
            CliError::Solve(SolveError::Diverged { .. }) | CliError::Gmres(_) => EXIT_NOT_CONVERGED,
            _ => 1,
        }
    }
}
