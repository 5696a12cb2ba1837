//! Problem construction, solver dispatch and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use aafp_core::linalg::{mat_vec, read_matrix_market, MatVec};
use aafp_core::problems::{
    build_permutation_system, build_poisson_fd, gd_map, lasso_admm_map, nnls_admm_map, parse_libsvm, rng_normal,
    sparse_random, tv_admm_map, AdmmMap, GdMap, LassoSplitting, LogisticDataset, NnlsSplitting, SeededRng,
    TvSplitting,
};
use aafp_core::{
    aa_solve, aafp_solve, fp_solve, gmres_solve, jacobi_map, richardson_map, FixedPointMap, IterationTrace,
    RichardsonMap, SolveError, StopRule,
};

use crate::config::{ExperimentConfig, InitialGuess, ProblemConfig, SolverConfig};
use crate::CliError;

/// A constructed problem, ready to be handed to a solver.
pub enum Instance {
    /// Richardson (or Jacobi, after scaling) iteration on `A x = b`.
    Linear(RichardsonMap<f64>),
    Lasso(AdmmMap<LassoSplitting<f64>>),
    Nnls(AdmmMap<NnlsSplitting<f64>>),
    Tv(AdmmMap<TvSplitting<f64>>),
    Logistic(GdMap<f64>),
}

impl Instance {
    pub fn map(&self) -> &(dyn FixedPointMap<f64> + Sync) {
        match self {
            Instance::Linear(q) => q,
            Instance::Lasso(q) => q,
            Instance::Nnls(q) => q,
            Instance::Tv(q) => q,
            Instance::Logistic(q) => q,
        }
    }

    pub fn dimension(&self) -> usize {
        self.map().dimension()
    }

    pub fn linear(&self) -> Option<&RichardsonMap<f64>> {
        match self {
            Instance::Linear(q) => Some(q),
            _ => None,
        }
    }
}

fn random_admm_data(seed: u64, n1: usize, n2: usize, density: f64) -> Result<(aafp_core::CsrMatrix<f64>, Vec<f64>), CliError> {
    let mut rng = SeededRng::new(seed);
    let c = sparse_random(&mut rng, n1, n2, density)?;
    let x_hat = rng_normal(&mut rng, n1);
    Ok((c, x_hat))
}

/// Builds the problem described by `problem`; random data is drawn from `seed`.
pub fn build_instance(problem: &ProblemConfig, seed: u64) -> Result<Instance, CliError> {
    Ok(match problem {
        ProblemConfig::Permutation { n } => {
            let (a, b) = build_permutation_system(*n)?;
            Instance::Linear(richardson_map(a, b)?)
        }
        ProblemConfig::Poisson { grid } => {
            let p = build_poisson_fd(*grid)?;
            Instance::Linear(jacobi_map(&p.matrix, &p.rhs)?)
        }
        ProblemConfig::MatrixMarket { path } => {
            let a = read_matrix_market::<f64>(path)?;
            if a.nrows() != a.ncols() {
                return Err(CliError::config(format!(
                    "{} is not square ({}x{})",
                    path.display(),
                    a.nrows(),
                    a.ncols()
                )));
            }
            let b = mat_vec(&a, &vec![1.0; a.ncols()])?;
            Instance::Linear(jacobi_map(&a, &b)?)
        }
        ProblemConfig::Lasso {
            n1,
            n2,
            density,
            beta,
            mu,
        } => {
            let (c, x_hat) = random_admm_data(seed, *n1, *n2, *density)?;
            Instance::Lasso(lasso_admm_map(&c, &x_hat, *beta, *mu)?)
        }
        ProblemConfig::Nnls { n1, n2, density, mu } => {
            let (c, x_hat) = random_admm_data(seed, *n1, *n2, *density)?;
            Instance::Nnls(nnls_admm_map(&c, &x_hat, *mu)?)
        }
        ProblemConfig::Tv { n, beta_factor, mu } => {
            let x_hat: Vec<f64> = rng_normal(&mut SeededRng::new(seed), *n);
            let inf_norm = x_hat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Instance::Tv(tv_admm_map(x_hat, beta_factor * inf_norm, *mu)?)
        }
        ProblemConfig::Logistic {
            data,
            n1,
            n2,
            density,
            beta,
            eta,
        } => {
            let dataset = match data {
                Some(path) => LogisticDataset::from_libsvm(parse_libsvm(path)?, *beta, *eta)?,
                None => {
                    let mut rng = SeededRng::new(seed);
                    let c = sparse_random(&mut rng, *n1, *n2, *density)?;
                    let labels = (0..*n1).map(|_| if rng.uniform() < 0.5 { 1.0 } else { -1.0 }).collect();
                    LogisticDataset::new(c, labels, *beta, *eta)?
                }
            };
            Instance::Logistic(gd_map(dataset))
        }
    })
}

/// The starting vector for `instance`.
pub fn initial_guess(instance: &Instance, x0: InitialGuess, seed: u64) -> Vec<f64> {
    let n = instance.dimension();
    match x0 {
        InitialGuess::Zeros => vec![0.0; n],
        InitialGuess::Ones => vec![1.0; n],
        InitialGuess::Random => rng_normal(&mut SeededRng::new(seed), n),
    }
}

/// Residual history of one run, one row per iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub solver: String,
    /// `x0` for the initial guess, then `FP`, `AA` or `GMRES`.
    pub labels: Vec<&'static str>,
    pub residual_norms: Vec<f64>,
    /// Seconds since the start of the solve; `None` where the solver does
    /// not observe the iterate (GMRES forms only its final iterate).
    pub elapsed_seconds: Vec<Option<f64>>,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the solve stopped on a non-finite residual.
    pub diverged: bool,
    pub solution: Vec<f64>,
}

impl RunTrace {
    fn from_trace(solver: String, t: IterationTrace, solution: Vec<f64>, diverged: bool) -> Self {
        let mut labels = vec!["x0"];
        labels.extend(t.step_kinds.iter().map(|k| match k {
            aafp_core::StepKind::Fp => "FP",
            aafp_core::StepKind::Aa => "AA",
        }));
        labels.truncate(t.residual_norms.len());
        let mut elapsed: Vec<Option<f64>> = t.elapsed_seconds.iter().copied().map(Some).collect();
        elapsed.resize(t.residual_norms.len(), None);
        Self {
            solver,
            labels,
            residual_norms: t.residual_norms,
            elapsed_seconds: elapsed,
            converged: t.converged,
            iterations: t.iterations,
            diverged,
            solution,
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_norms.last().copied().unwrap_or(f64::NAN)
    }

    /// Iteration count with a trailing `†` when the run did not converge.
    pub fn outcome(&self) -> String {
        if self.converged {
            self.iterations.to_string()
        } else {
            format!("{}†", self.iterations)
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.converged {
            crate::EXIT_CONVERGED
        } else {
            crate::EXIT_NOT_CONVERGED
        }
    }

    /// CSV with one row per iterate; `timing = false` writes `0` for every
    /// elapsed time so repeated runs are byte-identical.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from("iteration,step_kind,residual_norm,elapsed_seconds\n");
        for (k, (label, r)) in self.labels.iter().zip(&self.residual_norms).enumerate() {
            let t = match (timing, self.elapsed_seconds.get(k).copied().flatten()) {
                (false, _) => "0".to_string(),
                (true, Some(s)) => format!("{s:.9}"),
                (true, None) => String::new(),
            };
            let _ = writeln!(out, "{k},{label},{r:e},{t}");
        }
        out
    }
}

/// Runs `solver` on `instance` from `x0`.
///
/// Divergence is reported as a non-converged trace; every other solver
/// error is returned.
pub fn solve(instance: &Instance, solver: &SolverConfig, x0: &[f64], stop: &StopRule) -> Result<RunTrace, CliError> {
    let name = solver.to_string();
    let q = instance.map();
    let result = match solver {
        SolverConfig::Fp => fp_solve(q, x0, stop),
        SolverConfig::Aa { window } => aa_solve(q, x0, *window, stop),
        SolverConfig::Aafp(cfg) => aafp_solve(q, x0, cfg, stop),
        SolverConfig::Gmres => {
            let lin = instance
                .linear()
                .ok_or_else(|| CliError::config("solver `gmres` needs a linear problem"))?;
            let start = Instant::now();
            let g = gmres_solve(lin.matrix(), lin.rhs(), x0, stop, false)?;
            let secs = start.elapsed().as_secs_f64();
            let mut labels = vec!["x0"];
            labels.extend(std::iter::repeat_n("GMRES", g.iterations));
            let mut elapsed = vec![None; g.residual_norms.len()];
            elapsed[0] = Some(0.0);
            if let Some(last) = elapsed.last_mut() {
                *last = Some(secs);
            }
            return Ok(RunTrace {
                solver: name,
                labels,
                residual_norms: g.residual_norms,
                elapsed_seconds: elapsed,
                converged: g.converged,
                iterations: g.iterations,
                diverged: false,
                solution: g.solution,
            });
        }
    };
    match result {
        Ok((x, trace)) => Ok(RunTrace::from_trace(name, trace, x, false)),
        Err(SolveError::Diverged { trace, .. }) => Ok(RunTrace::from_trace(name, *trace, Vec::new(), true)),
        Err(e) => Err(e.into()),
    }
}

/// Builds the problem, runs the solver and writes the CSV when `cfg.output`
/// is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunTrace, CliError> {
    let instance = build_instance(&cfg.problem, cfg.seed)?;
    let x0 = initial_guess(&instance, cfg.x0, cfg.seed);
    let outcome = solve(&instance, &cfg.solver, &x0, &cfg.stop);
    // window-cap failures carry a partial trace
    let trace = match outcome {
        Ok(t) => t,
        Err(CliError::Solve(e)) => {
            if let (Some(path), Some(partial)) = (&cfg.output, e.partial_trace()) {
                let t = RunTrace::from_trace(cfg.solver.to_string(), partial.clone(), Vec::new(), false);
                write_file(path, &t.to_csv(cfg.timing))?;
            }
            return Err(CliError::Solve(e));
        }
        Err(e) => return Err(e),
    };
    if let Some(path) = &cfg.output {
        write_file(path, &trace.to_csv(cfg.timing))?;
    }
    Ok(trace)
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}
