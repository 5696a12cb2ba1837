use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aafp_cli::config::ExperimentConfig;
use aafp_cli::{
    build_instance, check_alignment, initial_guess, race, race_csv, race_table, run_experiment, CliError,
    SolverConfig, EXIT_CONVERGED, EXIT_NOT_CONVERGED,
};
use aafp_core::bounds::{table1_csv, table1_text};

#[derive(Parser)]
#[command(name = "aafp", version, about = "Alternating Anderson acceleration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one problem and write its residual history.
    Run(ExperimentArgs),
    /// Compare aAA(inf)[1]-FP[t] with GMRES on a linear problem.
    Align {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Largest accepted relative mismatch.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Print the table of C(a,b,m) b^(m+1) and eps(a,b,m) b^(m+1).
    Table1 {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run several solvers on the same problem and tabulate the outcome.
    Race {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Comma-separated list: fp, gmres, aa:M, aafp:M:S:T (M may be `inf`).
        #[arg(long, default_value = "fp,aa:5,aafp:5:1:5")]
        solvers: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

/// Experiment keys; every flag overrides the same key in `--config`.
#[derive(Args)]
struct ExperimentArgs {
    /// `key = value` file with any of the options below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// permutation, poisson, mtx, lasso, nnls, tv or logistic.
    #[arg(long)]
    problem: Option<String>,
    /// fp, aa, aafp or gmres.
    #[arg(long)]
    solver: Option<String>,
    /// Anderson window, an integer or `inf`.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    rank_tol: Option<String>,
    #[arg(long)]
    rtol: Option<String>,
    #[arg(long)]
    atol: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// zeros, ones or random.
    #[arg(long)]
    x0: Option<String>,
    /// CSV destination.
    #[arg(long)]
    output: Option<String>,
    /// Write 0 in the timing column.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    /// Matrix Market file for `--problem mtx`.
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    n1: Option<String>,
    #[arg(long)]
    n2: Option<String>,
    #[arg(long)]
    density: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    beta_factor: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    /// LIBSVM file for `--problem logistic`.
    #[arg(long)]
    data: Option<String>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        };
        put("problem", &self.problem);
        put("solver", &self.solver);
        put("m", &self.m);
        put("s", &self.s);
        put("t", &self.t);
        put("rank_tol", &self.rank_tol);
        put("rtol", &self.rtol);
        put("atol", &self.atol);
        put("max_iters", &self.max_iters);
        put("seed", &self.seed);
        put("x0", &self.x0);
        put("output", &self.output);
        put("n", &self.n);
        put("grid", &self.grid);
        put("path", &self.path);
        put("n1", &self.n1);
        put("n2", &self.n2);
        put("density", &self.density);
        put("beta", &self.beta);
        put("beta_factor", &self.beta_factor);
        put("mu", &self.mu);
        put("eta", &self.eta);
        put("data", &self.data);
        if self.no_timing {
            map.insert("no_timing".into(), "true".into());
        }
        ExperimentConfig::load(self.config.as_deref(), &map)
    }
}

fn write_or_print(output: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io {
            context: format!("writing {}", p.display()),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run(args) => {
            let cfg = args.load()?;
            let trace = run_experiment(&cfg)?;
            if trace.diverged {
                println!("{}: diverged at iteration {}", trace.solver, trace.iterations);
            } else {
                println!(
                    "{}: {} after {} iterations, final residual {:.3e}",
                    trace.solver,
                    if trace.converged { "converged" } else { "not converged" },
                    trace.iterations,
                    trace.final_residual()
                );
            }
            if cfg.output.is_none() {
                print!("{}", trace.to_csv(cfg.timing));
            }
            Ok(trace.exit_code())
        }
        Command::Align { exp, tol } => {
            let cfg = exp.load()?;
            let instance = build_instance(&cfg.problem, cfg.seed)?;
            let q = instance
                .linear()
                .ok_or_else(|| CliError::Config(format!("`align` needs a linear problem, got `{}`", cfg.problem.name())))?;
            let t = match cfg.solver {
                SolverConfig::Aafp(s) => s.t,
                _ => 0,
            };
            let x0 = initial_guess(&instance, cfg.x0, cfg.seed);
            let report = check_alignment(q, &x0, t, &cfg.stop)?;
            write_or_print(cfg.output.as_deref(), &report.to_text())?;
            Ok(if report.max_mismatch() <= tol {
                EXIT_CONVERGED
            } else {
                EXIT_NOT_CONVERGED
            })
        }
        Command::Table1 { format, output } => {
            let text = match format {
                Format::Text => table1_text(),
                Format::Csv => table1_csv(),
            };
            write_or_print(output.as_deref(), &text)?;
            Ok(EXIT_CONVERGED)
        }
        Command::Race { exp, solvers, jobs } => {
            let cfg = exp.load()?;
            let list = solvers
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(str::parse)
                .collect::<Result<Vec<SolverConfig>, _>>()?;
            if list.contains(&SolverConfig::Gmres) && !cfg.problem.is_linear() {
                return Err(CliError::Config(format!(
                    "solver `gmres` needs a linear problem, got `{}`",
                    cfg.problem.name()
                )));
            }
            let instance = build_instance(&cfg.problem, cfg.seed)?;
            let x0 = initial_guess(&instance, cfg.x0, cfg.seed);
            let entries = race(&instance, &list, &x0, &cfg.stop, jobs);
            print!("{}", race_table(&entries, cfg.timing));
            if let Some(path) = &cfg.output {
                write_or_print(Some(path), &race_csv(&entries, cfg.timing))?;
            }
            let code = entries
                .iter()
                .map(|e| match &e.result {
                    Ok(t) => t.exit_code(),
                    Err(err) => err.exit_code(),
                })
                .max()
                .unwrap_or(EXIT_CONVERGED);
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if let Some(trace) = match &e {
                CliError::Solve(s) => s.partial_trace(),
                _ => None,
            } {
                eprintln!("stopped after {} iterations", trace.iterations);
            }
            ExitCode::from(code as u8)
        }
    }
}
