//! Experiment configuration from `key = value` pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aafp_core::{ScheduleConfig, StopRule, Window};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemConfig {
    /// Cyclic permutation system with `b = e₁`.
    Permutation { n: usize },
    /// Jacobi-scaled five-point Poisson problem on an `grid × grid` interior.
    Poisson { grid: usize },
    /// Jacobi iteration on a Matrix Market matrix with `b = A·1`.
    MatrixMarket { path: PathBuf },
    Lasso {
        n1: usize,
        n2: usize,
        density: f64,
        beta: f64,
        mu: f64,
    },
    Nnls {
        n1: usize,
        n2: usize,
        density: f64,
        mu: f64,
    },
    /// `β = beta_factor · ‖x̂‖∞`.
    Tv { n: usize, beta_factor: f64, mu: f64 },
    /// Reads `data` when given, otherwise draws a synthetic `n1 × n2` set.
    Logistic {
        data: Option<PathBuf>,
        n1: usize,
        n2: usize,
        density: f64,
        beta: f64,
        eta: f64,
    },
}

impl ProblemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemConfig::Permutation { .. } => "permutation",
            ProblemConfig::Poisson { .. } => "poisson",
            ProblemConfig::MatrixMarket { .. } => "mtx",
            ProblemConfig::Lasso { .. } => "lasso",
            ProblemConfig::Nnls { .. } => "nnls",
            ProblemConfig::Tv { .. } => "tv",
            ProblemConfig::Logistic { .. } => "logistic",
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            ProblemConfig::Permutation { .. } | ProblemConfig::Poisson { .. } | ProblemConfig::MatrixMarket { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverConfig {
    Fp,
    Aa { window: Window },
    Aafp(ScheduleConfig),
    Gmres,
}

impl fmt::Display for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverConfig::Fp => f.write_str("FP"),
            SolverConfig::Aa { window } => write!(f, "AA({window})"),
            SolverConfig::Aafp(c) => write!(f, "aAA({})[{}]-FP[{}]", c.window, c.s, c.t),
            SolverConfig::Gmres => f.write_str("GMRES"),
        }
    }
}

/// Parses the compact race syntax: `fp`, `gmres`, `aa:M`, `aafp:M:S:T`.
impl FromStr for SolverConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let window = |v: &str| v.parse::<Window>().map_err(CliError::config);
        match parts.as_slice() {
            ["fp"] => Ok(SolverConfig::Fp),
            ["gmres"] => Ok(SolverConfig::Gmres),
            ["aa", m] => Ok(SolverConfig::Aa { window: window(m)? }),
            ["aafp", m, s, t] => {
                let cfg = ScheduleConfig::new(window(m)?, parse_num(s, "s")?, parse_num(t, "t")?)
                    .map_err(|e| CliError::config(e.to_string()))?;
                Ok(SolverConfig::Aafp(cfg))
            }
            _ => Err(CliError::config(format!(
                "invalid solver `{s}` (expected fp, gmres, aa:M or aafp:M:S:T)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    Zeros,
    Ones,
    /// Standard normal entries from a generator seeded with the run seed.
    Random,
}

impl FromStr for InitialGuess {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zeros" | "zero" => Ok(InitialGuess::Zeros),
            "ones" | "one" => Ok(InitialGuess::Ones),
            "random" => Ok(InitialGuess::Random),
            other => Err(CliError::config(format!("invalid x0 `{other}` (expected zeros, ones or random)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    pub stop: StopRule,
    pub seed: u64,
    pub x0: InitialGuess,
    pub output: Option<PathBuf>,
    /// When false the CSV timing column is written as `0`.
    pub timing: bool,
}

pub const KNOWN_KEYS: &[&str] = &[
    "problem",
    "solver",
    "m",
    "s",
    "t",
    "rank_tol",
    "rtol",
    "atol",
    "max_iters",
    "seed",
    "x0",
    "output",
    "no_timing",
    "n",
    "grid",
    "path",
    "n1",
    "n2",
    "density",
    "beta",
    "beta_factor",
    "mu",
    "eta",
    "data",
];

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

fn parse_num<T: FromStr>(v: &str, key: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::config(format!("invalid value `{v}` for `{key}`")))
}

fn parse_bool(v: &str, key: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(CliError::config(format!("invalid boolean `{other}` for `{key}`"))),
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", i + 1)))?;
        let key = normalize_key(k);
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse_config_text(&text)
}

/// Typed view over a merged key/value map.
struct Pairs<'a>(&'a BTreeMap<String, String>);

impl Pairs<'_> {
    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.0.get(key) {
            Some(v) => parse_num(v, key),
            None => Ok(default),
        }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn positive(v: f64, key: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("`{key}` must be positive, got {v}")))
    }
}

fn density(v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(CliError::config(format!("`density` must lie in (0, 1], got {v}")))
    }
}

fn at_least(v: usize, min: usize, key: &str) -> Result<usize, CliError> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::config(format!("`{key}` must be at least {min}, got {v}")))
    }
}

impl ExperimentConfig {
    /// Builds and validates a configuration from merged key/value pairs.
    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        for k in map.keys() {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(CliError::config(format!("unknown key `{k}`")));
            }
        }
        let p = Pairs(map);
        let problem_name = p.str("problem").ok_or_else(|| CliError::config("missing `problem`"))?;
        let problem = match problem_name {
            "permutation" => ProblemConfig::Permutation {
                n: at_least(p.get("n", 26)?, 2, "n")?,
            },
            "poisson" => ProblemConfig::Poisson {
                grid: at_least(p.get("grid", 9)?, 3, "grid")?,
            },
            "mtx" => ProblemConfig::MatrixMarket {
                path: p
                    .str("path")
                    .map(PathBuf::from)
                    .ok_or_else(|| CliError::config("problem `mtx` needs `path`"))?,
            },
            "lasso" => ProblemConfig::Lasso {
                n1: at_least(p.get("n1", 150)?, 1, "n1")?,
                n2: at_least(p.get("n2", 300)?, 1, "n2")?,
                density: density(p.get("density", 0.01)?)?,
                beta: positive(p.get("beta", 1.0)?, "beta")?,
                mu: positive(p.get("mu", 10.0)?, "mu")?,
            },
            "nnls" => ProblemConfig::Nnls {
                n1: at_least(p.get("n1", 150)?, 1, "n1")?,
                n2: at_least(p.get("n2", 300)?, 1, "n2")?,
                density: density(p.get("density", 0.01)?)?,
                mu: positive(p.get("mu", 2.0)?, "mu")?,
            },
            "tv" => ProblemConfig::Tv {
                n: at_least(p.get("n", 1000)?, 2, "n")?,
                beta_factor: {
                    let b: f64 = p.get("beta_factor", 0.001)?;
                    if !(b >= 0.0 && b.is_finite()) {
                        return Err(CliError::config(format!("`beta_factor` must be nonnegative, got {b}")));
                    }
                    b
                },
                mu: positive(p.get("mu", 10.0)?, "mu")?,
            },
            "logistic" => ProblemConfig::Logistic {
                data: p.str("data").map(PathBuf::from),
                n1: at_least(p.get("n1", 200)?, 1, "n1")?,
                n2: at_least(p.get("n2", 20)?, 1, "n2")?,
                density: density(p.get("density", 0.5)?)?,
                beta: positive(p.get("beta", 1e-2)?, "beta")?,
                eta: positive(p.get("eta", 1.0)?, "eta")?,
            },
            other => {
                return Err(CliError::config(format!(
                    "unknown problem `{other}` (expected permutation, poisson, mtx, lasso, nnls, tv or logistic)"
                )))
            }
        };

        let window: Window = match p.str("m") {
            Some(v) => v.parse().map_err(CliError::config)?,
            None => Window::Bounded(5),
        };
        let solver = match p.str("solver").unwrap_or("aafp") {
            "fp" => SolverConfig::Fp,
            "aa" => SolverConfig::Aa { window },
            "aafp" => {
                let mut cfg = ScheduleConfig::new(window, p.get("s", 1)?, p.get("t", 1)?)
                    .map_err(|e| CliError::config(e.to_string()))?;
                if let Some(v) = p.str("rank_tol") {
                    cfg.rank_tol = parse_num(v, "rank_tol")?;
                    cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
                }
                SolverConfig::Aafp(cfg)
            }
            "gmres" => SolverConfig::Gmres,
            other => {
                return Err(CliError::config(format!(
                    "unknown solver `{other}` (expected fp, aa, aafp or gmres)"
                )))
            }
        };
        if solver == SolverConfig::Gmres && !problem.is_linear() {
            return Err(CliError::config(format!(
                "solver `gmres` needs a linear problem, got `{}`",
                problem.name()
            )));
        }

        let stop = StopRule::new(p.get("rtol", 1e-8)?, p.get("atol", 0.0)?, p.get("max_iters", 1000)?)
            .map_err(|e| CliError::config(e.to_string()))?;
        let no_timing = match p.str("no_timing") {
            Some(v) => parse_bool(v, "no_timing")?,
            None => false,
        };
        Ok(Self {
            problem,
            solver,
            stop,
            seed: p.get("seed", 0)?,
            x0: p.str("x0").map(str::parse).transpose()?.unwrap_or(InitialGuess::Zeros),
            output: p.str("output").map(PathBuf::from),
            timing: !no_timing,
        })
    }

    /// Reads `file` (if any) and overlays `overrides`.
    pub fn load(file: Option<&Path>, overrides: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut map = match file {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        for (k, v) in overrides {
            map.insert(normalize_key(k), v.clone());
        }
        Self::from_pairs(&map)
    }
}
