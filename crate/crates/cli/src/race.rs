//! Several solvers on one problem, in parallel worker threads.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use aafp_core::StopRule;

use crate::config::SolverConfig;
use crate::experiment::{solve, Instance, RunTrace};
use crate::CliError;

#[derive(Debug)]
pub struct RaceEntry {
    pub solver: SolverConfig,
    pub result: Result<RunTrace, CliError>,
}

/// Runs every solver from the same `x0` on up to `jobs` threads. Results
/// come back in the order of `solvers`.
pub fn race(instance: &Instance, solvers: &[SolverConfig], x0: &[f64], stop: &StopRule, jobs: usize) -> Vec<RaceEntry> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunTrace, CliError>>>> = solvers.iter().map(|_| Mutex::new(None)).collect();
    let workers = jobs.clamp(1, solvers.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(solver) = solvers.get(i) else { break };
                let r = solve(instance, solver, x0, stop);
                *slots[i].lock().expect("poisoned slot") = Some(r);
            });
        }
    });
    solvers
        .iter()
        .zip(slots)
        .map(|(s, slot)| RaceEntry {
            solver: *s,
            result: slot.into_inner().expect("poisoned slot").expect("every slot is filled"),
        })
        .collect()
}

fn seconds(t: &RunTrace) -> Option<f64> {
    t.elapsed_seconds.last().copied().flatten()
}

/// Aligned text table: solver, iterations (`†` when not converged), final
/// residual and wall time.
pub fn race_table(entries: &[RaceEntry], timing: bool) -> String {
    let width = entries.iter().map(|e| e.solver.to_string().len()).max().unwrap_or(6).max(6);
    let mut s = format!("{:<width$}  {:>8}  {:>12}  {:>10}\n", "solver", "it", "residual", "seconds");
    for e in entries {
        match &e.result {
            Ok(t) => {
                let secs = match (timing, seconds(t)) {
                    (true, Some(v)) => format!("{v:.4}"),
                    _ => "-".into(),
                };
                let _ = writeln!(
                    s,
                    "{:<width$}  {:>8}  {:>12.4e}  {:>10}",
                    e.solver.to_string(),
                    t.outcome(),
                    t.final_residual(),
                    secs
                );
            }
            Err(err) => {
                let _ = writeln!(s, "{:<width$}  error: {err}", e.solver.to_string());
            }
        }
    }
    s
}

/// CSV summary with columns `solver,iterations,converged,final_residual,elapsed_seconds`.
pub fn race_csv(entries: &[RaceEntry], timing: bool) -> String {
    let mut s = String::from("solver,iterations,converged,final_residual,elapsed_seconds\n");
    for e in entries {
        match &e.result {
            Ok(t) => {
                let secs = if timing {
                    seconds(t).map(|v| format!("{v:.9}")).unwrap_or_default()
                } else {
                    "0".into()
                };
                let _ = writeln!(s, "{},{},{},{:e},{}", e.solver, t.iterations, t.converged, t.final_residual(), secs);
            }
            Err(_) => {
                let _ = writeln!(s, "{},,error,,", e.solver);
            }
        }
    }
    s
}
