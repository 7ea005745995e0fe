//! Benchmarking: the convergence test on run traces, Dolan-Moré performance
//! profiles and a parallel solver-by-problem matrix runner.

mod runner;
pub mod svg;

pub use runner::{run_matrix, write_artifacts, CellRun, FlSource, MatrixConfig, MatrixOutcome};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::driver::RunRecord;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("best known value {f_low} exceeds the initial value {f0}")]
    LowerBoundAboveStart { f_low: f64, f0: f64 },
    #[error("tau must be positive, got {0}")]
    InvalidTau(f64),
    #[error("no results to profile")]
    Empty,
    #[error("{0}")]
    Config(String),
}

/// First cumulative evaluation count along the trace at which
/// `f0 - f >= (1 - tau) (f0 - f_low)`. The initial point counts as
/// evaluation 1. `None` if the test never holds.
pub fn convergence_eval_count(record: &RunRecord, f0: f64, f_low: f64, tau: f64) -> Result<Option<usize>, BenchError> {
    if !(tau > 0.0) {
        return Err(BenchError::InvalidTau(tau));
    }
    if f_low > f0 {
        return Err(BenchError::LowerBoundAboveStart { f_low, f0 });
    }
    let target = (1.0 - tau) * (f0 - f_low);
    Ok(record
        .history()
        .find(|&(_, f)| f0 - f >= target)
        .map(|(evals, _)| evals))
}

/// Outcome of one solver on one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub problem: String,
    pub solver: String,
    /// Evaluations to pass the convergence test; `None` marks a failure.
    pub t: Option<usize>,
    pub f_best: f64,
    pub evals_used: usize,
}

/// Step function `rho_s(alpha)` of one solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver: String,
    /// `(alpha, rho)` pairs with increasing `alpha`.
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// `rho(alpha)` read off the step function.
    pub fn at(&self, alpha: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(a, _)| *a <= alpha)
            .last()
            .map_or(0.0, |(_, r)| *r)
    }
}

/// Solvers and problems in order of first appearance.
fn axes(results: &[BenchResult]) -> (Vec<String>, Vec<String>) {
    let mut solvers: Vec<String> = Vec::new();
    let mut problems: Vec<String> = Vec::new();
    for r in results {
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver.clone());
        }
        if !problems.contains(&r.problem) {
            problems.push(r.problem.clone());
        }
    }
    (solvers, problems)
}

/// Performance ratios `r_{p,s} = t_{p,s} / min_s t_{p,s}` keyed by
/// `(problem, solver)`. Failures and missing cells get `+inf`.
pub fn performance_ratios(results: &[BenchResult]) -> BTreeMap<(String, String), f64> {
    let (solvers, problems) = axes(results);
    let time = |p: &str, s: &str| {
        results
            .iter()
            .find(|r| r.problem == p && r.solver == s)
            .and_then(|r| r.t)
            .map_or(f64::INFINITY, |t| t as f64)
    };
    let mut out = BTreeMap::new();
    for p in &problems {
        let best = solvers.iter().map(|s| time(p, s)).fold(f64::INFINITY, f64::min);
        for s in &solvers {
            let t = time(p, s);
            let ratio = if t.is_finite() { t / best } else { f64::INFINITY };
            out.insert((p.clone(), s.clone()), ratio);
        }
    }
    out
}

/// Performance profile of every solver.
///
/// With an empty `alphas` grid the curves are sampled at `1` and at every
/// finite realized ratio, which are exactly the jump points.
pub fn performance_profiles(results: &[BenchResult], alphas: &[f64]) -> Result<Vec<ProfileCurve>, BenchError> {
    if results.is_empty() {
        return Err(BenchError::Empty);
    }
    let (solvers, problems) = axes(results);
    let ratios = performance_ratios(results);
    let grid: Vec<f64> = if alphas.is_empty() {
        let mut g: Vec<f64> = ratios.values().copied().filter(|r| r.is_finite()).collect();
        g.push(1.0);
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    } else {
        let mut g = alphas.to_vec();
        g.sort_by(f64::total_cmp);
        g
    };
    let count = problems.len() as f64;
    Ok(solvers
        .iter()
        .map(|s| {
            let mine: Vec<f64> = problems.iter().map(|p| ratios[&(p.clone(), s.clone())]).collect();
            let points = grid
                .iter()
                .map(|&a| (a, mine.iter().filter(|&&r| r <= a).count() as f64 / count))
                .collect();
            ProfileCurve {
                solver: s.clone(),
                points,
            }
        })
        .collect())
}

/// Fraction of problems on which `solver` passed the convergence test.
pub fn solved_fraction(results: &[BenchResult], solver: &str) -> f64 {
    let mine: Vec<&BenchResult> = results.iter().filter(|r| r.solver == solver).collect();
    if mine.is_empty() {
        return 0.0;
    }
    mine.iter().filter(|r| r.t.is_some()).count() as f64 / mine.len() as f64
}
