use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::svg::profile_svg;
use super::{convergence_eval_count, performance_profiles, BenchError, BenchResult};
use crate::driver::{solve, RunRecord, SolverConfig, SolverMode};
use crate::problems::Problem;

/// Where the best known value `f_L` of the convergence test comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlSource {
    /// The problem's stored value when present, else the cross-solver minimum.
    Catalog,
    /// Always the smallest value found by any solver.
    CrossSolver,
}

impl FromStr for FlSource {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "catalog" => Ok(FlSource::Catalog),
            "solvers" | "cross-solver" | "min" => Ok(FlSource::CrossSolver),
            _ => Err(BenchError::Config(format!("unknown f_L source `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatrixConfig {
    pub problems: Vec<Problem>,
    pub solvers: Vec<SolverMode>,
    pub taus: Vec<f64>,
    /// Budget is `budget_mult * (n + 1)` evaluations.
    pub budget_mult: usize,
    /// Parameters shared by all runs; mode, budget and seed are overridden.
    pub base: SolverConfig,
    pub seed: u64,
    /// Seeds `seed, seed + 1, ...`; the reported `t` is the lower median.
    pub replications: usize,
    /// Worker threads; 0 uses the global pool.
    pub parallel: usize,
    pub fl_source: FlSource,
    /// When set, the cross-solver `f_L` also includes one extra run per
    /// solver with budget `fl_budget_mult * (n + 1)`.
    pub fl_budget_mult: Option<usize>,
}

impl MatrixConfig {
    pub fn new(problems: Vec<Problem>) -> Self {
        Self {
            problems,
            solvers: SolverMode::ALL.to_vec(),
            taus: vec![1e-3, 1e-5],
            budget_mult: 100,
            base: SolverConfig::default(),
            seed: 0,
            replications: 1,
            parallel: 0,
            fl_source: FlSource::Catalog,
            fl_budget_mult: None,
        }
    }
}

/// One (problem, solver, replication) cell.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub problem: String,
    pub solver: SolverMode,
    pub replication: usize,
    pub seed: u64,
    pub budget: usize,
    pub outcome: Result<RunRecord, String>,
}

#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    /// Cells ordered by problem, solver, replication.
    pub runs: Vec<CellRun>,
    /// `f_L` used per problem.
    pub f_low: BTreeMap<String, f64>,
    /// Results per `tau` in configuration order, each ordered by problem then
    /// solver.
    pub results: Vec<(f64, Vec<BenchResult>)>,
    /// Problems in configuration order.
    pub problems: Vec<String>,
}

impl MatrixOutcome {
    pub fn results_for(&self, tau: f64) -> Option<&[BenchResult]> {
        self.results.iter().find(|(t, _)| *t == tau).map(|(_, r)| r.as_slice())
    }
}

fn lower_median<T: Ord + Copy>(mut values: Vec<T>) -> T {
    values.sort();
    values[(values.len() - 1) / 2]
}

pub fn run_matrix(config: &MatrixConfig) -> Result<MatrixOutcome, BenchError> {
    if config.problems.is_empty() || config.solvers.is_empty() {
        return Err(BenchError::Empty);
    }
    if config.replications == 0 || config.budget_mult == 0 {
        return Err(BenchError::Config(
            "replications and budget multiplier must be positive".into(),
        ));
    }
    if let Some(&tau) = config.taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(BenchError::InvalidTau(tau));
    }
    let mut cells = Vec::new();
    for (p, problem) in config.problems.iter().enumerate() {
        for &solver in &config.solvers {
            for r in 0..config.replications {
                cells.push((p, problem, solver, r));
            }
        }
    }
    let run_cell = |&(_, problem, solver, replication): &(usize, &Problem, SolverMode, usize)| {
        let seed = config.seed.wrapping_add(replication as u64);
        let budget = config.budget_mult * (problem.dim() + 1);
        let run_config = SolverConfig {
            mode: solver,
            budget,
            seed,
            ..config.base.clone()
        };
        CellRun {
            problem: problem.name().to_string(),
            solver,
            replication,
            seed,
            budget,
            outcome: solve(problem, &run_config).map_err(|e| e.to_string()),
        }
    };
    let runs: Vec<CellRun> = if config.parallel == 1 {
        cells.iter().map(run_cell).collect()
    } else if config.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallel)
            .build()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        pool.install(|| cells.par_iter().map(run_cell).collect())
    } else {
        cells.par_iter().map(run_cell).collect()
    };

    let mut f_low = BTreeMap::new();
    for problem in &config.problems {
        let f0 = problem.value(problem.x0());
        let needs_best = config.fl_source == FlSource::CrossSolver || problem.f_low().is_none();
        let calibration = match config.fl_budget_mult {
            Some(mult) if needs_best => config
                .solvers
                .iter()
                .filter_map(|&mode| {
                    let run_config = SolverConfig {
                        mode,
                        budget: mult * (problem.dim() + 1),
                        seed: config.seed,
                        ..config.base.clone()
                    };
                    solve(problem, &run_config).ok().map(|r| r.final_f())
                })
                .fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        };
        let best = runs
            .iter()
            .filter(|c| c.problem == problem.name())
            .filter_map(|c| c.outcome.as_ref().ok())
            .map(RunRecord::final_f)
            .fold(f0.min(calibration), f64::min);
        let value = match (config.fl_source, problem.f_low()) {
            (FlSource::Catalog, Some(v)) => v,
            _ => best,
        };
        f_low.insert(problem.name().to_string(), value);
    }

    let mut results = Vec::new();
    for &tau in &config.taus {
        let mut rows = Vec::new();
        for problem in &config.problems {
            let fl = f_low[problem.name()];
            for &solver in &config.solvers {
                let mine: Vec<&CellRun> = runs
                    .iter()
                    .filter(|c| c.problem == problem.name() && c.solver == solver)
                    .collect();
                let mut times = Vec::new();
                let mut evals = Vec::new();
                let mut f_best = f64::INFINITY;
                for cell in &mine {
                    match &cell.outcome {
                        Ok(record) => {
                            let t = convergence_eval_count(record, record.initial_f(), fl, tau)
                                .ok()
                                .flatten();
                            times.push(t.unwrap_or(usize::MAX));
                            evals.push(record.evals_used());
                            f_best = f_best.min(record.final_f());
                        }
                        Err(_) => {
                            times.push(usize::MAX);
                            evals.push(0);
                        }
                    }
                }
                let t = lower_median(times);
                rows.push(BenchResult {
                    problem: problem.name().to_string(),
                    solver: solver.name().to_string(),
                    t: (t != usize::MAX).then_some(t),
                    f_best,
                    evals_used: lower_median(evals),
                });
            }
        }
        results.push((tau, rows));
    }
    Ok(MatrixOutcome {
        runs,
        f_low,
        results,
        problems: config.problems.iter().map(|p| p.name().to_string()).collect(),
    })
}

fn tau_label(tau: f64) -> String {
    format!("{tau:e}")
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `results.csv`, `profiles_<tau>.csv`, `profiles_<tau>.svg` and one
/// `trace_<problem>_<solver>.csv` per run (replications after the first get a
/// `_r<k>` suffix).
pub fn write_artifacts(outcome: &MatrixOutcome, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut csv = String::from("tau,problem,solver,t,f_best,evals,f_low\n");
    for (tau, rows) in &outcome.results {
        for r in rows {
            let t = r.t.map_or("inf".to_string(), |t| t.to_string());
            let _ = writeln!(
                csv,
                "{},{},{},{},{:?},{},{:?}",
                tau_label(*tau),
                r.problem,
                r.solver,
                t,
                r.f_best,
                r.evals_used,
                outcome.f_low[&r.problem]
            );
        }
    }
    std::fs::write(dir.join("results.csv"), csv)?;

    for (tau, rows) in &outcome.results {
        let label = tau_label(*tau);
        let curves = performance_profiles(rows, &[]).map_err(std::io::Error::other)?;
        let mut data = String::from("alpha,solver,rho\n");
        for curve in &curves {
            for (alpha, rho) in &curve.points {
                let _ = writeln!(data, "{alpha:?},{},{rho:?}", curve.solver);
            }
        }
        std::fs::write(dir.join(format!("profiles_{label}.csv")), data)?;
        std::fs::write(
            dir.join(format!("profiles_{label}.svg")),
            profile_svg(&format!("performance profile, tau = {label}"), &curves),
        )?;
    }

    for cell in &outcome.runs {
        let suffix = if cell.replication == 0 {
            String::new()
        } else {
            format!("_r{}", cell.replication)
        };
        let name = format!("trace_{}_{}{suffix}.csv", file_safe(&cell.problem), cell.solver.name());
        let body = match &cell.outcome {
            Ok(record) => record.trace_csv(),
            Err(e) => format!("# run failed: {e}\n"),
        };
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}
