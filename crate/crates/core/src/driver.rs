//! The outer loop alternating Full-Eval and Low-Eval iterations, its
//! configuration and the per-iteration trace.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fulleval::{full_eval_iteration, FullEvalError, FullEvalState, FullEvalStatus, LineSearchParams, StepFloor};
use crate::geometry::{FeasibleRegion, GeometryError, ProjectionError, FEASIBILITY_TOL};
use crate::loweval::{low_eval_iteration, DirectSearchParams};
use crate::objective::Objective;
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverMode {
    /// Full-Eval iterations with a switch to Low-Eval on line-search failure.
    Fle,
    /// Only Full-Eval iterations.
    FullOnly,
    /// Only Low-Eval iterations.
    LowOnly,
}

impl SolverMode {
    pub const ALL: [SolverMode; 3] = [SolverMode::Fle, SolverMode::FullOnly, SolverMode::LowOnly];

    pub fn name(self) -> &'static str {
        match self {
            SolverMode::Fle => "fle",
            SolverMode::FullOnly => "full",
            SolverMode::LowOnly => "low",
        }
    }
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fle" => Ok(SolverMode::Fle),
            "full" | "fullonly" | "full_only" => Ok(SolverMode::FullOnly),
            "low" | "lowonly" | "low_only" => Ok(SolverMode::LowOnly),
            other => Err(ConfigError::new(0, format!("unknown solver mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub alpha0: f64,
    pub alpha_min: f64,
    pub line_search: LineSearchParams,
    pub direct_search: DirectSearchParams,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Fle,
            budget: 1000,
            alpha0: 1.0,
            alpha_min: 1e-10,
            line_search: LineSearchParams::default(),
            direct_search: DirectSearchParams::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_budget(budget: usize) -> Self {
        Self {
            budget,
            ..Default::default()
        }
    }

    pub fn with_mode(mut self, mode: SolverMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.budget == 0 {
            return Err(ConfigError::new(0, "budget must be positive"));
        }
        if !(self.alpha_min > 0.0 && self.alpha0 > self.alpha_min) {
            return Err(ConfigError::new(0, "need alpha0 > alpha_min > 0"));
        }
        self.line_search.validate().map_err(|m| ConfigError::new(0, m))?;
        self.direct_search.validate().map_err(|m| ConfigError::new(0, m))
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value `{value}` for `{key}`"))
        }
        let ls = &mut self.line_search;
        let ds = &mut self.direct_search;
        match key {
            "mode" => self.mode = value.parse().map_err(|e: ConfigError| e.message)?,
            "budget" => self.budget = num(key, value)?,
            "alpha0" => self.alpha0 = num(key, value)?,
            "alpha_min" => self.alpha_min = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "c" => ls.c = num(key, value)?,
            "beta_bar" => ls.beta_bar = num(key, value)?,
            "tau" => ls.tau = num(key, value)?,
            "gamma" => ls.gamma = num(key, value)?,
            "eps_c" => ls.eps_c = num(key, value)?,
            "h" => ls.h = num(key, value)?,
            "u_g_prime" => ls.u_g_prime = num(key, value)?,
            "omega" => ls.omega = num(key, value)?,
            "j_max" => ls.j_max = num(key, value)?,
            "fd_respect_bounds" => ls.fd_respect_bounds = num(key, value)?,
            "lambda" => ds.lambda = num(key, value)?,
            "theta" => ds.theta = num(key, value)?,
            "gamma1" => ds.gamma1 = num(key, value)?,
            "gamma2" => ds.gamma2 = num(key, value)?,
            "count_fraction" => ds.count_fraction = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. `#` starts a
    /// comment. The result is validated.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(i + 1, "expected `key = value`"))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|m| ConfigError::new(i + 1, m))?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Every parameter as `key = value` lines; `parse` restores it exactly.
    pub fn to_text(&self) -> String {
        let ls = &self.line_search;
        let ds = &self.direct_search;
        let mut out = String::new();
        let _ = writeln!(out, "mode = {}", self.mode);
        let _ = writeln!(out, "budget = {}", self.budget);
        let _ = writeln!(out, "alpha0 = {:?}", self.alpha0);
        let _ = writeln!(out, "alpha_min = {:?}", self.alpha_min);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "c = {:?}", ls.c);
        let _ = writeln!(out, "beta_bar = {:?}", ls.beta_bar);
        let _ = writeln!(out, "tau = {:?}", ls.tau);
        let _ = writeln!(out, "gamma = {:?}", ls.gamma);
        let _ = writeln!(out, "eps_c = {:?}", ls.eps_c);
        let _ = writeln!(out, "h = {:?}", ls.h);
        let _ = writeln!(out, "u_g_prime = {:?}", ls.u_g_prime);
        let _ = writeln!(out, "omega = {:?}", ls.omega);
        let _ = writeln!(out, "j_max = {}", ls.j_max);
        let _ = writeln!(out, "fd_respect_bounds = {}", ls.fd_respect_bounds);
        let _ = writeln!(out, "lambda = {:?}", ds.lambda);
        let _ = writeln!(out, "theta = {:?}", ds.theta);
        let _ = writeln!(out, "gamma1 = {:?}", ds.gamma1);
        let _ = writeln!(out, "gamma2 = {:?}", ds.gamma2);
        let _ = writeln!(out, "count_fraction = {:?}", ds.count_fraction);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationKind {
    FullEval,
    LowEval,
}

impl IterationKind {
    pub fn name(self) -> &'static str {
        match self {
            IterationKind::FullEval => "full",
            IterationKind::LowEval => "low",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Budget,
    AlphaMin,
    CriticalityConverged,
    /// A pure Full-Eval run found no decrease above the step floor.
    LineSearchFailed,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Budget => "budget",
            Termination::AlphaMin => "alpha_min",
            Termination::CriticalityConverged => "criticality_converged",
            Termination::LineSearchFailed => "line_search_failed",
        }
    }
}

/// One iteration of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub kind: IterationKind,
    pub success: bool,
    /// Objective value after the iteration.
    pub f: f64,
    /// Low-Eval step size in effect during the iteration.
    pub alpha: f64,
    /// Cumulative evaluations after the iteration, including `f(x0)`.
    pub evals: usize,
    /// Accepted line-search step of a successful Full-Eval iteration.
    pub step: Option<f64>,
    /// Backtracks of a Full-Eval iteration.
    pub backtracks: usize,
    /// `g^T (x_proj - x)` of a Full-Eval iteration.
    pub slope: f64,
    /// Iterate after the iteration.
    pub x: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub x0: DVector<f64>,
    pub f0: f64,
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
    /// Low-Eval step size after the last iteration.
    pub final_alpha: f64,
}

impl RunRecord {
    pub fn initial_f(&self) -> f64 {
        self.f0
    }

    pub fn final_f(&self) -> f64 {
        self.iterations.last().map_or(self.f0, |r| r.f)
    }

    pub fn final_x(&self) -> &DVector<f64> {
        self.iterations.last().map_or(&self.x0, |r| &r.x)
    }

    pub fn evals_used(&self) -> usize {
        self.iterations.last().map_or(1, |r| r.evals)
    }

    /// `(evals, f)` pairs starting with `(1, f(x0))`.
    pub fn history(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        std::iter::once((1, self.f0)).chain(self.iterations.iter().map(|r| (r.evals, r.f)))
    }

    /// Trace as CSV with one row per iteration. Floats are written in their
    /// shortest round-trip form.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("k,kind,success,f,alpha,evals,step,backtracks\n");
        for r in &self.iterations {
            let step = r.step.map_or(String::new(), |s| format!("{s:?}"));
            let _ = writeln!(
                out,
                "{},{},{},{:?},{:?},{},{},{}",
                r.k,
                r.kind.name(),
                r.success,
                r.f,
                r.alpha,
                r.evals,
                step,
                r.backtracks
            );
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("initial point has length {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("initial point is infeasible (violation {0:e})")]
    InfeasibleStart(f64),
    #[error("objective is not finite at the initial point")]
    NonFiniteStart,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

impl From<FullEvalError> for SolveError {
    fn from(e: FullEvalError) -> Self {
        match e {
            FullEvalError::Projection(p) => SolveError::Projection(p),
            // The iteration maps non-finite probes to a failed iteration.
            FullEvalError::NonFiniteProbe { .. } => SolveError::NonFiniteStart,
        }
    }
}

/// Runs the configured solver on a problem.
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<RunRecord, SolveError> {
    solve_objective(problem.objective(), problem.region(), problem.x0(), config)
}

/// Runs the configured solver on `f` over `region` from `x0`.
pub fn solve_objective(
    f: &dyn Objective,
    region: &FeasibleRegion,
    x0: &DVector<f64>,
    config: &SolverConfig,
) -> Result<RunRecord, SolveError> {
    config.validate()?;
    if x0.len() != region.dim() {
        return Err(SolveError::Dimension {
            expected: region.dim(),
            found: x0.len(),
        });
    }
    let violation = region.violation(x0);
    if !(violation <= FEASIBILITY_TOL) {
        return Err(SolveError::InfeasibleStart(violation));
    }
    let f0 = f.value(x0);
    if !f0.is_finite() {
        return Err(SolveError::NonFiniteStart);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = FullEvalState::new(region.reduced_dim());
    let floor = match config.mode {
        SolverMode::FullOnly => StepFloor::Absolute(1e-16 * config.line_search.beta_bar),
        _ => StepFloor::Switching,
    };
    let mut kind = match config.mode {
        SolverMode::LowOnly => IterationKind::LowEval,
        _ => IterationKind::FullEval,
    };
    let mut x = x0.clone();
    let mut fx = f0;
    let mut alpha = config.alpha0;
    let mut evals = 1;
    let mut failed_lows = 0;
    let mut allowance = 1;
    let mut iterations = Vec::new();

    let termination = loop {
        if evals >= config.budget {
            break Termination::Budget;
        }
        if alpha < config.alpha_min {
            break Termination::AlphaMin;
        }
        let k = iterations.len();
        match kind {
            IterationKind::FullEval => {
                let out = full_eval_iteration(&mut state, f, region, &x, fx, alpha, &config.line_search, floor)?;
                evals += out.evals;
                let success = out.status == FullEvalStatus::Success;
                if out.evals > 0 {
                    iterations.push(IterationRecord {
                        k,
                        kind,
                        success,
                        f: out.f_next,
                        alpha,
                        evals,
                        step: out.step,
                        backtracks: out.backtracks,
                        slope: out.slope,
                        x: out.x_next.clone(),
                    });
                }
                x = out.x_next;
                fx = out.f_next;
                match out.status {
                    FullEvalStatus::Success => {}
                    FullEvalStatus::CriticalityConverged => break Termination::CriticalityConverged,
                    FullEvalStatus::Failure if config.mode == SolverMode::FullOnly => {
                        break Termination::LineSearchFailed
                    }
                    FullEvalStatus::Failure => {
                        kind = IterationKind::LowEval;
                        allowance = out.backtracks.max(1);
                        failed_lows = 0;
                    }
                }
            }
            IterationKind::LowEval => {
                let remaining = config.budget - evals;
                let out = low_eval_iteration(f, region, &x, fx, alpha, &config.direct_search, &mut rng, remaining)?;
                evals += out.evals;
                iterations.push(IterationRecord {
                    k,
                    kind,
                    success: out.success,
                    f: out.f_next,
                    alpha,
                    evals,
                    step: None,
                    backtracks: 0,
                    slope: 0.0,
                    x: out.x_next.clone(),
                });
                x = out.x_next;
                fx = out.f_next;
                alpha = out.alpha_next;
                if out.success {
                    failed_lows = 0;
                } else {
                    failed_lows += 1;
                }
                if config.mode == SolverMode::Fle && failed_lows >= allowance {
                    kind = IterationKind::FullEval;
                }
            }
        }
    };

    Ok(RunRecord {
        x0: x0.clone(),
        f0,
        iterations,
        termination,
        final_alpha: alpha,
    })
}
