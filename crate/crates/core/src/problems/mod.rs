//! Test problems: the built-in catalog, a plain-text problem file format and
//! the objective transforms (multiplicative noise, l1 penalization of
//! constraints, pointwise maximum).
//!
//! A problem file is a region file (see [`crate::geometry::format`]) plus
//! keyword lines, which may appear anywhere:
//!
//! ```text
//! name lsqfit            # optional, defaults to the objective name
//! objective lsqfit       # registry name, see registry::NAMES
//! x0 0 0                 # starting point, must be feasible
//! fL 0.0675739757575757  # optional best known value
//! ```

pub mod catalog;
pub mod registry;

use std::fmt::{self, Write as _};
use std::hash::Hasher;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::format::{data_lines, parse_numbers, parse_region_lines, write_region, FormatError};
use crate::geometry::{FeasibleRegion, GeometryError, FEASIBILITY_TOL};
use crate::objective::Objective;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("invalid transform `{0}`")]
    InvalidTransform(String),
    #[error("problem `{name}`: {message}")]
    Invalid { name: String, message: String },
}

/// Descriptive data attached to a problem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemInfo {
    /// Registry name of the base objective.
    pub objective: String,
    /// Name under which the instance is listed in the literature, if any.
    pub listed_as: Option<String>,
    /// Where the data and the starting point come from.
    pub source: String,
    pub smooth: bool,
    pub convex: bool,
}

#[derive(Clone)]
pub struct Problem {
    name: String,
    objective: Arc<dyn Objective>,
    region: FeasibleRegion,
    x0: DVector<f64>,
    f_low: Option<f64>,
    info: ProblemInfo,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.dim())
            .field("x0", &self.x0.as_slice())
            .field("f_low", &self.f_low)
            .field("info", &self.info)
            .finish()
    }
}

impl Problem {
    /// Checks that `x0` is feasible and the objective is finite there.
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        region: FeasibleRegion,
        x0: DVector<f64>,
        f_low: Option<f64>,
        info: ProblemInfo,
    ) -> Result<Self, ProblemError> {
        let name = name.into();
        let invalid = |message: String| ProblemError::Invalid {
            name: name.clone(),
            message,
        };
        if x0.len() != region.dim() {
            return Err(invalid(format!(
                "x0 has length {}, expected {}",
                x0.len(),
                region.dim()
            )));
        }
        if let Some(message) = start_violation(&region, &x0) {
            return Err(invalid(message));
        }
        if !objective.value(&x0).is_finite() {
            return Err(invalid("objective is not finite at x0".into()));
        }
        Ok(Self {
            name,
            objective,
            region,
            x0,
            f_low,
            info,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn objective_arc(&self) -> Arc<dyn Objective> {
        Arc::clone(&self.objective)
    }

    pub fn region(&self) -> &FeasibleRegion {
        &self.region
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    /// Best known objective value.
    pub fn f_low(&self) -> Option<f64> {
        self.f_low
    }

    pub fn info(&self) -> &ProblemInfo {
        &self.info
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.objective.value(x)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_f_low(mut self, f_low: Option<f64>) -> Self {
        self.f_low = f_low;
        self
    }

    /// Reads a problem file whose objective comes from the built-in registry.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let mut name = None;
        let mut objective: Option<(usize, String)> = None;
        let mut x0: Option<(usize, &str)> = None;
        let mut f_low = None;
        let mut region_lines = Vec::new();
        for (line, content) in data_lines(text) {
            let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let rest = rest.trim();
            match keyword {
                "name" => name = Some(rest.to_string()),
                "objective" => objective = Some((line, rest.to_string())),
                "x0" => x0 = Some((line, rest)),
                "fL" => f_low = Some(parse_numbers(line, rest, 1)?[0]),
                _ => region_lines.push((line, content)),
            }
        }
        let (obj_line, obj_name) = objective.ok_or_else(|| FormatError::new(0, "missing `objective <name>` line"))?;
        let entry = registry::lookup(&obj_name)
            .ok_or_else(|| FormatError::new(obj_line, format!("unknown objective `{obj_name}`")))?;
        let region = parse_region_lines(&region_lines)?;
        if region.dim() != entry.dim {
            return Err(FormatError::new(
                obj_line,
                format!(
                    "objective `{obj_name}` has dimension {}, region has {}",
                    entry.dim,
                    region.dim()
                ),
            )
            .into());
        }
        let (x0_line, x0_text) = x0.ok_or_else(|| FormatError::new(0, "missing `x0 <values>` line"))?;
        let x0 = DVector::from_vec(parse_numbers(x0_line, x0_text, region.dim())?);
        if let Some(message) = start_violation(&region, &x0) {
            return Err(FormatError::new(x0_line, message).into());
        }
        let info = ProblemInfo {
            objective: obj_name.clone(),
            source: "problem file".into(),
            smooth: entry.smooth,
            convex: entry.convex,
            ..Default::default()
        };
        Problem::new(name.unwrap_or(obj_name), entry.objective, region, x0, f_low, info)
    }

    /// Problem file text. Only problems whose objective is a registry entry
    /// can be read back.
    pub fn to_file_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name {}", self.name);
        let _ = writeln!(out, "objective {}", self.info.objective);
        let _ = write!(out, "x0");
        for v in self.x0.iter() {
            let _ = write!(out, " {v:?}");
        }
        out.push('\n');
        if let Some(f) = self.f_low {
            let _ = writeln!(out, "fL {f:?}");
        }
        out.push_str(&write_region(&self.region));
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ProblemError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_file_text()).map_err(|source| ProblemError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Description of the most violated constraint at `x`, if any exceeds the
/// feasibility tolerance.
fn start_violation(region: &FeasibleRegion, x: &DVector<f64>) -> Option<String> {
    if region.violation(x) <= FEASIBILITY_TOL {
        return None;
    }
    if region.num_equalities() > 0 {
        let residual = region.eq_matrix() * x - region.eq_rhs();
        let row = residual.iamax();
        let value = residual[row];
        if value.abs() > FEASIBILITY_TOL {
            return Some(format!("x0 violates equality row {row} (residual {value:e})"));
        }
    }
    let values = region.ineq_matrix() * x;
    let mut worst = (0.0, String::new());
    for i in 0..region.num_inequalities() {
        let (lo, up, v) = (region.lower()[i], region.upper()[i], values[i]);
        let describe = |side: &str, bound: f64| {
            if region.is_bound_row(i) {
                let j = region.ineq_matrix().row(i).iter().position(|a| *a != 0.0).unwrap_or(0);
                format!("x0 violates bound row {i} on x[{j}]: {side} bound {bound}, value {v}")
            } else {
                format!("x0 violates inequality row {i}: {side} bound {bound}, value {v}")
            }
        };
        if lo - v > worst.0 {
            worst = (lo - v, describe("lower", lo));
        }
        if v - up > worst.0 {
            worst = (v - up, describe("upper", up));
        }
    }
    Some(worst.1)
}

/// Which constraints an l1 penalty replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyTarget {
    /// General linear inequalities (rows with more than one nonzero).
    LinearInequalities,
    /// Linear equalities.
    LinearEqualities,
    /// Simple bounds.
    Bounds,
    /// The first half (rounded up) of the simple bounds.
    HalfBounds,
}

impl PenaltyTarget {
    pub fn code(self) -> &'static str {
        match self {
            PenaltyTarget::LinearInequalities => "li",
            PenaltyTarget::LinearEqualities => "le",
            PenaltyTarget::Bounds => "b",
            PenaltyTarget::HalfBounds => "halfb",
        }
    }

    /// `(equality rows, inequality rows)` of `region` that are penalized.
    pub fn rows(self, region: &FeasibleRegion) -> (Vec<usize>, Vec<usize>) {
        let bounds: Vec<usize> = (0..region.num_inequalities())
            .filter(|&i| region.is_bound_row(i))
            .collect();
        match self {
            PenaltyTarget::LinearInequalities => (
                Vec::new(),
                (0..region.num_inequalities())
                    .filter(|&i| !region.is_bound_row(i))
                    .collect(),
            ),
            PenaltyTarget::LinearEqualities => ((0..region.num_equalities()).collect(), Vec::new()),
            PenaltyTarget::Bounds => (Vec::new(), bounds),
            PenaltyTarget::HalfBounds => {
                let keep = bounds.len().div_ceil(2);
                (Vec::new(), bounds[..keep].to_vec())
            }
        }
    }
}

impl FromStr for PenaltyTarget {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "li" => Ok(PenaltyTarget::LinearInequalities),
            "le" => Ok(PenaltyTarget::LinearEqualities),
            "b" => Ok(PenaltyTarget::Bounds),
            "halfb" | "1/2b" | "half_b" => Ok(PenaltyTarget::HalfBounds),
            _ => Err(ProblemError::InvalidTransform(s.to_string())),
        }
    }
}

#[derive(Clone)]
pub enum Transform {
    /// `phi(x) (1 + xi(x))` with `xi` uniform on `[-eps, eps)`. The draw is
    /// keyed on `(seed, x)` unless `fresh` is set, in which case every call
    /// draws a new value.
    Noisy { eps: f64, seed: u64, fresh: bool },
    /// Removes the targeted constraints and adds `weight` times the sum of
    /// their violations.
    L1Penalty { weight: f64, target: PenaltyTarget },
    /// Replaces the objective by the maximum of the given functions.
    Minimax(Vec<Arc<dyn Objective>>),
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Noisy { eps, seed, fresh } => f
                .debug_struct("Noisy")
                .field("eps", eps)
                .field("seed", seed)
                .field("fresh", fresh)
                .finish(),
            Transform::L1Penalty { weight, target } => f
                .debug_struct("L1Penalty")
                .field("weight", weight)
                .field("target", target)
                .finish(),
            Transform::Minimax(parts) => write!(f, "Minimax({} parts)", parts.len()),
        }
    }
}

impl Transform {
    pub const DEFAULT_NOISE: f64 = 1e-3;
    pub const DEFAULT_PENALTY: f64 = 100.0;

    pub fn noisy(eps: f64, seed: u64) -> Self {
        Transform::Noisy {
            eps,
            seed,
            fresh: false,
        }
    }

    /// Parses `none`, `noisy:EPS` or `l1:WEIGHT:TARGET` (target one of `li`,
    /// `le`, `b`, `halfb`). Noise is seeded with `seed`.
    pub fn parse(spec: &str, seed: u64) -> Result<Option<Self>, ProblemError> {
        let bad = || ProblemError::InvalidTransform(spec.to_string());
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let transform = match parts[..] {
            ["none"] | [""] => return Ok(None),
            ["noisy"] => Transform::noisy(Self::DEFAULT_NOISE, seed),
            ["noisy", eps] => Transform::noisy(eps.parse().map_err(|_| bad())?, seed),
            ["l1", weight, target] => Transform::L1Penalty {
                weight: weight.parse().map_err(|_| bad())?,
                target: target.parse()?,
            },
            ["l1", target] => Transform::L1Penalty {
                weight: Self::DEFAULT_PENALTY,
                target: target.parse()?,
            },
            _ => return Err(bad()),
        };
        transform.validate()?;
        Ok(Some(transform))
    }

    fn validate(&self) -> Result<(), ProblemError> {
        let ok = match self {
            Transform::Noisy { eps, .. } => *eps > 0.0 && eps.is_finite(),
            Transform::L1Penalty { weight, .. } => *weight > 0.0 && weight.is_finite(),
            Transform::Minimax(parts) => !parts.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(ProblemError::InvalidTransform(format!("{self:?}")))
        }
    }

    /// Short label used in transformed problem names.
    pub fn label(&self) -> String {
        match self {
            Transform::Noisy { eps, .. } => format!("noisy{eps:e}"),
            Transform::L1Penalty { target, .. } => format!("l1{}", target.code()),
            Transform::Minimax(_) => "minimax".into(),
        }
    }

    /// Transformed copy of `problem`. The best known value is kept only for
    /// the minimax transform.
    pub fn apply(&self, problem: &Problem) -> Result<Problem, ProblemError> {
        self.validate()?;
        let base = problem.objective_arc();
        let mut info = problem.info.clone();
        // Transformed objectives are not registry entries.
        info.objective = format!("{}+{}", info.objective, self.label());
        let (objective, region, f_low): (Arc<dyn Objective>, FeasibleRegion, Option<f64>) = match self {
            Transform::Noisy { eps, seed, fresh } => {
                info.smooth = false;
                (
                    Arc::new(NoisyObjective {
                        base,
                        eps: *eps,
                        seed: *seed,
                        calls: fresh.then(|| AtomicU64::new(0)),
                    }),
                    problem.region.clone(),
                    None,
                )
            }
            Transform::L1Penalty { weight, target } => {
                let (eq_rows, ineq_rows) = target.rows(&problem.region);
                let penalty = Penalty::new(&problem.region, &eq_rows, &ineq_rows, *weight);
                info.smooth = info.smooth && penalty.is_empty();
                (
                    Arc::new(PenalizedObjective { base, penalty }),
                    problem.region.without_rows(&eq_rows, &ineq_rows)?,
                    None,
                )
            }
            Transform::Minimax(parts) => {
                info.smooth = false;
                info.convex = false;
                (
                    Arc::new(registry::MaxOf { parts: parts.clone() }),
                    problem.region.clone(),
                    problem.f_low,
                )
            }
        };
        Problem::new(
            format!("{}-{}", problem.name, self.label()),
            objective,
            region,
            problem.x0.clone(),
            f_low,
            info,
        )
    }
}

/// Value of `problem` at `x`, optionally under `transform`.
pub fn evaluate(problem: &Problem, transform: Option<&Transform>, x: &DVector<f64>) -> f64 {
    match transform {
        None => problem.value(x),
        Some(Transform::Noisy { eps, seed, .. }) => noisy_value(problem.value(x), *eps, *seed, x, None),
        Some(Transform::L1Penalty { weight, target }) => {
            let (eq_rows, ineq_rows) = target.rows(problem.region());
            problem.value(x) + Penalty::new(problem.region(), &eq_rows, &ineq_rows, *weight).value(x)
        }
        Some(Transform::Minimax(parts)) => registry::MaxOf { parts: parts.clone() }.value(x),
    }
}

/// FNV-1a over the bit patterns of `x`.
fn hash_point(x: &DVector<f64>) -> u64 {
    struct Fnv(u64);
    impl Hasher for Fnv {
        fn finish(&self) -> u64 {
            self.0
        }
        fn write(&mut self, bytes: &[u8]) {
            for b in bytes {
                self.0 = (self.0 ^ u64::from(*b)).wrapping_mul(0x100_0000_01b3);
            }
        }
    }
    let mut h = Fnv(0xcbf2_9ce4_8422_2325);
    for v in x.iter() {
        // Treat -0.0 and 0.0 as the same point.
        let v = if *v == 0.0 { 0.0f64 } else { *v };
        h.write(&v.to_bits().to_le_bytes());
    }
    h.finish()
}

fn noisy_value(phi: f64, eps: f64, seed: u64, x: &DVector<f64>, call: Option<u64>) -> f64 {
    let key = hash_point(x) ^ seed.rotate_left(32) ^ call.map_or(0, |c| c.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let xi = eps * (2.0 * rng.random::<f64>() - 1.0);
    phi * (1.0 + xi)
}

struct NoisyObjective {
    base: Arc<dyn Objective>,
    eps: f64,
    seed: u64,
    calls: Option<AtomicU64>,
}

impl Objective for NoisyObjective {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let call = self.calls.as_ref().map(|c| c.fetch_add(1, Ordering::Relaxed) + 1);
        noisy_value(self.base.value(x), self.eps, self.seed, x, call)
    }
}

struct Penalty {
    weight: f64,
    equalities: Vec<(DVector<f64>, f64)>,
    inequalities: Vec<(DVector<f64>, f64, f64)>,
}

impl Penalty {
    fn new(region: &FeasibleRegion, eq_rows: &[usize], ineq_rows: &[usize], weight: f64) -> Self {
        Self {
            weight,
            equalities: eq_rows
                .iter()
                .map(|&i| (region.eq_matrix().row(i).transpose(), region.eq_rhs()[i]))
                .collect(),
            inequalities: ineq_rows
                .iter()
                .map(|&i| {
                    (
                        region.ineq_matrix().row(i).transpose(),
                        region.lower()[i],
                        region.upper()[i],
                    )
                })
                .collect(),
        }
    }

    fn is_empty(&self) -> bool {
        self.equalities.is_empty() && self.inequalities.is_empty()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let eq: f64 = self.equalities.iter().map(|(a, b)| (a.dot(x) - b).abs()).sum();
        let ineq: f64 = self
            .inequalities
            .iter()
            .map(|(a, lo, up)| {
                let v = a.dot(x);
                (lo - v).max(0.0) + (v - up).max(0.0)
            })
            .sum();
        self.weight * (eq + ineq)
    }
}

struct PenalizedObjective {
    base: Arc<dyn Objective>,
    penalty: Penalty,
}

impl Objective for PenalizedObjective {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.base.value(x) + self.penalty.value(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        if self.penalty.is_empty() {
            self.base.gradient(x)
        } else {
            None
        }
    }
}
