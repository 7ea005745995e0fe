//! Built-in test problems.
//!
//! Best known values were computed offline by enumeration of KKT systems
//! (quadratics and the LP), projected gradient iterations (`quad-box-20`) and
//! multistart local refinement of the epigraph form (minimax problems).
//! Starting points from the literature are used where they are feasible.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::registry::{self, pentagon_normals};
use super::{PenaltyTarget, Problem, ProblemError, ProblemInfo, Transform};
use crate::geometry::FeasibleRegion;

const INF: f64 = f64::INFINITY;

/// Names of the catalog problems in catalog order.
pub const NAMES: [&str; 17] = [
    "lsqfit",
    "lsqfit-l1",
    "hs21",
    "hs24",
    "hs28",
    "hs35",
    "hs48",
    "hs76",
    "simpllpa",
    "rosenbrock-box",
    "quad-box-10",
    "quad-box-20",
    "quad-eq-8",
    "quad-ineq-6",
    "quad-simplex-5",
    "mad1",
    "pentagon",
];

struct Definition {
    name: &'static str,
    objective: &'static str,
    eq: (Vec<Vec<f64>>, Vec<f64>),
    /// `(row, lower, upper)`.
    ineq: Vec<(Vec<f64>, f64, f64)>,
    x0: Vec<f64>,
    f_low: f64,
    listed_as: Option<&'static str>,
    source: &'static str,
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

fn bounds(n: usize, lower: f64, upper: f64) -> Vec<(Vec<f64>, f64, f64)> {
    (0..n).map(|i| (unit(n, i), lower, upper)).collect()
}

fn build(def: Definition) -> Problem {
    let n = def.x0.len();
    let entry = registry::lookup(def.objective).expect("catalog objectives are registered");
    let (eq_rows, eq_rhs) = def.eq;
    let a = DMatrix::from_fn(eq_rows.len(), n, |r, c| eq_rows[r][c]);
    let a_i = DMatrix::from_fn(def.ineq.len(), n, |r, c| def.ineq[r].0[c]);
    let lower = DVector::from_iterator(def.ineq.len(), def.ineq.iter().map(|r| r.1));
    let upper = DVector::from_iterator(def.ineq.len(), def.ineq.iter().map(|r| r.2));
    let x0 = DVector::from_vec(def.x0);
    let region = FeasibleRegion::new(a, DVector::from_vec(eq_rhs), a_i, lower, upper, x0.clone())
        .unwrap_or_else(|e| panic!("catalog region {}: {e}", def.name));
    let info = ProblemInfo {
        objective: def.objective.to_string(),
        listed_as: def.listed_as.map(str::to_string),
        source: def.source.to_string(),
        smooth: entry.smooth,
        convex: entry.convex,
    };
    Problem::new(def.name, entry.objective, region, x0, Some(def.f_low), info)
        .unwrap_or_else(|e| panic!("catalog problem {}: {e}", def.name))
}

fn no_eq() -> (Vec<Vec<f64>>, Vec<f64>) {
    (Vec::new(), Vec::new())
}

fn lsqfit() -> Problem {
    build(Definition {
        name: "lsqfit",
        objective: "lsqfit",
        eq: no_eq(),
        ineq: vec![(vec![1.0, 1.0], -INF, 0.85), (vec![1.0, 0.0], 0.0, INF)],
        x0: vec![0.0, 0.0],
        f_low: 0.06757397575757576,
        listed_as: Some("lsqfit"),
        source: "line fit a x + y ~ b with x + y <= 0.85, x >= 0; x0 chosen at the origin",
    })
}

fn lsqfit_l1() -> Problem {
    let penalized = Transform::L1Penalty {
        weight: Transform::DEFAULT_PENALTY,
        target: PenaltyTarget::LinearInequalities,
    }
    .apply(&lsqfit())
    .expect("penalizing lsqfit keeps x0 feasible");
    let mut problem = penalized.with_name("lsqfit-l1").with_f_low(Some(0.06757397575757576));
    problem.info.source = "lsqfit with x + y <= 0.85 moved into an l1 penalty of weight 100".into();
    problem
}

fn definitions() -> Vec<Definition> {
    let s3 = 3f64.sqrt();
    let mut pentagon_rows = Vec::new();
    for point in 0..3 {
        for (c, s) in pentagon_normals() {
            let mut row = vec![0.0; 6];
            row[2 * point] = c;
            row[2 * point + 1] = s;
            pentagon_rows.push((row, -INF, 1.0));
        }
    }
    let mut hs35 = bounds(3, 0.0, INF);
    hs35.push((vec![1.0, 1.0, 2.0], -INF, 3.0));
    let mut hs76 = bounds(4, 0.0, INF);
    hs76.extend([
        (vec![1.0, 2.0, 1.0, 1.0], -INF, 5.0),
        (vec![3.0, 1.0, 2.0, -1.0], -INF, 4.0),
        (vec![0.0, 1.0, 4.0, 0.0], 1.5, INF),
    ]);
    let mut simpllpa = bounds(2, 0.0, INF);
    simpllpa.extend([(vec![1.0, 1.0], 1.0, INF), (vec![1.0, 2.0], 2.0, INF)]);
    let mut hs24 = vec![(vec![1.0 / s3, -1.0], 0.0, INF), (vec![1.0, s3], 0.0, 6.0)];
    hs24.extend(bounds(2, 0.0, INF));

    vec![
        Definition {
            name: "hs21",
            objective: "hs21",
            eq: no_eq(),
            ineq: vec![
                (vec![1.0, 0.0], 2.0, 50.0),
                (vec![0.0, 1.0], -50.0, 50.0),
                (vec![10.0, -1.0], 10.0, INF),
            ],
            x0: vec![10.0, 5.0],
            f_low: -99.96,
            listed_as: Some("hs21"),
            source: "Hock-Schittkowski 21; the standard x0 (-1, -1) is infeasible",
        },
        Definition {
            name: "hs24",
            objective: "hs24",
            eq: no_eq(),
            ineq: hs24,
            x0: vec![1.0, 0.5],
            f_low: -1.0,
            listed_as: Some("hs24"),
            source: "Hock-Schittkowski 24; both-sided row merges 0 <= x1 + sqrt(3) x2 <= 6",
        },
        Definition {
            name: "hs28",
            objective: "hs28",
            eq: (vec![vec![1.0, 2.0, 3.0]], vec![1.0]),
            ineq: Vec::new(),
            x0: vec![-4.0, 1.0, 1.0],
            f_low: 0.0,
            listed_as: Some("hs28"),
            source: "Hock-Schittkowski 28 with its standard x0",
        },
        Definition {
            name: "hs35",
            objective: "hs35",
            eq: no_eq(),
            ineq: hs35,
            x0: vec![0.5; 3],
            f_low: 1.0 / 9.0,
            listed_as: Some("hs35"),
            source: "Hock-Schittkowski 35 with its standard x0",
        },
        Definition {
            name: "hs48",
            objective: "hs48",
            eq: (vec![vec![1.0; 5], vec![0.0, 0.0, 1.0, -2.0, -2.0]], vec![5.0, -3.0]),
            ineq: Vec::new(),
            x0: vec![3.0, 5.0, -3.0, 2.0, -2.0],
            f_low: 0.0,
            listed_as: Some("hs48"),
            source: "Hock-Schittkowski 48 with its standard x0",
        },
        Definition {
            name: "hs76",
            objective: "hs76",
            eq: no_eq(),
            ineq: hs76,
            x0: vec![0.5; 4],
            f_low: -103.0 / 22.0,
            listed_as: Some("hs76"),
            source: "Hock-Schittkowski 76 with its standard x0",
        },
        Definition {
            name: "simpllpa",
            objective: "simpllpa",
            eq: no_eq(),
            ineq: simpllpa,
            x0: vec![1.0, 1.0],
            f_low: 1.0,
            listed_as: Some("simpllpa"),
            source: "min 2 x1 + x2 s.t. x1 + x2 >= 1, x1 + 2 x2 >= 2, x >= 0",
        },
        Definition {
            name: "rosenbrock-box",
            objective: "rosenbrock",
            eq: no_eq(),
            ineq: vec![(vec![1.0, 0.0], -2.0, 0.5), (vec![0.0, 1.0], -1.0, 2.0)],
            x0: vec![-1.2, 1.0],
            f_low: 0.25,
            listed_as: None,
            source: "Rosenbrock with a box excluding (1, 1)",
        },
        Definition {
            name: "quad-box-10",
            objective: "quad-box-10",
            eq: no_eq(),
            ineq: bounds(10, 0.0, 1.0),
            x0: vec![0.5; 10],
            f_low: 1.304999999999998,
            listed_as: None,
            source: "tridiagonal convex quadratic centered outside the unit box",
        },
        Definition {
            name: "quad-box-20",
            objective: "quad-box-20",
            eq: no_eq(),
            ineq: bounds(20, -1.0, 1.0),
            x0: vec![0.0; 20],
            f_low: 3.7245160955047236,
            listed_as: None,
            source: "diagonal plus rank-one convex quadratic on [-1, 1]^20",
        },
        Definition {
            name: "quad-eq-8",
            objective: "quad-eq-8",
            eq: (
                vec![vec![1.0; 8], vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]],
                vec![4.0, 0.0],
            ),
            ineq: bounds(8, 0.0, 1.0),
            x0: vec![0.5; 8],
            f_low: 14.46880453752182,
            listed_as: None,
            source: "weighted distance to (0, 1/4, ..., 7/4) with two equalities and a box",
        },
        Definition {
            name: "quad-ineq-6",
            objective: "quad-ineq-6",
            eq: no_eq(),
            ineq: vec![
                (vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0], -INF, 1.0),
                (vec![0.0, 0.0, 0.0, 1.0, -1.0, 0.0], -0.5, INF),
                (vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0], -INF, 0.8),
                (vec![0.0, 0.0, 1.0, 0.0, 0.0, -1.0], -1.0, 0.2),
                (vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0], -INF, 0.6),
            ],
            x0: vec![0.0; 6],
            f_low: 1.916279069767441,
            listed_as: None,
            source: "convex quadratic with general one- and two-sided inequalities",
        },
        Definition {
            name: "quad-simplex-5",
            objective: "quad-simplex-5",
            eq: (vec![vec![1.0; 5]], vec![1.0]),
            ineq: bounds(5, 0.0, INF),
            x0: vec![0.2; 5],
            f_low: -0.02046852129175796,
            listed_as: None,
            source: "mean-variance portfolio on the unit simplex",
        },
        Definition {
            name: "mad1",
            objective: "mad1",
            eq: no_eq(),
            ineq: vec![(vec![1.0, 1.0], 0.5, INF)],
            x0: vec![1.0, 2.0],
            f_low: -0.3896595160972892,
            listed_as: Some("mad1"),
            source: "minimax of three functions with x1 + x2 >= 0.5 and its standard x0",
        },
        Definition {
            name: "pentagon",
            objective: "pentagon",
            eq: no_eq(),
            ineq: pentagon_rows,
            x0: vec![-1.0, 0.0, 0.0, -1.0, 0.5, 0.5],
            f_low: -1.8596186959420258,
            listed_as: Some("pentagon"),
            source: "three points in a regular pentagon maximizing their smallest distance; x0 chosen feasible",
        },
    ]
}

/// All catalog problems in catalog order.
pub fn catalog() -> Vec<Problem> {
    let mut out = vec![lsqfit(), lsqfit_l1()];
    out.extend(definitions().into_iter().map(build));
    out
}

pub fn by_name(name: &str) -> Result<Problem, ProblemError> {
    match name {
        "lsqfit" => Ok(lsqfit()),
        "lsqfit-l1" => Ok(lsqfit_l1()),
        _ => definitions()
            .into_iter()
            .find(|s| s.name == name)
            .map(build)
            .ok_or_else(|| ProblemError::UnknownProblem(name.to_string())),
    }
}

/// Resolves a comma-separated list of catalog names, or `all`.
pub fn select(list: &str) -> Result<Vec<Problem>, ProblemError> {
    if list.trim() == "all" {
        return Ok(catalog());
    }
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(by_name)
        .collect()
}

/// Catalog problems with continuously differentiable objectives.
pub fn smooth() -> Vec<Problem> {
    catalog().into_iter().filter(|p| p.info().smooth).collect()
}

/// Minimax catalog problems with their partial functions.
pub fn minimax_parts(name: &str) -> Option<Vec<Arc<dyn crate::Objective>>> {
    match name {
        "mad1" => Some(registry::mad1_parts()),
        "pentagon" => Some(registry::pentagon_parts()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FEASIBILITY_TOL;

    #[test]
    fn names_match_catalog_order() {
        let names: Vec<String> = catalog().iter().map(|p| p.name().to_string()).collect();
        assert_eq!(names, NAMES);
        for name in NAMES {
            assert_eq!(by_name(name).unwrap().name(), name);
        }
        assert!(by_name("hs999").is_err());
    }

    #[test]
    fn lsqfit_shape() {
        let p = by_name("lsqfit").unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.region().num_equalities(), 0);
        assert_eq!(p.region().num_inequalities(), 2);
    }

    #[test]
    fn every_start_is_feasible_with_finite_value() {
        for p in catalog() {
            assert!(p.region().violation(p.x0()) <= FEASIBILITY_TOL, "{}", p.name());
            assert!(p.value(p.x0()).is_finite());
            assert!(p.f_low().unwrap() <= p.value(p.x0()), "{}", p.name());
        }
    }

    #[test]
    fn at_least_ten_smooth_convex_problems() {
        let count = catalog().iter().filter(|p| p.info().smooth && p.info().convex).count();
        assert!(count >= 10, "{count}");
    }

    #[test]
    fn select_lists() {
        assert_eq!(select("all").unwrap().len(), NAMES.len());
        let two = select("hs21, mad1").unwrap();
        assert_eq!(two[1].name(), "mad1");
        assert!(select("hs21,unknown").is_err());
    }
}
