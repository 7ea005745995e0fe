//! Named objective functions available to problem files.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::objective::Objective;

/// `1/2 x^T Q x + c^T x + k`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
}

impl Quadratic {
    pub fn new(hessian: DMatrix<f64>, linear: DVector<f64>, constant: f64) -> Self {
        Self {
            hessian,
            linear,
            constant,
        }
    }

    /// `1/2 (x - center)^T Q (x - center)`.
    pub fn centered(hessian: DMatrix<f64>, center: &DVector<f64>) -> Self {
        let linear = -(&hessian * center);
        let constant = 0.5 * center.dot(&(&hessian * center));
        Self::new(hessian, linear, constant)
    }

    /// `||J x - r||^2`.
    pub fn least_squares(jacobian: &DMatrix<f64>, rhs: &DVector<f64>) -> Self {
        Self::new(
            2.0 * jacobian.tr_mul(jacobian),
            -2.0 * jacobian.tr_mul(rhs),
            rhs.norm_squared(),
        )
    }
}

impl Objective for Quadratic {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x) + self.constant
    }

    fn gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(&self.hessian * x + &self.linear)
    }
}

/// Pointwise maximum of finitely many functions.
#[derive(Clone)]
pub struct MaxOf {
    pub parts: Vec<Arc<dyn Objective>>,
}

impl Objective for MaxOf {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.parts.iter().map(|p| p.value(x)).fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Smooth {
    value: fn(&DVector<f64>) -> f64,
    gradient: fn(&DVector<f64>) -> DVector<f64>,
}

impl Objective for Smooth {
    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some((self.gradient)(x))
    }
}

/// Data of the two-parameter line fit.
pub const LSQFIT_A: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const LSQFIT_B: [f64; 5] = [0.25, 0.3, 0.625, 0.701, 1.0];

fn lsqfit() -> Quadratic {
    let jacobian = DMatrix::from_fn(5, 2, |r, c| if c == 0 { LSQFIT_A[r] } else { 1.0 });
    Quadratic::least_squares(&jacobian, &DVector::from_row_slice(&LSQFIT_B))
}

fn hs24_value(x: &DVector<f64>) -> f64 {
    ((x[0] - 3.0).powi(2) - 9.0) * x[1].powi(3) / (27.0 * 3f64.sqrt())
}

fn hs24_gradient(x: &DVector<f64>) -> DVector<f64> {
    let s = 27.0 * 3f64.sqrt();
    DVector::from_vec(vec![
        2.0 * (x[0] - 3.0) * x[1].powi(3) / s,
        3.0 * ((x[0] - 3.0).powi(2) - 9.0) * x[1].powi(2) / s,
    ])
}

fn rosenbrock_value(x: &DVector<f64>) -> f64 {
    100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
}

fn rosenbrock_gradient(x: &DVector<f64>) -> DVector<f64> {
    let r = x[1] - x[0] * x[0];
    DVector::from_vec(vec![-400.0 * x[0] * r - 2.0 * (1.0 - x[0]), 200.0 * r])
}

fn tridiagonal(n: usize, diag: f64, off: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |r, c| match r.abs_diff(c) {
        0 => diag,
        1 => off,
        _ => 0.0,
    })
}

fn quad_box_10() -> Quadratic {
    let center = DVector::from_fn(10, |i, _| 0.5 + 0.8 * if i % 2 == 0 { 1.0 } else { -1.0 });
    Quadratic::centered(tridiagonal(10, 2.0, -0.5), &center)
}

fn quad_box_20() -> Quadratic {
    let n = 20;
    let hessian = DMatrix::from_fn(n, n, |r, c| 0.1 + if r == c { 0.1 * (r + 1) as f64 } else { 0.0 });
    let center = DVector::from_fn(n, |i, _| 2.0 * ((i + 1) as f64).sin());
    Quadratic::centered(hessian, &center)
}

fn quad_eq_8() -> Quadratic {
    let weights = DVector::from_fn(8, |i, _| 2.0 * (i + 1) as f64);
    let center = DVector::from_fn(8, |i, _| i as f64 / 4.0);
    Quadratic::centered(DMatrix::from_diagonal(&weights), &center)
}

fn quad_ineq_6() -> Quadratic {
    let mut hessian = DMatrix::identity(6, 6) * 2.0;
    let u = DVector::from_vec(vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
    let v = DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0, -1.0, 0.0]);
    hessian += 2.0 * &u * u.transpose() + &v * v.transpose();
    Quadratic::new(hessian, DVector::from_element(6, -2.0), 6.0)
}

fn quad_simplex_5() -> Quadratic {
    let n = 5;
    let cov = DMatrix::from_fn(n, n, |r, c| {
        0.1 * (-(r.abs_diff(c) as f64)).exp() + if r == c { 0.05 } else { 0.0 }
    });
    let mean = DVector::from_fn(n, |i, _| (i + 1) as f64 / 5.0);
    Quadratic::new(2.0 * cov, -0.1 * mean, 0.0)
}

/// Partial functions of the MAD1 minimax problem.
pub fn mad1_parts() -> Vec<Arc<dyn Objective>> {
    vec![
        Arc::new(|x: &DVector<f64>| x[0] * x[0] + x[1] * x[1] + x[0] * x[1] - 1.0),
        Arc::new(|x: &DVector<f64>| x[0].sin()),
        Arc::new(|x: &DVector<f64>| -x[1].cos()),
    ]
}

/// Partial functions of the PENTAGON minimax problem: negated distances
/// between consecutive points `(x[2i], x[2i+1])`, cyclically.
pub fn pentagon_parts() -> Vec<Arc<dyn Objective>> {
    (0..3)
        .map(|i| {
            let j = (i + 1) % 3;
            Arc::new(move |x: &DVector<f64>| -(x[2 * i] - x[2 * j]).hypot(x[2 * i + 1] - x[2 * j + 1]))
                as Arc<dyn Objective>
        })
        .collect()
}

/// Unit normals `(cos(2 pi j / 5), sin(2 pi j / 5))` of the pentagon sides.
pub fn pentagon_normals() -> [(f64, f64); 5] {
    std::array::from_fn(|j| {
        let t = 2.0 * PI * j as f64 / 5.0;
        (t.cos(), t.sin())
    })
}

/// A registry objective with its dimension.
#[derive(Clone)]
pub struct Entry {
    pub name: &'static str,
    pub dim: usize,
    pub objective: Arc<dyn Objective>,
    /// Continuously differentiable.
    pub smooth: bool,
    pub convex: bool,
}

pub const NAMES: [&str; 16] = [
    "lsqfit",
    "hs21",
    "hs24",
    "hs28",
    "hs35",
    "hs48",
    "hs76",
    "simpllpa",
    "rosenbrock",
    "quad-box-10",
    "quad-box-20",
    "quad-eq-8",
    "quad-ineq-6",
    "quad-simplex-5",
    "mad1",
    "pentagon",
];

/// Looks up a built-in objective by name.
pub fn lookup(name: &str) -> Option<Entry> {
    let dm = |rows: usize, cols: usize, data: &[f64]| DMatrix::from_row_slice(rows, cols, data);
    let dv = |data: &[f64]| DVector::from_row_slice(data);
    let quad = |q: Quadratic| -> Arc<dyn Objective> { Arc::new(q) };
    let (name, dim, objective, smooth, convex): (&'static str, usize, Arc<dyn Objective>, bool, bool) = match name {
        "lsqfit" => ("lsqfit", 2, quad(lsqfit()), true, true),
        "hs21" => (
            "hs21",
            2,
            quad(Quadratic::new(
                dm(2, 2, &[0.02, 0.0, 0.0, 2.0]),
                dv(&[0.0, 0.0]),
                -100.0,
            )),
            true,
            true,
        ),
        "hs24" => (
            "hs24",
            2,
            Arc::new(Smooth {
                value: hs24_value,
                gradient: hs24_gradient,
            }),
            true,
            false,
        ),
        "hs28" => (
            "hs28",
            3,
            quad(Quadratic::new(
                dm(3, 3, &[2.0, 2.0, 0.0, 2.0, 4.0, 2.0, 0.0, 2.0, 2.0]),
                dv(&[0.0; 3]),
                0.0,
            )),
            true,
            true,
        ),
        "hs35" => (
            "hs35",
            3,
            quad(Quadratic::new(
                dm(3, 3, &[4.0, 2.0, 2.0, 2.0, 4.0, 0.0, 2.0, 0.0, 2.0]),
                dv(&[-8.0, -6.0, -4.0]),
                9.0,
            )),
            true,
            true,
        ),
        "hs48" => (
            "hs48",
            5,
            quad(Quadratic::new(
                dm(
                    5,
                    5,
                    &[
                        2.0, 0.0, 0.0, 0.0, 0.0, //
                        0.0, 2.0, -2.0, 0.0, 0.0, //
                        0.0, -2.0, 2.0, 0.0, 0.0, //
                        0.0, 0.0, 0.0, 2.0, -2.0, //
                        0.0, 0.0, 0.0, -2.0, 2.0,
                    ],
                ),
                dv(&[-2.0, 0.0, 0.0, 0.0, 0.0]),
                1.0,
            )),
            true,
            true,
        ),
        "hs76" => (
            "hs76",
            4,
            quad(Quadratic::new(
                dm(
                    4,
                    4,
                    &[
                        2.0, 0.0, -1.0, 0.0, //
                        0.0, 1.0, 0.0, 0.0, //
                        -1.0, 0.0, 2.0, 1.0, //
                        0.0, 0.0, 1.0, 1.0,
                    ],
                ),
                dv(&[-1.0, -3.0, 1.0, -1.0]),
                0.0,
            )),
            true,
            true,
        ),
        "simpllpa" => (
            "simpllpa",
            2,
            quad(Quadratic::new(DMatrix::zeros(2, 2), dv(&[2.0, 1.0]), 0.0)),
            true,
            true,
        ),
        "rosenbrock" => (
            "rosenbrock",
            2,
            Arc::new(Smooth {
                value: rosenbrock_value,
                gradient: rosenbrock_gradient,
            }),
            true,
            false,
        ),
        "quad-box-10" => ("quad-box-10", 10, quad(quad_box_10()), true, true),
        "quad-box-20" => ("quad-box-20", 20, quad(quad_box_20()), true, true),
        "quad-eq-8" => ("quad-eq-8", 8, quad(quad_eq_8()), true, true),
        "quad-ineq-6" => ("quad-ineq-6", 6, quad(quad_ineq_6()), true, true),
        "quad-simplex-5" => ("quad-simplex-5", 5, quad(quad_simplex_5()), true, true),
        "mad1" => ("mad1", 2, Arc::new(MaxOf { parts: mad1_parts() }), false, false),
        "pentagon" => (
            "pentagon",
            6,
            Arc::new(MaxOf {
                parts: pentagon_parts(),
            }),
            false,
            false,
        ),
        _ => return None,
    };
    Some(Entry {
        name,
        dim,
        objective,
        smooth,
        convex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn fd_gradient(f: &dyn Objective, x: &DVector<f64>) -> DVector<f64> {
        let h = 1e-6;
        DVector::from_fn(x.len(), |i, _| {
            let mut p = x.clone();
            let mut m = x.clone();
            p[i] += h;
            m[i] -= h;
            (f.value(&p) - f.value(&m)) / (2.0 * h)
        })
    }

    #[test]
    fn every_name_resolves_with_its_dimension() {
        for name in NAMES {
            let entry = lookup(name).unwrap();
            assert_eq!(entry.name, name);
            let x = DVector::from_fn(entry.dim, |i, _| 0.3 + 0.1 * i as f64);
            assert!(entry.objective.value(&x).is_finite());
            if let Some(g) = entry.objective.gradient(&x) {
                let fd = fd_gradient(entry.objective.as_ref(), &x);
                assert!((g - &fd).amax() <= 1e-5 * (1.0 + fd.amax()), "{name}");
            }
        }
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn lsqfit_value_at_upper_corner() {
        let f = lookup("lsqfit").unwrap().objective;
        assert!((f.value(&dvector![0.0, 0.85]) - 0.757826).abs() < 1e-12);
    }

    #[test]
    fn hs_values_at_known_minimizers() {
        let f = |n: &str, x: DVector<f64>| lookup(n).unwrap().objective.value(&x);
        assert!((f("hs21", dvector![2.0, 0.0]) + 99.96).abs() < 1e-12);
        assert!((f("hs24", dvector![3.0, 3f64.sqrt()]) + 1.0).abs() < 1e-12);
        assert!((f("hs35", dvector![4.0 / 3.0, 7.0 / 9.0, 4.0 / 9.0]) - 1.0 / 9.0).abs() < 1e-12);
        assert!(f("hs28", dvector![0.5, -0.5, 0.5]).abs() < 1e-15);
        assert!(f("hs48", dvector![1.0, 1.0, 1.0, 1.0, 1.0]).abs() < 1e-15);
        assert!((f("rosenbrock", dvector![1.0, 1.0])).abs() < 1e-15);
    }
}
