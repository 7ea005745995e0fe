//! Euclidean projection onto the feasible polyhedron.
//!
//! With `x = x_ref + W t` the problem `min ||x - z||` becomes the least-distance
//! program `min 1/2 ||t - t0||^2` subject to one-sided rows `c_j^T t >= d_j`,
//! where `t0 = W^T (z - x_ref)`. It is solved by a primal active-set method
//! started from a feasible point, so every iterate stays feasible and the
//! iteration cap can return the current point as a fallback.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::{FeasibleRegion, FEASIBILITY_TOL};

#[derive(Debug, Clone, Error)]
#[error("projection did not converge within {iterations} active-set iterations")]
pub struct ProjectionError {
    pub iterations: usize,
    /// Feasible point reached when the cap was hit.
    pub fallback: DVector<f64>,
}

struct OneSided {
    normal: DVector<f64>,
    rhs: f64,
}

fn one_sided_rows(region: &FeasibleRegion) -> Vec<OneSided> {
    let c = region.reduced_rows();
    let offset = region.ineq_matrix() * region.reference();
    let mut rows = Vec::with_capacity(2 * c.nrows());
    for i in 0..c.nrows() {
        let normal = c.row(i).transpose();
        if region.lower()[i].is_finite() {
            rows.push(OneSided {
                normal: normal.clone(),
                rhs: region.lower()[i] - offset[i],
            });
        }
        if region.upper()[i].is_finite() {
            rows.push(OneSided {
                normal: -normal,
                rhs: offset[i] - region.upper()[i],
            });
        }
    }
    rows
}

pub(super) fn project(
    region: &FeasibleRegion,
    z: &DVector<f64>,
    start: Option<&DVector<f64>>,
) -> Result<DVector<f64>, ProjectionError> {
    let target = region.to_reduced(z);
    if region.num_inequalities() == 0 {
        return Ok(region.from_reduced(&target));
    }
    let mut t = match start {
        Some(s) if region.is_feasible(s, FEASIBILITY_TOL) => region.to_reduced(s),
        _ => DVector::zeros(region.reduced_dim()),
    };
    let rows = one_sided_rows(region);
    let cap = 10 * (region.num_equalities() + region.num_inequalities()).max(2);
    let scale = 1.0 + target.norm() + t.norm();
    let mut working: Vec<usize> = Vec::new();

    for _ in 0..cap {
        let g = &target - &t;
        let (p, lambda) = equality_step(&rows, &working, &g);
        if p.norm() <= 1e-13 * scale {
            // Stationary on the working set: drop the most negative multiplier.
            let worst = lambda
                .iter()
                .enumerate()
                .filter(|(_, &l)| l < -1e-12 * scale)
                .min_by(|a, b| a.1.total_cmp(b.1));
            match worst {
                None => return Ok(region.from_reduced(&t)),
                Some((pos, _)) => {
                    working.remove(pos);
                }
            }
            continue;
        }
        let mut step = 1.0;
        let mut blocking = None;
        for (j, row) in rows.iter().enumerate() {
            if working.contains(&j) {
                continue;
            }
            let slope = row.normal.dot(&p);
            if slope < -1e-15 * row.normal.norm() * p.norm() {
                let ratio = ((row.rhs - row.normal.dot(&t)) / slope).max(0.0);
                if ratio < step {
                    step = ratio;
                    blocking = Some(j);
                }
            }
        }
        t += step * &p;
        if let Some(j) = blocking {
            working.push(j);
        }
    }
    Err(ProjectionError {
        iterations: cap,
        fallback: region.from_reduced(&t),
    })
}

/// Solves `min 1/2 ||p - g||^2` with `c_j^T p = 0` for `j` in the working set.
/// Returns the step and the multipliers of the working rows, whose signs are
/// the KKT signs of the original `>=` constraints.
fn equality_step(rows: &[OneSided], working: &[usize], g: &DVector<f64>) -> (DVector<f64>, Vec<f64>) {
    if working.is_empty() {
        return (g.clone(), Vec::new());
    }
    let dim = g.len();
    let n = DMatrix::from_fn(dim, working.len(), |r, c| rows[working[c]].normal[r]);
    let gram = n.tr_mul(&n);
    let rhs = -n.tr_mul(g);
    let lambda = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(working.len())),
    };
    let p = g + &n * &lambda;
    (p, lambda.iter().copied().collect())
}
