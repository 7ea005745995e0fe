//! Low-Eval iterations: feasible direct search polling a random subset of the
//! generators of the approximate tangent cone `T(x, alpha)`.

use nalgebra::DVector;
use rand::Rng;

use crate::geometry::{sample_polling_directions, tangent_cone_generators, FeasibleRegion, GeometryError};
use crate::objective::Objective;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectSearchParams {
    /// Expansion factor after a successful poll.
    pub lambda: f64,
    /// Contraction factor after an unsuccessful poll.
    pub theta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Fraction of pointed generators polled per iteration.
    pub count_fraction: f64,
}

impl Default for DirectSearchParams {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            theta: 0.5,
            gamma1: 1e-5,
            gamma2: 1e-5,
            count_fraction: 0.5,
        }
    }
}

impl DirectSearchParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda >= 1.0) {
            return Err("lambda must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err("theta must lie in (0, 1)".into());
        }
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return Err("gamma1 and gamma2 must be positive".into());
        }
        if !(self.count_fraction > 0.0 && self.count_fraction <= 1.0) {
            return Err("count_fraction must lie in (0, 1]".into());
        }
        Ok(())
    }
}

/// Forcing function `min(gamma1, gamma2 * alpha^2)`.
pub fn forcing(alpha: f64, gamma1: f64, gamma2: f64) -> f64 {
    gamma1.min(gamma2 * alpha * alpha)
}

/// Reduced-space unit polling directions at `x` for the cone parameter `xi`.
pub fn polling_set<R: Rng + ?Sized>(
    region: &FeasibleRegion,
    x: &DVector<f64>,
    xi: f64,
    count_fraction: f64,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>, GeometryError> {
    let active = region.approx_active_sets(x, xi)?;
    let normals = region.normal_cone_generators(&active);
    let cone = tangent_cone_generators(&normals, region.reduced_dim())?;
    Ok(sample_polling_directions(&cone, count_fraction, rng))
}

#[derive(Debug, Clone)]
pub struct LowEvalOutcome {
    pub success: bool,
    pub x_next: DVector<f64>,
    pub f_next: f64,
    pub alpha_next: f64,
    pub evals: usize,
    /// Full-space polling directions in evaluation order.
    pub directions: Vec<DVector<f64>>,
}

/// One Low-Eval iteration with opportunistic polling.
///
/// Polling stops at the first point with `f <= f(x) - rho(alpha)` or when
/// `max_evals` evaluations have been spent.
#[allow(clippy::too_many_arguments)]
pub fn low_eval_iteration<R: Rng + ?Sized>(
    f: &dyn Objective,
    region: &FeasibleRegion,
    x: &DVector<f64>,
    fx: f64,
    alpha: f64,
    params: &DirectSearchParams,
    rng: &mut R,
    max_evals: usize,
) -> Result<LowEvalOutcome, GeometryError> {
    let reduced = polling_set(region, x, alpha, params.count_fraction, rng)?;
    let directions: Vec<DVector<f64>> = reduced.iter().map(|d| region.lift(d)).collect();
    let threshold = fx - forcing(alpha, params.gamma1, params.gamma2);
    let mut evals = 0;
    for d in &directions {
        if evals == max_evals {
            break;
        }
        let trial = x + alpha * d;
        let ft = f.value(&trial);
        evals += 1;
        if ft <= threshold {
            return Ok(LowEvalOutcome {
                success: true,
                x_next: trial,
                f_next: ft,
                alpha_next: params.lambda * alpha,
                evals,
                directions,
            });
        }
    }
    Ok(LowEvalOutcome {
        success: false,
        x_next: x.clone(),
        f_next: fx,
        alpha_next: params.theta * alpha,
        evals,
        directions,
    })
}
