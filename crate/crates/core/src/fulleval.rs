//! Full-Eval iterations: forward finite-difference gradients reduced to the
//! null space of the equality constraints, the criticality step, BFGS
//! inverse-Hessian updates and the projected backtracking line search with
//! the switching condition `beta >= gamma * alpha`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::{FeasibleRegion, ProjectionError};
use crate::objective::Objective;

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchParams {
    /// Initial trial step `beta_bar`.
    pub beta_bar: f64,
    /// Backtracking factor in (0, 1).
    pub tau: f64,
    /// Sufficient-decrease constant in (0, 1).
    pub c: f64,
    /// Switching constant: trial steps below `gamma * alpha` end the search.
    pub gamma: f64,
    /// Curvature threshold for skipping BFGS updates.
    pub eps_c: f64,
    /// Finite-difference parameter.
    pub h: f64,
    /// Criticality-step constant `u_g'`.
    pub u_g_prime: f64,
    /// Criticality-step shrink factor in (0, 1).
    pub omega: f64,
    /// Inner-iteration cap of the criticality step.
    pub j_max: usize,
    /// Use a backward difference for probes that leave the inequality set.
    pub fd_respect_bounds: bool,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            beta_bar: 1.0,
            tau: 0.5,
            c: 1e-4,
            gamma: 1.0,
            eps_c: 1e-10,
            h: f64::EPSILON.sqrt(),
            u_g_prime: 1.0,
            omega: 0.5,
            j_max: 20,
            fd_respect_bounds: false,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<(), String> {
        let checks = [
            (self.beta_bar > 0.0, "beta_bar must be positive"),
            (self.tau > 0.0 && self.tau < 1.0, "tau must lie in (0, 1)"),
            (self.c > 0.0 && self.c < 1.0, "c must lie in (0, 1)"),
            (self.gamma > 0.0, "gamma must be positive"),
            (self.eps_c > 0.0 && self.eps_c < 1.0, "eps_c must lie in (0, 1)"),
            (self.h > 0.0, "h must be positive"),
            (self.u_g_prime > 0.0, "u_g_prime must be positive"),
            (self.omega > 0.0 && self.omega < 1.0, "omega must lie in (0, 1)"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err((*msg).to_string()),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum FullEvalError {
    #[error("objective is not finite at finite-difference probe {index}")]
    NonFiniteProbe { index: usize, evals: usize },
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

/// Forward differences `[(f(x + h w_i) - f(x)) / h]_i` along the columns `w_i`
/// of the null-space basis. `fx` is `f(x)` and is not re-evaluated.
///
/// With `respect_bounds`, a probe that leaves the inequality set by more than
/// `1e-12` is replaced by the backward probe `x - h w_i`.
pub fn fd_reduced_gradient(
    f: &dyn Objective,
    region: &FeasibleRegion,
    x: &DVector<f64>,
    fx: f64,
    h: f64,
    respect_bounds: bool,
) -> Result<(DVector<f64>, usize), FullEvalError> {
    let basis = region.basis();
    let mut g = DVector::zeros(basis.ncols());
    for (i, w) in basis.column_iter().enumerate() {
        let mut step = h;
        let mut probe = x + w * step;
        if respect_bounds && region.violation(&probe) > 1e-12 {
            step = -h;
            probe = x + w * step;
        }
        let fp = f.value(&probe);
        if !fp.is_finite() {
            return Err(FullEvalError::NonFiniteProbe { index: i, evals: i + 1 });
        }
        g[i] = (fp - fx) / step;
    }
    Ok((g, basis.ncols()))
}

/// Projected step `q = P(x - W g_r) - x` for a reduced gradient.
fn projected_step(
    region: &FeasibleRegion,
    x: &DVector<f64>,
    g_r: &DVector<f64>,
) -> Result<DVector<f64>, ProjectionError> {
    let p = region.project_from(&(x - region.lift(g_r)), x)?;
    Ok(p - x)
}

#[derive(Debug, Clone)]
pub struct CriticalityOutcome {
    /// Final finite-difference parameter.
    pub h: f64,
    pub gradient: DVector<f64>,
    /// `P(x - W g_r) - x` for the final gradient.
    pub q: DVector<f64>,
    /// Objective evaluations spent inside the step.
    pub evals: usize,
    /// Inner iterations performed.
    pub iterations: usize,
    /// The inner-iteration cap was reached with the test still failing, which
    /// signals that `x` is (numerically) stationary.
    pub converged: bool,
}

/// Shrinks `h` until `h <= u_g' ||q^h||`, recomputing the finite-difference
/// gradient each time with `h_j = omega^j u_g' ||q^(0)||`.
///
/// `gradient` must be the finite-difference gradient at `h0`.
#[allow(clippy::too_many_arguments)]
pub fn criticality_step(
    f: &dyn Objective,
    region: &FeasibleRegion,
    x: &DVector<f64>,
    fx: f64,
    gradient: DVector<f64>,
    h0: f64,
    params: &LineSearchParams,
) -> Result<CriticalityOutcome, FullEvalError> {
    let q0 = projected_step(region, x, &gradient)?;
    let q0_norm = q0.norm();
    let mut out = CriticalityOutcome {
        h: h0,
        gradient,
        q: q0,
        evals: 0,
        iterations: 0,
        converged: false,
    };
    if out.h <= params.u_g_prime * q0_norm {
        return Ok(out);
    }
    if q0_norm == 0.0 {
        out.converged = true;
        return Ok(out);
    }
    while out.h > params.u_g_prime * out.q.norm() {
        if out.iterations == params.j_max {
            out.converged = true;
            break;
        }
        out.iterations += 1;
        out.h = params.omega.powi(out.iterations as i32) * params.u_g_prime * q0_norm;
        let (g, evals) = match fd_reduced_gradient(f, region, x, fx, out.h, params.fd_respect_bounds) {
            Ok(v) => v,
            Err(FullEvalError::NonFiniteProbe { index, evals }) => {
                return Err(FullEvalError::NonFiniteProbe {
                    index,
                    evals: out.evals + evals,
                })
            }
            Err(e) => return Err(e),
        };
        out.evals += evals;
        out.q = projected_step(region, x, &g)?;
        out.gradient = g;
    }
    Ok(out)
}

/// BFGS update of an inverse-Hessian approximation.
///
/// Returns `h` unchanged (and `false`) when `s^T y < eps_c ||s|| ||y||` or the
/// curvature is not positive.
pub fn bfgs_update(h: &DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>, eps_c: f64) -> (DMatrix<f64>, bool) {
    let sy = s.dot(y);
    if !(sy > 0.0) || sy < eps_c * s.norm() * y.norm() {
        return (h.clone(), false);
    }
    let rho = 1.0 / sy;
    let n = h.nrows();
    let left = DMatrix::identity(n, n) - rho * s * y.transpose();
    let mut next = &left * h * left.transpose() + rho * s * s.transpose();
    next = (&next + next.transpose()) * 0.5;
    (next, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scaling {
    /// No Full-Eval iteration has run yet.
    Fresh,
    /// The first iteration succeeded; the scaling waits for the first (s, y).
    Awaiting,
    Done(f64),
}

/// Inverse-Hessian approximation and the data of the previous Full-Eval
/// iteration.
#[derive(Debug, Clone)]
pub struct FullEvalState {
    inverse_hessian: DMatrix<f64>,
    previous: Option<(DVector<f64>, DVector<f64>)>,
    backtracks: usize,
    scaling: Scaling,
}

impl FullEvalState {
    pub fn new(reduced_dim: usize) -> Self {
        Self {
            inverse_hessian: DMatrix::identity(reduced_dim, reduced_dim),
            previous: None,
            backtracks: 0,
            scaling: Scaling::Fresh,
        }
    }

    pub fn inverse_hessian(&self) -> &DMatrix<f64> {
        &self.inverse_hessian
    }

    /// Backtrack count of the last Full-Eval iteration.
    pub fn backtracks(&self) -> usize {
        self.backtracks
    }

    /// `(x, g_r)` of the previous Full-Eval iteration.
    pub fn previous(&self) -> Option<(&DVector<f64>, &DVector<f64>)> {
        self.previous.as_ref().map(|(x, g)| (x, g))
    }

    /// Multiple of the identity chosen for the initial matrix, once decided:
    /// `y^T s / y^T y` after a successful first iteration, `1` otherwise.
    pub fn initial_scaling(&self) -> Option<f64> {
        match self.scaling {
            Scaling::Done(v) => Some(v),
            _ => None,
        }
    }
}

/// Lower limit for the trial step of the line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFloor {
    /// Stop once `beta < gamma * alpha` and hand over to Low-Eval.
    Switching,
    /// Keep backtracking while `beta >= floor` (pure Full-Eval runs). A
    /// quasi-Newton direction that is not a descent direction is replaced by
    /// the projected gradient direction and the matrix is reset to identity.
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullEvalStatus {
    /// Sufficient decrease with `beta >= gamma * alpha`.
    Success,
    /// The line search reached its floor; the iterate is unchanged.
    Failure,
    /// The criticality step ran out of inner iterations.
    CriticalityConverged,
}

#[derive(Debug, Clone)]
pub struct FullEvalOutcome {
    pub status: FullEvalStatus,
    pub x_next: DVector<f64>,
    pub f_next: f64,
    /// Accepted step, on success.
    pub step: Option<f64>,
    /// `g^T (x_proj - x)` with the lifted gradient `g = W g_r`.
    pub slope: f64,
    pub backtracks: usize,
    pub evals: usize,
    /// Whether the BFGS update was applied this iteration.
    pub updated: bool,
}

/// One Full-Eval iteration from the feasible point `x` with `fx = f(x)`.
///
/// The Low-Eval step size `alpha` only enters through the switching floor and
/// is never modified.
#[allow(clippy::too_many_arguments)]
pub fn full_eval_iteration(
    state: &mut FullEvalState,
    f: &dyn Objective,
    region: &FeasibleRegion,
    x: &DVector<f64>,
    fx: f64,
    alpha: f64,
    params: &LineSearchParams,
    floor: StepFloor,
) -> Result<FullEvalOutcome, FullEvalError> {
    let mut evals = 0;
    let unchanged = |status, evals, backtracks| FullEvalOutcome {
        status,
        x_next: x.clone(),
        f_next: fx,
        step: None,
        slope: 0.0,
        backtracks,
        evals,
        updated: false,
    };

    let (g0, n0) = match fd_reduced_gradient(f, region, x, fx, params.h, params.fd_respect_bounds) {
        Ok(v) => v,
        Err(FullEvalError::NonFiniteProbe { evals, .. }) => {
            state.backtracks = 0;
            return Ok(unchanged(FullEvalStatus::Failure, evals, 0));
        }
        Err(e) => return Err(e),
    };
    evals += n0;

    let crit = match criticality_step(f, region, x, fx, g0, params.h, params) {
        Ok(c) => c,
        Err(FullEvalError::NonFiniteProbe { evals: extra, .. }) => {
            state.backtracks = 0;
            return Ok(unchanged(FullEvalStatus::Failure, evals + extra, 0));
        }
        Err(e) => return Err(e),
    };
    evals += crit.evals;
    if crit.converged {
        return Ok(unchanged(FullEvalStatus::CriticalityConverged, evals, 0));
    }
    let g = crit.gradient;

    let mut updated = false;
    if let Some((x_prev, g_prev)) = &state.previous {
        let s = region.basis().tr_mul(&(x - x_prev));
        let y = &g - g_prev;
        if state.scaling == Scaling::Awaiting {
            let sy = s.dot(&y);
            let yy = y.dot(&y);
            let scale = if sy > 0.0 && sy >= params.eps_c * s.norm() * y.norm() && yy > 0.0 {
                sy / yy
            } else {
                1.0
            };
            let d = state.inverse_hessian.nrows();
            state.inverse_hessian = DMatrix::identity(d, d) * scale;
            state.scaling = Scaling::Done(scale);
        }
        let (next, did) = bfgs_update(&state.inverse_hessian, &s, &y, params.eps_c);
        state.inverse_hessian = next;
        updated = did;
    }

    let lifted_gradient = region.lift(&g);
    let direction = -region.lift(&(&state.inverse_hessian * &g));
    let mut d = region.project_from(&(x + &direction), x)? - x;
    let mut slope = lifted_gradient.dot(&d);
    if matches!(floor, StepFloor::Absolute(_)) && slope >= 0.0 {
        let dim = state.inverse_hessian.nrows();
        state.inverse_hessian = DMatrix::identity(dim, dim);
        d = region.project_from(&(x - &lifted_gradient), x)? - x;
        slope = lifted_gradient.dot(&d);
    }

    let beta_min = match floor {
        StepFloor::Switching => params.gamma * alpha,
        StepFloor::Absolute(v) => v,
    };
    let mut beta = params.beta_bar;
    let mut backtracks = 0;
    let mut accepted: Option<(DVector<f64>, f64)> = None;
    let usable = d.norm() > 1e-15 * (1.0 + x.norm()) && !(matches!(floor, StepFloor::Absolute(_)) && slope >= 0.0);
    if usable {
        while beta >= beta_min {
            let trial = x + beta * &d;
            let ft = f.value(&trial);
            evals += 1;
            if ft.is_finite() && ft <= fx + params.c * beta * slope {
                accepted = Some((trial, ft));
                break;
            }
            beta *= params.tau;
            backtracks += 1;
        }
    }

    state.previous = Some((x.clone(), g));
    state.backtracks = backtracks;
    if state.scaling == Scaling::Fresh {
        state.scaling = if accepted.is_some() {
            Scaling::Awaiting
        } else {
            Scaling::Done(1.0)
        };
    }

    Ok(match accepted {
        Some((x_next, f_next)) => FullEvalOutcome {
            status: FullEvalStatus::Success,
            x_next,
            f_next,
            step: Some(beta),
            slope,
            backtracks,
            evals,
            updated,
        },
        None => FullEvalOutcome {
            slope,
            updated,
            ..unchanged(FullEvalStatus::Failure, evals, backtracks)
        },
    })
}
