//! The objective-function interface.

use nalgebra::DVector;

/// A black-box objective `f: R^n -> R`.
///
/// Only [`value`](Objective::value) is used by the solvers. Catalog problems
/// may also provide an analytic gradient, which is used for diagnostics such
/// as the criticality measure, never by the solvers themselves.
pub trait Objective: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }
}

impl<F> Objective for F
where
    F: Fn(&DVector<f64>) -> f64 + Send + Sync,
{
    fn value(&self, x: &DVector<f64>) -> f64 {
        self(x)
    }
}
