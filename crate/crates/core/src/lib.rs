//! Derivative-free minimization under bound and linear constraints with the
//! full-low evaluation scheme.
//!
//! A run alternates two kinds of iterations:
//!
//! * **Full-Eval**: a forward finite-difference gradient in the null space of
//!   the equality constraints, a BFGS inverse-Hessian estimate and a projected
//!   backtracking line search. The line search is abandoned as soon as the
//!   trial step falls below `gamma * alpha`, which hands control over to
//! * **Low-Eval**: a probabilistic feasible direct-search iteration that polls
//!   a random subset of the generators of an approximate tangent cone.
//!
//! The crate is organised as follows:
//!
//! * [`geometry`]: the feasible polyhedron, projection, approximate active
//!   sets and tangent-cone generators.
//! * [`fulleval`] and [`loweval`]: the two iteration kinds.
//! * [`driver`]: the outer loop, configuration and run traces.
//! * [`problems`]: objectives, the test-problem catalog and transforms.
//! * [`bench`]: convergence tests, performance profiles and the matrix runner.
//!
//! ```
//! use fle_core::{catalog, solve, SolverConfig};
//!
//! let problem = catalog::by_name("lsqfit").unwrap();
//! let config = SolverConfig::with_budget(300);
//! let record = solve(&problem, &config).unwrap();
//! assert!(record.final_f() < record.initial_f());
//! ```

// Negated comparisons send NaN to the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod driver;
pub mod fulleval;
pub mod geometry;
pub mod loweval;
pub mod objective;
pub mod problems;

pub use driver::{
    solve, solve_objective, IterationKind, IterationRecord, RunRecord, SolveError, SolverConfig, SolverMode,
    Termination,
};
pub use fulleval::{FullEvalState, LineSearchParams};
pub use geometry::{ActiveSet, ConeGenerators, FeasibleRegion, GeometryError, ProjectionError};
pub use loweval::DirectSearchParams;
pub use objective::Objective;
pub use problems::{catalog, Problem, ProblemError, Transform};

pub use nalgebra::{DMatrix, DVector};
