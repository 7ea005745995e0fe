use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use fle_core::driver::{IterationKind, SolverMode, Termination};
use fle_core::{catalog, solve_objective, DVector, Objective, RunRecord, SolverConfig};

struct Counting {
    inner: Arc<dyn Objective>,
    calls: AtomicUsize,
}

impl Objective for Counting {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }
}

fn runs(budget_mult: usize) -> Vec<(String, SolverMode, usize, usize, RunRecord)> {
    let mut out = Vec::new();
    for problem in catalog::catalog() {
        for mode in SolverMode::ALL {
            let counting = Counting {
                inner: problem.objective_arc(),
                calls: AtomicUsize::new(0),
            };
            let budget = budget_mult * (problem.dim() + 1);
            let config = SolverConfig::with_budget(budget).with_mode(mode).with_seed(7);
            let record = solve_objective(&counting, problem.region(), problem.x0(), &config).unwrap();
            out.push((
                problem.name().to_string(),
                mode,
                budget,
                counting.calls.into_inner(),
                record,
            ));
        }
    }
    out
}

#[test]
fn recorded_evaluations_match_actual_calls() {
    for (name, mode, _, calls, record) in runs(40) {
        assert_eq!(record.evals_used(), calls, "{name} {mode}");
        let counts: Vec<usize> = record.history().map(|(e, _)| e).collect();
        assert_eq!(counts[0], 1);
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{name} {mode}");
    }
}

#[test]
fn budget_is_checked_before_every_iteration() {
    for (name, mode, budget, _, record) in runs(40) {
        let rows = &record.iterations;
        for (i, r) in rows.iter().enumerate() {
            let before = if i == 0 { 1 } else { rows[i - 1].evals };
            assert!(before < budget, "{name} {mode}: iteration {i} started at {before}");
            if r.kind == IterationKind::LowEval {
                assert!(r.evals <= budget, "{name} {mode}");
            }
        }
        if record.termination == Termination::Budget {
            assert!(record.evals_used() >= budget);
        }
    }
}

#[test]
fn iteration_kinds_follow_the_switching_rule() {
    for (name, mode, _, _, record) in runs(100) {
        let rows = &record.iterations;
        match mode {
            SolverMode::FullOnly => assert!(rows.iter().all(|r| r.kind == IterationKind::FullEval)),
            SolverMode::LowOnly => assert!(rows.iter().all(|r| r.kind == IterationKind::LowEval)),
            SolverMode::Fle => {
                let mut expected = IterationKind::FullEval;
                let mut allowance = 1;
                let mut failures = 0;
                for r in rows {
                    assert_eq!(r.kind, expected, "{name} k={}", r.k);
                    match r.kind {
                        IterationKind::FullEval if !r.success => {
                            expected = IterationKind::LowEval;
                            allowance = r.backtracks.max(1);
                            failures = 0;
                        }
                        IterationKind::FullEval => {}
                        IterationKind::LowEval => {
                            failures = if r.success { 0 } else { failures + 1 };
                            if failures >= allowance {
                                expected = IterationKind::FullEval;
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn successful_iterations_decrease_and_failures_keep_the_iterate() {
    for (name, mode, _, _, record) in runs(40) {
        let mut f_prev = record.initial_f();
        let mut x_prev = record.x0.clone();
        for r in &record.iterations {
            if r.success && r.kind == IterationKind::LowEval {
                assert!(r.f < f_prev, "{name} {mode} k={}", r.k);
            } else if r.success {
                // Sufficient decrease is a non-strict test.
                assert!(r.f <= f_prev, "{name} {mode} k={}", r.k);
            } else {
                assert_eq!(r.f, f_prev);
                assert_eq!(r.x, x_prev);
            }
            f_prev = r.f;
            x_prev = r.x.clone();
        }
    }
}
