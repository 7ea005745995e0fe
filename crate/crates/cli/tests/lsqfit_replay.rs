mod support;

use fle_core::bench::convergence_eval_count;
use fle_core::driver::IterationKind;
use fle_core::{catalog, solve, DMatrix, DVector, SolverConfig};
use support::brute_force_projection;

fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>, fx: f64) -> DVector<f64> {
    let h = f64::EPSILON.sqrt();
    DVector::from_fn(x.len(), |i, _| {
        let mut probe = x.clone();
        probe[i] += h;
        (f(&probe) - fx) / h
    })
}

fn bfgs(h: &DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
    let rho = 1.0 / s.dot(y);
    let hy = h * y;
    h + s * s.transpose() * (rho * (1.0 + rho * y.dot(&hy))) - (&hy * s.transpose() + s * hy.transpose()) * rho
}

/// Replays the first two Full-Eval iterations by hand: no equalities, so the
/// basis is the identity and the line search accepts the unit step.
#[test]
fn first_two_full_eval_iterations_match_hand_replay() {
    let problem = catalog::by_name("lsqfit").unwrap();
    let region = problem.region();
    let f = |x: &DVector<f64>| problem.value(x);
    let c = 1e-4;

    let x0 = problem.x0().clone();
    let f0 = f(&x0);
    let g0 = fd_gradient(f, &x0, f0);
    let d0 = brute_force_projection(region, &(&x0 - &g0)) - &x0;
    let x1 = &x0 + &d0;
    let f1 = f(&x1);
    assert!(f1 <= f0 + c * g0.dot(&d0));
    assert!((f1 - 0.757826).abs() < 1e-9, "corner value {f1}");

    let g1 = fd_gradient(f, &x1, f1);
    let s = &x1 - &x0;
    let y = &g1 - &g0;
    let h0 = DMatrix::identity(2, 2) * (y.dot(&s) / y.dot(&y));
    let h1 = bfgs(&h0, &s, &y);
    let d1 = brute_force_projection(region, &(&x1 - &h1 * &g1)) - &x1;
    let x2 = &x1 + &d1;
    let f2 = f(&x2);
    assert!(f2 <= f1 + c * g1.dot(&d1));

    let record = solve(&problem, &SolverConfig::with_budget(300)).unwrap();
    let rows = &record.iterations;
    assert_eq!(rows[0].kind, IterationKind::FullEval);
    assert_eq!(rows[1].kind, IterationKind::FullEval);
    assert_eq!((rows[0].evals, rows[1].evals), (4, 7));
    assert_eq!((rows[0].step, rows[1].step), (Some(1.0), Some(1.0)));
    assert!((&rows[0].x - &x1).norm() < 1e-10);
    assert!((&rows[1].x - &x2).norm() < 1e-8, "{} vs {}", rows[1].x, x2);
    assert!((rows[1].f - f2).abs() < 1e-9);
}

/// Replays the convergence test row by row from the written trace.
#[test]
fn convergence_count_matches_row_replay() {
    let problem = catalog::by_name("lsqfit").unwrap();
    let record = solve(&problem, &SolverConfig::with_budget(300)).unwrap();
    let f0 = record.initial_f();
    let f_low = problem.f_low().unwrap();
    let csv = record.trace_csv();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let f_col = header.iter().position(|h| *h == "f").unwrap();
    let evals_col = header.iter().position(|h| *h == "evals").unwrap();
    for tau in [1e-1, 1e-3, 1e-5, 1e-7] {
        let mut replay = (f0 - f0 >= (1.0 - tau) * (f0 - f_low)).then_some(1);
        if replay.is_none() {
            for line in csv.lines().skip(1) {
                let cells: Vec<&str> = line.split(',').collect();
                let f: f64 = cells[f_col].parse().unwrap();
                if f0 - f >= (1.0 - tau) * (f0 - f_low) {
                    replay = Some(cells[evals_col].parse().unwrap());
                    break;
                }
            }
        }
        assert_eq!(
            convergence_eval_count(&record, f0, f_low, tau).unwrap(),
            replay,
            "tau {tau}"
        );
    }
    assert!(lines.count() > 0);
}
