use fle_core::problems::{PenaltyTarget, ProblemError};
use fle_core::{catalog, solve, DVector, Problem, SolverConfig, Transform};

#[test]
fn catalog_survives_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    for problem in catalog::catalog() {
        if problem.info().objective.contains('+') {
            // Transformed objectives have no registry entry.
            continue;
        }
        let path = dir.path().join(format!("{}.prob", problem.name()));
        problem.save(&path).unwrap();
        let back = Problem::load(&path).unwrap();
        assert_eq!(back.name(), problem.name());
        assert_eq!(back.x0(), problem.x0());
        assert_eq!(back.f_low(), problem.f_low());
        assert_eq!(back.value(back.x0()), problem.value(problem.x0()));
        let config = SolverConfig::with_budget(60);
        assert_eq!(solve(&back, &config).unwrap(), solve(&problem, &config).unwrap());
    }
}

#[test]
fn hand_written_file_loads() {
    let text = "\
# line fit with a budget constraint
name fit
objective lsqfit
x0 0.1 0.1
2 0 2
1 1
1 0
-inf 0
0.85 inf
0 0
";
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fit.prob");
    std::fs::write(&path, text).unwrap();
    match Problem::load(&path) {
        Ok(problem) => {
            assert_eq!(problem.name(), "fit");
            assert_eq!(problem.dim(), 2);
            assert_eq!(problem.region().num_inequalities(), 2);
        }
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn missing_file_names_the_path() {
    let err = Problem::load("/nonexistent/dir/p.prob").err().unwrap();
    assert!(matches!(err, ProblemError::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/dir/p.prob"));
}

#[test]
fn penalty_is_exact_on_the_feasible_set() {
    let base = catalog::by_name("hs76").unwrap();
    for target in [
        PenaltyTarget::LinearInequalities,
        PenaltyTarget::Bounds,
        PenaltyTarget::HalfBounds,
    ] {
        let penalized = Transform::L1Penalty { weight: 100.0, target }.apply(&base).unwrap();
        for x in [base.x0().clone(), DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5])] {
            assert!(base.region().is_feasible(&x, 1e-12));
            assert_eq!(penalized.value(&x), base.value(&x));
        }
        assert!(penalized.region().num_inequalities() < base.region().num_inequalities());
    }
}
