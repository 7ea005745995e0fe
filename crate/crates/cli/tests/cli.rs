use std::path::Path;
use std::process::{Command, Output};

fn fle_bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fle-bench"))
        .args(args)
        .output()
        .expect("spawn fle-bench")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn list_shows_the_catalog() {
    let out = fle_bench(&["list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 18);
    assert!(text.contains("lsqfit"));
    assert!(text.contains("pentagon"));
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = fle_bench(&[
        "run",
        "--problems",
        "lsqfit,hs21",
        "--solvers",
        "fle,low",
        "--tau",
        "1e-3",
        "--budget-mult",
        "50",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "results.csv",
        "profiles_1e-3.csv",
        "profiles_1e-3.svg",
        "trace_lsqfit_fle.csv",
        "trace_hs21_low.csv",
    ] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let results = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(lines.next(), Some("tau,problem,solver,t,f_best,evals,f_low"));
    assert_eq!(lines.count(), 4);
    assert!(stdout(&out).contains("tau 1e-3: solved"));
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let common = ["run", "--problems", "smooth", "--budget-mult", "30", "--seed", "3"];
    let mut first: Vec<&str> = common.to_vec();
    first.extend(["--parallel", "1", "--out", path(a.path())]);
    let mut second: Vec<&str> = common.to_vec();
    second.extend(["--parallel", "4", "--out", path(b.path())]);
    assert!(fle_bench(&first).status.success());
    assert!(fle_bench(&second).status.success());
    for name in ["results.csv", "profiles_1e-5.csv", "trace_hs76_low.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn noisy_replications_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = fle_bench(&[
        "run",
        "--problems",
        "hs21,hs35",
        "--transform",
        "noisy:1e-3",
        "--tau",
        "1e-1,1e-3",
        "--replications",
        "3",
        "--fl-source",
        "solvers",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("trace_hs21-noisy1e-3_fle_r2.csv").is_file());
}

#[test]
fn solve_with_config_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("solver.cfg");
    std::fs::write(&config, "# tighter sufficient decrease\nc = 1e-3\nlambda = 2\n").unwrap();
    let trace = dir.path().join("trace.csv");
    let out = fle_bench(&[
        "solve",
        "lsqfit",
        "--budget",
        "120",
        "--config",
        path(&config),
        "--trace",
        path(&trace),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("termination"));
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("k,kind,success"));
}

#[test]
fn exported_files_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = fle_bench(&["export", "--problems", "hs76,quad-eq-8", "--out", path(dir.path())]);
    assert!(out.status.success());
    let file = dir.path().join("hs76.prob");
    let solved = fle_bench(&["solve", path(&file), "--solver", "full"]);
    assert!(solved.status.success(), "{}", String::from_utf8_lossy(&solved.stderr));
    assert!(stdout(&solved).contains("problem      hs76"));
}

#[test]
fn bad_input_is_reported() {
    for args in [
        vec!["solve", "no-such-problem"],
        vec!["solve", "lsqfit", "--solver", "simplex"],
        vec!["solve", "lsqfit", "--transform", "noisy:abc"],
        vec!["run", "--tau", "2", "--out", "/tmp/unused-fle-out"],
    ] {
        let out = fle_bench(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
