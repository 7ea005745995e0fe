use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fle_core::bench::{run_matrix, solved_fraction, write_artifacts, FlSource, MatrixConfig};
use fle_core::driver::SolverMode;
use fle_core::{catalog, solve, Problem, SolverConfig, Transform};

#[derive(Parser)]
#[command(name = "fle-bench", version, about = "Full-low evaluation solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver-by-problem matrix and write results, profiles and traces.
    Run(RunArgs),
    /// List the built-in problems.
    List,
    /// Solve one problem and print the outcome.
    Solve(SolveArgs),
    /// Write problems as text files.
    Export {
        /// Problem names, `all`, `smooth` or problem file paths.
        #[arg(long, default_value = "all")]
        problems: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated problem names, `all`, `smooth` or problem file paths.
    #[arg(long, default_value = "all")]
    problems: String,
    #[arg(long, default_value = "fle,full,low")]
    solvers: String,
    #[arg(long, default_value = "1e-3,1e-5")]
    tau: String,
    #[arg(long, default_value_t = 100)]
    budget_mult: usize,
    /// `none`, `noisy:EPS` or `l1:LAMBDA:TARGET` with TARGET in li, le, b, halfb.
    #[arg(long, default_value = "none")]
    transform: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    replications: usize,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    /// `catalog` or `solvers`.
    #[arg(long, default_value = "catalog")]
    fl_source: String,
    /// Budget multiplier of the extra runs used for a cross-solver f_L.
    #[arg(long)]
    fl_budget_mult: Option<usize>,
    /// Solver parameter file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem name or problem file path.
    problem: String,
    #[arg(long, default_value = "fle")]
    solver: String,
    /// Evaluation budget; defaults to 100(n + 1).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value = "none")]
    transform: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::List => {
            list();
            Ok(())
        }
        Command::Solve(args) => solve_one(args),
        Command::Export { problems, out } => export(&problems, &out),
    }
}

fn load_problems(list: &str) -> Result<Vec<Problem>> {
    match list.trim() {
        "all" => return Ok(catalog::catalog()),
        "smooth" => return Ok(catalog::smooth()),
        _ => {}
    }
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let problem = if Path::new(item).is_file() {
            Problem::load(item)?
        } else {
            catalog::by_name(item)?
        };
        out.push(problem);
    }
    if out.is_empty() {
        bail!("no problems selected");
    }
    Ok(out)
}

fn load_config(path: Option<&Path>) -> Result<SolverConfig> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SolverConfig::parse(&text).with_context(|| format!("in {}", path.display()))
        }
        None => Ok(SolverConfig::default()),
    }
}

fn apply_transform(problems: Vec<Problem>, spec: &str, seed: u64) -> Result<Vec<Problem>> {
    match Transform::parse(spec, seed)? {
        Some(transform) => problems
            .iter()
            .map(|p| transform.apply(p).map_err(Into::into))
            .collect(),
        None => Ok(problems),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let problems = apply_transform(load_problems(&args.problems)?, &args.transform, args.seed)?;
    let mut config = MatrixConfig::new(problems);
    config.solvers = args
        .solvers
        .split(',')
        .map(|s| s.trim().parse::<SolverMode>())
        .collect::<Result<_, _>>()
        .map_err(anyhow::Error::msg)?;
    config.taus = args
        .tau
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad tau `{t}`")))
        .collect::<Result<_>>()?;
    config.budget_mult = args.budget_mult;
    config.base = load_config(args.config.as_deref())?;
    config.seed = args.seed;
    config.replications = args.replications;
    config.parallel = args.parallel;
    config.fl_source = args.fl_source.parse::<FlSource>()?;
    config.fl_budget_mult = args.fl_budget_mult;

    let outcome = run_matrix(&config)?;
    write_artifacts(&outcome, &args.out).with_context(|| format!("writing to {}", args.out.display()))?;

    for cell in &outcome.runs {
        if let Err(e) = &cell.outcome {
            eprintln!("{} / {}: {e}", cell.problem, cell.solver);
        }
    }
    for (tau, rows) in &outcome.results {
        let fractions: Vec<String> = config
            .solvers
            .iter()
            .map(|s| format!("{} {:.3}", s.name(), solved_fraction(rows, s.name())))
            .collect();
        println!("tau {tau:e}: solved {}", fractions.join(", "));
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn list() {
    println!("{:<16} {:>3} {:>3} {:>3} {:>14}  kind", "name", "n", "m", "mI", "f_L");
    for p in catalog::catalog() {
        let region = p.region();
        let f_low = p.f_low().map_or("-".to_string(), |v| format!("{v:.8}"));
        let kind = match (p.info().smooth, p.info().convex) {
            (true, true) => "smooth convex",
            (true, false) => "smooth",
            (false, true) => "nonsmooth convex",
            (false, false) => "nonsmooth",
        };
        println!(
            "{:<16} {:>3} {:>3} {:>3} {:>14}  {kind}",
            p.name(),
            p.dim(),
            region.num_equalities(),
            region.num_inequalities(),
            f_low
        );
    }
}

fn solve_one(args: SolveArgs) -> Result<()> {
    let problems = apply_transform(load_problems(&args.problem)?, &args.transform, args.seed)?;
    let [problem] = &problems[..] else {
        bail!("expected exactly one problem");
    };
    let mut config = load_config(args.config.as_deref())?;
    config.mode = args.solver.parse().map_err(anyhow::Error::msg)?;
    config.budget = args.budget.unwrap_or(100 * (problem.dim() + 1));
    config.seed = args.seed;
    let record = solve(problem, &config)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, record.trace_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("problem      {}", problem.name());
    println!("solver       {}", config.mode);
    println!("f0           {:e}", record.initial_f());
    println!("f            {:e}", record.final_f());
    if let Some(f_low) = problem.f_low() {
        println!("f_L          {f_low:e}");
    }
    println!("evals        {} / {}", record.evals_used(), config.budget);
    println!("iterations   {}", record.iterations.len());
    println!("termination  {}", record.termination.name());
    let x: Vec<String> = record.final_x().iter().map(|v| format!("{v:.8}")).collect();
    println!("x            [{}]", x.join(", "));
    Ok(())
}

fn export(list: &str, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    for problem in load_problems(list)? {
        let path = out.join(format!("{}.prob", problem.name()));
        problem.save(&path)?;
        println!("{}", path.display());
    }
    Ok(())
}
