//! Experiment runner binary. Resolves flags over an optional JSON config
//! (flags win), executes the run or sweep, and reports artifact locations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use omep::cli::{execute_run, execute_sweep, validate_grid, Comparator, ExperimentConfig};
use omep::engine::{Algorithm, StepSchedule};
use omep::problem::{ConstraintCount, EpsSign};
use omep::Error;

#[derive(Parser)]
#[command(
    name = "omep",
    about = "Online distributed equilibrium tracking under coupled inequality constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one configured experiment and write its artifact directories.
    Run(RunArgs),
    /// Execute a grid of (a, b) schedule exponents and write sweep.csv.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Exponent grid as colon pairs: "0.5:0.34,0.6:0.42".
    #[arg(long)]
    pairs: Option<String>,
}

#[derive(Args)]
struct CommonArgs {
    /// Built-in experiment: 1 (tracking game) or 2 (quantity game).
    #[arg(long)]
    example: Option<u8>,
    /// JSON config file; explicit flags override its fields. A run
    /// manifest.json is accepted here too.
    #[arg(long)]
    config: Option<PathBuf>,
    /// exact | stochastic
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Seed for stochastic runs; repeat the flag for multi-seed studies.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Primal step exponent override.
    #[arg(long)]
    a: Option<f64>,
    /// Dual step exponent override.
    #[arg(long)]
    b: Option<f64>,
    /// Exit nonzero unless every certificate check passes.
    #[arg(long)]
    verify: bool,
    /// paper | capacity: sign convention of the quantity game's capacities.
    #[arg(long = "epsilon-sign")]
    epsilon_sign: Option<String>,
    /// 5 | 6: how many agents contribute constraints in the tracking game.
    #[arg(long = "constraint-count")]
    constraint_count: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Residual tolerance for the centralized reference solver.
    #[arg(long = "oracle-tol")]
    oracle_tol: Option<f64>,
    /// auto | closed-form | oracle: comparator path for regret and the
    /// solutions sidecar (oracle = constrained per-round solve).
    #[arg(long)]
    comparator: Option<String>,
    /// Worker threads for multi-seed parallelism (default: sequential).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> omep::Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let config = resolve(&args.common)?;
            let summary = execute_run(&config)?;
            for o in &summary.outcomes {
                println!(
                    "run {}: certificate {} (final R/T {:.6}, final R^g/T {:.6})",
                    o.dir.display(),
                    if o.report.overall_pass { "pass" } else { "FAIL" },
                    o.final_regret_over_t,
                    o.final_violation_over_t,
                );
            }
            if config.verify {
                if let Some(failure) = summary.first_failure() {
                    eprintln!("certificate failure: {failure}");
                    return Ok(ExitCode::FAILURE);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let mut config = resolve(&args.common)?;
            if let Some(pairs) = &args.pairs {
                config.sweep_grid = Some(parse_pairs(pairs)?);
            }
            if let Some(grid) = &config.sweep_grid {
                validate_grid(grid)?;
            }
            let rows = execute_sweep(&config)?;
            println!("a,b,final_regret_over_t,final_violation_over_t,wall_seconds");
            for r in &rows {
                println!(
                    "{},{},{},{},{:.3}",
                    r.a, r.b, r.final_regret_over_t, r.final_violation_over_t, r.wall_seconds
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn resolve(args: &CommonArgs) -> omep::Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let example = args.example.ok_or_else(|| {
                Error::InvalidConfig("example: required (pass --example or --config)".into())
            })?;
            ExperimentConfig::new(example)
        }
    };
    if let Some(example) = args.example {
        config.example = example;
    }
    if let Some(algorithm) = &args.algorithm {
        config.algorithm = Some(match algorithm.as_str() {
            "exact" => Algorithm::Exact,
            "stochastic" => Algorithm::Stochastic,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "algorithm: expected exact or stochastic, got {other}"
                )))
            }
        });
    }
    if let Some(horizon) = args.horizon {
        config.horizon = Some(horizon);
    }
    if !args.seeds.is_empty() {
        config.seeds = args.seeds.clone();
    }
    if let Some(sign) = &args.epsilon_sign {
        config.epsilon_sign = Some(match sign.as_str() {
            "paper" => EpsSign::Paper,
            "capacity" => EpsSign::Capacity,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "epsilon-sign: expected paper or capacity, got {other}"
                )))
            }
        });
    }
    if let Some(count) = &args.constraint_count {
        config.constraint_count = Some(match count.as_str() {
            "5" => ConstraintCount::Five,
            "6" => ConstraintCount::Six,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "constraint-count: expected 5 or 6, got {other}"
                )))
            }
        });
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    if let Some(tol) = args.oracle_tol {
        config.oracle_tol = Some(tol);
    }
    if let Some(comparator) = &args.comparator {
        config.comparator = Some(match comparator.as_str() {
            "auto" => Comparator::Auto,
            "closed-form" | "closed_form" => Comparator::ClosedForm,
            "oracle" => Comparator::Oracle,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "comparator: expected auto, closed-form, or oracle, got {other}"
                )))
            }
        });
    }
    if let Some(workers) = args.workers {
        config.workers = Some(workers);
    }
    if args.verify {
        config.verify = true;
    }
    // Exponent overrides apply to whatever schedule the config resolves to,
    // so fill defaults first.
    if args.a.is_some() || args.b.is_some() {
        config.finalize();
        let mut sched = config.schedule.expect("finalized");
        match &mut sched {
            StepSchedule::TimeVarying { a, b, .. } | StepSchedule::Fixed { a, b, .. } => {
                if let Some(v) = args.a {
                    *a = v;
                }
                if let Some(v) = args.b {
                    *b = v;
                }
            }
        }
        config.schedule = Some(sched);
    }
    Ok(config)
}

fn parse_pairs(text: &str) -> omep::Result<Vec<(f64, f64)>> {
    let mut grid = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (a, b) = item
            .split_once(':')
            .ok_or_else(|| Error::InvalidConfig(format!("pairs: expected a:b, got \"{item}\"")))?;
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("pairs: bad exponent \"{a}\"")))?;
        let b: f64 = b
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("pairs: bad exponent \"{b}\"")))?;
        grid.push((a, b));
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig("pairs: empty grid".into()));
    }
    Ok(grid)
}
