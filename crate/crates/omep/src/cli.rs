//! Config-driven experiment runner: resolves a JSON config (with flag
//! overrides applied by the binary), executes runs, and emits the artifact
//! set per run directory: manifest, trace CSV, metrics CSV, certificate
//! JSON, and the solution-path sidecar.
//!
//! Determinism contract: identical resolved config and seed produce
//! byte-identical metrics and trace CSVs, independent of the worker count,
//! because each run executes sequentially in its own directory and workers
//! only schedule whole runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{run_exact, run_stochastic, write_trace_csv, Algorithm, RunTrace, StepSchedule};
use crate::geometry::BregmanGeometry;
use crate::graph::{five_agent_sequence, six_agent_ring_sequence, GraphSequence};
use crate::metrics::{
    certificate_check, collect_standard, write_metrics_csv, CertificateReport, SolutionProvider,
};
use crate::oracle::{component_std, NoiseModel};
use crate::problem::{example1, example2, ConstraintCount, EpsSign, MepInstance};
use crate::{Error, Result};

/// Everything a run needs. Optional fields resolve to per-example defaults in
/// [`ExperimentConfig::finalize`]; the binary applies flag overrides before
/// that. A written manifest embeds the fully resolved form, so a manifest is
/// itself a loadable config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Built-in selector: 1 (tracking game) or 2 (quantity game).
    pub example: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_sign: Option<EpsSign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_count: Option<ConstraintCount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<StepSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub verify: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_tol: Option<f64>,
    /// Comparator path for regret, path length, and the solutions sidecar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator: Option<Comparator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// (a, b) exponent pairs for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_grid: Option<Vec<(f64, f64)>>,
}

/// Graph source: a built-in name ("six-agent-ring", "five-agent-cycle") or a
/// JSON file of weighted adjacency matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Builtin(String),
    File { path: PathBuf },
}

/// Which per-round comparator the metrics measure against. The tracking
/// game's declared closed form is the unconstrained aggregate minimizer and
/// leaves the coupled feasible region on part of its cycle, so the two
/// non-auto choices genuinely differ there: `closed_form` keeps the
/// declared comparator, `oracle` solves the constrained instantaneous
/// problem each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    /// Closed form when the instance declares one, oracle otherwise.
    Auto,
    ClosedForm,
    Oracle,
}

impl ExperimentConfig {
    pub fn new(example: u8) -> Self {
        Self {
            example,
            epsilon_sign: None,
            constraint_count: None,
            graph: None,
            algorithm: None,
            schedule: None,
            horizon: None,
            seeds: Vec::new(),
            init: None,
            out: None,
            verify: false,
            oracle_tol: None,
            comparator: None,
            noise: None,
            workers: None,
            sweep_grid: None,
        }
    }

    /// Loads a config file. A run manifest (an object with a `config` key)
    /// is accepted as-is, so re-running from a manifest reproduces the run.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)?;
        let config_value = match value {
            Value::Object(ref map) if map.contains_key("config") => map["config"].clone(),
            other => other,
        };
        Ok(serde_json::from_value(config_value)?)
    }

    /// Fills every unset field with its per-example default. Idempotent.
    pub fn finalize(&mut self) {
        let horizon = *self.horizon.get_or_insert(match self.example {
            2 => 100,
            _ => 2000,
        });
        self.algorithm.get_or_insert(Algorithm::Exact);
        self.epsilon_sign.get_or_insert(EpsSign::Capacity);
        self.constraint_count.get_or_insert(ConstraintCount::Six);
        self.oracle_tol.get_or_insert(1e-8);
        self.comparator.get_or_insert(Comparator::Auto);
        self.out.get_or_insert_with(|| PathBuf::from("out"));
        self.schedule.get_or_insert(match self.example {
            // Canonical settings: (20t+8)^{-a} decay for the tracking game,
            // (T+30)^{-a} constants for the quantity game.
            2 => StepSchedule::Fixed { a: 0.5, b: 1.0 / 3.0, horizon, offset: 30.0 },
            _ => StepSchedule::TimeVarying { a: 0.5, b: 1.0 / 3.0, scale: 20.0, offset: 8.0 },
        });
        self.graph.get_or_insert_with(|| {
            GraphSource::Builtin(
                match self.example {
                    2 => "five-agent-cycle",
                    _ => "six-agent-ring",
                }
                .into(),
            )
        });
        let default_noise = self.default_noise();
        self.noise.get_or_insert(default_noise);
    }

    /// Default noise: the quantity game maps its demand disturbance
    /// (variance 1/2, entering the marginal linearly) through the component
    /// calibration; constraint Jacobians are exact there. The tracking game
    /// has no canonical noise scale, so unit scale on both channels stands in.
    fn default_noise(&self) -> NoiseModel {
        if self.example == 2 {
            let per_component = std::f64::consts::FRAC_1_SQRT_2;
            NoiseModel { sigma1: per_component / component_std(1.0, 5), sigma2: 0.0 }
        } else {
            NoiseModel { sigma1: 1.0, sigma2: 1.0 }
        }
    }

    /// Validates the resolved config, naming the first violated constraint.
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.example, 1 | 2) {
            return Err(Error::InvalidConfig(format!(
                "example: must be 1 or 2, got {}",
                self.example
            )));
        }
        let sched = self
            .schedule
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("schedule: missing (finalize not run)".into()))?;
        sched.validate()?;
        let tol = self.oracle_tol.unwrap_or(1e-8);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("oracle_tol: must be positive, got {tol}")));
        }
        if self.algorithm == Some(Algorithm::Stochastic) {
            if self.seeds.is_empty() {
                return Err(Error::InvalidConfig(
                    "seeds: stochastic runs need at least one seed".into(),
                ));
            }
            if let Some(noise) = &self.noise {
                noise.validate()?;
            }
        }
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(Error::InvalidConfig("workers: must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn instance(&self) -> Result<MepInstance> {
        let mut inst = match self.example {
            1 => example1(self.constraint_count.unwrap_or(ConstraintCount::Six)),
            2 => example2(self.epsilon_sign.unwrap_or(EpsSign::Capacity)),
            other => return Err(Error::InvalidConfig(format!("example: must be 1 or 2, got {other}"))),
        };
        if let Some(init) = &self.init {
            inst.default_init = Some(init.clone());
        }
        Ok(inst)
    }

    pub fn graph_sequence(&self) -> Result<GraphSequence> {
        match &self.graph {
            None | Some(GraphSource::Builtin(_)) => {
                let name = match &self.graph {
                    Some(GraphSource::Builtin(n)) => n.as_str(),
                    _ => {
                        if self.example == 2 {
                            "five-agent-cycle"
                        } else {
                            "six-agent-ring"
                        }
                    }
                };
                match name {
                    "six-agent-ring" => Ok(six_agent_ring_sequence()),
                    "five-agent-cycle" => Ok(five_agent_sequence()),
                    other => Err(Error::InvalidConfig(format!(
                        "graph: unknown builtin \"{other}\" (known: six-agent-ring, five-agent-cycle)"
                    ))),
                }
            }
            Some(GraphSource::File { path }) => GraphSequence::from_json_file(path),
        }
    }
}

/// Outcome of one executed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub seed: Option<u64>,
    pub report: CertificateReport,
    /// Max-over-agents final regret divided by the horizon.
    pub final_regret_over_t: f64,
    /// Max-over-agents final violation divided by the horizon.
    pub final_violation_over_t: f64,
}

/// Outcome of `execute_run`: one entry per seed (a single unseeded entry for
/// the exact algorithm).
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcomes: Vec<RunOutcome>,
}

impl RunSummary {
    /// First failing certificate check, as "run-dir: check-name".
    pub fn first_failure(&self) -> Option<String> {
        for o in &self.outcomes {
            if let Some(check) = o.report.checks.iter().find(|c| !c.pass) {
                return Some(format!("{}: {}", o.dir.display(), check.name));
            }
        }
        None
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    config: ExperimentConfig,
    instance: String,
    algorithm: Algorithm,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    mixing: MixingEcho,
    bounds: Option<crate::problem::BoundConstants>,
}

#[derive(Serialize, Deserialize)]
struct MixingEcho {
    lambda: f64,
    c: f64,
    gamma: f64,
}

/// Runs the experiment a resolved config describes and writes one artifact
/// directory per run under `config.out`.
pub fn execute_run(config: &ExperimentConfig) -> Result<RunSummary> {
    let mut config = config.clone();
    config.finalize();
    config.validate()?;
    let inst = config.instance()?;
    let seq = config.graph_sequence()?;
    let geom = BregmanGeometry::euclidean();
    let sched = config.schedule.expect("finalized");
    let horizon = config.horizon.expect("finalized");
    let algorithm = config.algorithm.expect("finalized");
    let out_root = config.out.clone().expect("finalized");
    std::fs::create_dir_all(&out_root)?;

    let jobs: Vec<Option<u64>> = match algorithm {
        Algorithm::Exact => vec![None],
        Algorithm::Stochastic => config.seeds.iter().copied().map(Some).collect(),
    };

    let run_one = |seed: Option<u64>| -> Result<RunOutcome> {
        let trace = match seed {
            None => run_exact(&inst, &seq, &geom, &sched, horizon, None)?,
            Some(s) => {
                let noise = config.noise.expect("finalized");
                run_stochastic(&inst, &seq, &geom, &sched, horizon, None, &noise, s)?
            }
        };
        let dir = out_root.join(match seed {
            None => "exact".to_string(),
            Some(s) => format!("seed-{s}"),
        });
        std::fs::create_dir_all(&dir)?;
        write_run_artifacts(&config, &inst, &seq, &geom, &trace, &dir)
    };

    let outcomes: Vec<RunOutcome> = match config.workers {
        Some(workers) if workers > 1 && jobs.len() > 1 => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Contract(format!("worker pool: {e}")))?;
            pool.install(|| jobs.par_iter().map(|s| run_one(*s)).collect::<Result<Vec<_>>>())?
        }
        _ => jobs.iter().map(|s| run_one(*s)).collect::<Result<Vec<_>>>()?,
    };

    Ok(RunSummary { outcomes })
}

fn write_run_artifacts(
    config: &ExperimentConfig,
    inst: &MepInstance,
    seq: &GraphSequence,
    geom: &BregmanGeometry,
    trace: &RunTrace,
    dir: &Path,
) -> Result<RunOutcome> {
    let tol = config.oracle_tol.unwrap_or(1e-8);
    let mut provider = match config.comparator.unwrap_or(Comparator::Auto) {
        Comparator::Auto => SolutionProvider::auto(inst, tol),
        Comparator::ClosedForm => SolutionProvider::closed_form(inst)?,
        Comparator::Oracle => SolutionProvider::oracle(inst, tol),
    };
    let series = collect_standard(trace, inst, &mut provider)?;
    let report = certificate_check(trace, inst, seq, geom)?;

    write_trace_csv(trace, &dir.join("trace.csv"))?;
    write_metrics_csv(&series, &dir.join("metrics.csv"))?;
    std::fs::write(dir.join("certificate.json"), report.to_json()?)?;
    write_solutions_csv(&mut provider, trace.horizon(), &dir.join("solutions.csv"))?;

    let mut echo = config.clone();
    echo.seeds = trace.seed.into_iter().collect();
    let cert = seq.mixing_certificate()?;
    let manifest = Manifest {
        config: echo,
        instance: inst.name.clone(),
        algorithm: trace.algorithm,
        seed: trace.seed,
        mixing: MixingEcho { lambda: cert.lambda, c: cert.c, gamma: cert.gamma },
        bounds: inst.bounds,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;

    let final_round = trace.horizon().max(1) as f64;
    let mut final_regret = f64::NEG_INFINITY;
    let mut final_violation = f64::NEG_INFINITY;
    for s in &series {
        let val = s.last() / final_round;
        match s.name.as_str() {
            "regret" => final_regret = final_regret.max(val),
            "violation" => final_violation = final_violation.max(val),
            _ => {}
        }
    }
    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        seed: trace.seed,
        report,
        final_regret_over_t: final_regret,
        final_violation_over_t: final_violation,
    })
}

/// Comparator solutions sidecar: `t, coord, x_star` for every round the
/// metrics consumed (one step past the horizon, for the path length).
pub fn write_solutions_csv(
    provider: &mut SolutionProvider<'_>,
    horizon: u64,
    path: &Path,
) -> Result<()> {
    use std::io::Write as _;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "t,coord,x_star")?;
    for t in 0..=horizon + 1 {
        let sol = provider.solution(t)?;
        for (c, v) in sol.iter().enumerate() {
            writeln!(out, "{t},{c},{v}")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One sweep grid point's results.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub b: f64,
    pub final_regret_over_t: f64,
    pub final_violation_over_t: f64,
    pub wall_seconds: f64,
}

/// Runs the config once per (a, b) grid pair and writes `sweep.csv` under
/// the output root, rows sorted by final regret-over-horizon.
pub fn execute_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let mut base = config.clone();
    base.finalize();
    let grid = base
        .sweep_grid
        .clone()
        .filter(|g| !g.is_empty())
        .ok_or_else(|| Error::InvalidConfig("sweep_grid: empty grid".into()))?;
    let out_root = base.out.clone().expect("finalized");

    let mut rows = Vec::with_capacity(grid.len());
    for (a, b) in grid {
        let mut point = base.clone();
        point.schedule = Some(match base.schedule.expect("finalized") {
            StepSchedule::TimeVarying { scale, offset, .. } => {
                StepSchedule::TimeVarying { a, b, scale, offset }
            }
            StepSchedule::Fixed { horizon, offset, .. } => {
                StepSchedule::Fixed { a, b, horizon, offset }
            }
        });
        point.out = Some(out_root.join(format!("sweep-a{a}-b{b}")));
        point.sweep_grid = None;
        let started = Instant::now();
        let summary = execute_run(&point)?;
        let wall = started.elapsed().as_secs_f64();
        let regret = summary
            .outcomes
            .iter()
            .map(|o| o.final_regret_over_t)
            .fold(f64::NEG_INFINITY, f64::max);
        let violation = summary
            .outcomes
            .iter()
            .map(|o| o.final_violation_over_t)
            .fold(f64::NEG_INFINITY, f64::max);
        rows.push(SweepRow {
            a,
            b,
            final_regret_over_t: regret,
            final_violation_over_t: violation,
            wall_seconds: wall,
        });
    }
    rows.sort_by(|x, y| {
        x.final_regret_over_t
            .partial_cmp(&y.final_regret_over_t)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.a.total_cmp(&y.a))
            .then(x.b.total_cmp(&y.b))
    });

    use std::io::Write as _;
    std::fs::create_dir_all(&out_root)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(out_root.join("sweep.csv"))?);
    writeln!(out, "a,b,final_regret_over_t,final_violation_over_t,wall_seconds")?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{:.3}",
            r.a, r.b, r.final_regret_over_t, r.final_violation_over_t, r.wall_seconds
        )?;
    }
    out.flush()?;
    Ok(rows)
}

/// Validates a sweep grid against the schedule exponent constraints.
pub fn validate_grid(grid: &[(f64, f64)]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("sweep_grid: empty grid".into()));
    }
    for (a, b) in grid {
        StepSchedule::time_varying(*a, *b)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_out() -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().to_path_buf();
        (dir, path)
    }

    #[test]
    fn finalize_fills_example_defaults() {
        let mut c1 = ExperimentConfig::new(1);
        c1.finalize();
        assert_eq!(c1.horizon, Some(2000));
        assert!(matches!(
            c1.schedule,
            Some(StepSchedule::TimeVarying { scale, offset, .. }) if scale == 20.0 && offset == 8.0
        ));
        let mut c2 = ExperimentConfig::new(2);
        c2.horizon = Some(64);
        c2.finalize();
        assert!(matches!(
            c2.schedule,
            Some(StepSchedule::Fixed { horizon: 64, offset, .. }) if offset == 30.0
        ));
        // Idempotent.
        let before = serde_json::to_string(&c2).unwrap();
        c2.finalize();
        assert_eq!(before, serde_json::to_string(&c2).unwrap());
    }

    #[test]
    fn validation_names_the_violated_field() {
        let mut c = ExperimentConfig::new(3);
        c.finalize();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("example"), "{err}");

        let mut c = ExperimentConfig::new(1);
        c.algorithm = Some(Algorithm::Stochastic);
        c.finalize();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");

        let mut c = ExperimentConfig::new(1);
        c.schedule = Some(StepSchedule::TimeVarying { a: 0.9, b: 0.2, scale: 1.0, offset: 1.0 });
        c.finalize();
        assert!(c.validate().is_err());
    }

    #[test]
    fn exact_run_writes_all_artifacts() {
        let (_guard, out) = tmp_out();
        let mut c = ExperimentConfig::new(1);
        c.horizon = Some(15);
        c.out = Some(out.clone());
        let summary = execute_run(&c).unwrap();
        assert_eq!(summary.outcomes.len(), 1);
        let dir = &summary.outcomes[0].dir;
        assert_eq!(dir, &out.join("exact"));
        for name in ["manifest.json", "trace.csv", "metrics.csv", "certificate.json", "solutions.csv"]
        {
            assert!(dir.join(name).exists(), "{name} missing");
        }
        assert!(summary.outcomes[0].report.overall_pass);
        assert!(summary.first_failure().is_none());
        // The sidecar covers horizon + 1 rounds of m=1 coordinates.
        let solutions = std::fs::read_to_string(dir.join("solutions.csv")).unwrap();
        assert_eq!(solutions.lines().count() - 1, 17);
    }

    #[test]
    fn manifest_round_trips_to_identical_artifacts() {
        let (_guard, out) = tmp_out();
        let mut c = ExperimentConfig::new(2);
        c.algorithm = Some(Algorithm::Stochastic);
        c.horizon = Some(20);
        c.seeds = vec![9];
        c.out = Some(out.join("first"));
        let summary = execute_run(&c).unwrap();
        let dir = summary.outcomes[0].dir.clone();
        let metrics_a = std::fs::read(dir.join("metrics.csv")).unwrap();
        let trace_a = std::fs::read(dir.join("trace.csv")).unwrap();

        let mut reloaded = ExperimentConfig::load(&dir.join("manifest.json")).unwrap();
        reloaded.out = Some(out.join("second"));
        let second = execute_run(&reloaded).unwrap();
        let dir2 = second.outcomes[0].dir.clone();
        assert_eq!(metrics_a, std::fs::read(dir2.join("metrics.csv")).unwrap());
        assert_eq!(trace_a, std::fs::read(dir2.join("trace.csv")).unwrap());
    }

    #[test]
    fn worker_count_does_not_change_bytes() {
        let (_guard, out) = tmp_out();
        let mut base = ExperimentConfig::new(2);
        base.algorithm = Some(Algorithm::Stochastic);
        base.horizon = Some(12);
        base.seeds = vec![1, 2, 3, 4];

        let mut one = base.clone();
        one.workers = Some(1);
        one.out = Some(out.join("w1"));
        execute_run(&one).unwrap();

        let mut four = base.clone();
        four.workers = Some(4);
        four.out = Some(out.join("w4"));
        execute_run(&four).unwrap();

        for seed in [1u64, 2, 3, 4] {
            let a = std::fs::read(out.join(format!("w1/seed-{seed}/metrics.csv"))).unwrap();
            let b = std::fs::read(out.join(format!("w4/seed-{seed}/metrics.csv"))).unwrap();
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn sweep_sorts_by_final_regret_and_rejects_empty_grid() {
        let (_guard, out) = tmp_out();
        let mut c = ExperimentConfig::new(1);
        c.horizon = Some(40);
        c.out = Some(out.clone());
        c.sweep_grid = Some(vec![(0.5, 1.0 / 3.0), (0.6, 0.42), (0.4, 0.28)]);
        let rows = execute_sweep(&c).unwrap();
        assert_eq!(rows.len(), 3);
        for w in rows.windows(2) {
            assert!(w[0].final_regret_over_t <= w[1].final_regret_over_t);
        }
        let text = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
        assert!(text.starts_with("a,b,final_regret_over_t,final_violation_over_t,wall_seconds"));
        assert_eq!(text.lines().count(), 4);

        let mut empty = c.clone();
        empty.sweep_grid = Some(vec![]);
        assert!(execute_sweep(&empty).is_err());
        assert!(validate_grid(&[(0.5, 0.5)]).is_err());
    }

    #[test]
    fn infeasible_sign_variant_surfaces_the_flag() {
        let (_guard, out) = tmp_out();
        let mut c = ExperimentConfig::new(2);
        c.epsilon_sign = Some(EpsSign::Paper);
        c.horizon = Some(5);
        c.out = Some(out);
        let err = execute_run(&c).unwrap_err().to_string();
        assert!(err.contains("epsilon-sign"), "{err}");
    }

    #[test]
    fn comparator_choice_changes_the_reported_benchmark() {
        // The tracking game's closed-form comparator dips negative on half
        // its cycle; the constrained oracle comparator never does, because
        // the coupled feasible region lies in [0, ∞).
        let run = |comparator: Comparator| {
            let (guard, out) = tmp_out();
            let mut c = ExperimentConfig::new(1);
            c.horizon = Some(40);
            c.comparator = Some(comparator);
            c.out = Some(out.clone());
            let summary = execute_run(&c).unwrap();
            let mut min_star = f64::INFINITY;
            let text = std::fs::read_to_string(out.join("exact/solutions.csv")).unwrap();
            for row in text.lines().skip(1) {
                let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
                min_star = min_star.min(v);
            }
            drop(guard);
            (summary.outcomes[0].final_regret_over_t, min_star)
        };

        let (regret_closed, min_closed) = run(Comparator::ClosedForm);
        let (regret_auto, min_auto) = run(Comparator::Auto);
        let (regret_oracle, min_oracle) = run(Comparator::Oracle);
        // Auto resolves to the declared closed form here.
        assert_eq!(regret_auto, regret_closed);
        assert_eq!(min_auto, min_closed);
        assert!(min_closed < -0.5, "closed form should dip negative, got {min_closed}");
        assert!(min_oracle >= -1e-9, "oracle comparator left the feasible region: {min_oracle}");
        assert!(
            (regret_oracle - regret_closed).abs() > 1e-3,
            "comparators should disagree on this instance: {regret_oracle} vs {regret_closed}"
        );

        // Demanding a closed form from an instance that has none fails.
        let (_guard, out) = tmp_out();
        let mut c = ExperimentConfig::new(2);
        c.epsilon_sign = Some(EpsSign::Paper);
        c.horizon = Some(5);
        c.comparator = Some(Comparator::ClosedForm);
        c.out = Some(out);
        let err = execute_run(&c).unwrap_err().to_string();
        assert!(err.contains("no closed-form solution path"), "{err}");
    }

    #[test]
    fn graph_file_source_loads() {
        let (_guard, out) = tmp_out();
        let seq = six_agent_ring_sequence();
        let path = out.join("graph.json");
        std::fs::write(&path, seq.to_json_string().unwrap()).unwrap();
        let mut c = ExperimentConfig::new(1);
        c.graph = Some(GraphSource::File { path });
        c.horizon = Some(5);
        c.out = Some(out.join("run"));
        let summary = execute_run(&c).unwrap();
        assert!(summary.outcomes[0].report.overall_pass);

        let mut bad = ExperimentConfig::new(1);
        bad.graph = Some(GraphSource::Builtin("no-such-graph".into()));
        bad.horizon = Some(5);
        assert!(execute_run(&bad).is_err());
    }
}
