//! Offline diagnostics over completed traces: dynamic regret, constraint
//! violation, solution path length, consensus errors, and the certificate
//! checker that re-evaluates every analytical bound on the recorded run.
//!
//! All metrics are pure functions of immutable traces, so they never pollute
//! algorithm timing and parallelize trivially across runs.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{Algorithm, RunTrace};
use crate::geometry::{norm, BregmanGeometry};
use crate::graph::GraphSequence;
use crate::oracle::solve_instantaneous;
use crate::problem::{estimate_bounds, BoundConstants, MepInstance};
use crate::{Error, Result};

/// One per-round series. `agent` is set for per-agent metrics and empty for
/// trace-level aggregates; `normalized` marks a series whose entries are
/// already divided by the round index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub name: String,
    pub agent: Option<usize>,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl MetricSeries {
    pub fn new(name: impl Into<String>, agent: Option<usize>, values: Vec<f64>) -> Self {
        Self { name: name.into(), agent, values, normalized: false }
    }

    /// Round-averaged view: values[t]/t for t ≥ 1; round 0 passes through.
    pub fn over_t(&self) -> Vec<f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(t, v)| if t == 0 { *v } else { v / t as f64 })
            .collect()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap_or(&f64::NAN)
    }
}

/// Source of the per-round comparator x*_t. Closed-form paths come from the
/// instance; otherwise the centralized reference solver is called lazily and
/// its solutions cached by round.
pub struct SolutionProvider<'a> {
    inst: &'a MepInstance,
    use_oracle: bool,
    tol: f64,
    cache: HashMap<u64, Vec<f64>>,
}

impl<'a> SolutionProvider<'a> {
    /// Closed form when the instance has one, reference oracle otherwise.
    pub fn auto(inst: &'a MepInstance, tol: f64) -> Self {
        let use_oracle = inst.solution_path.is_none();
        Self { inst, use_oracle, tol, cache: HashMap::new() }
    }

    pub fn closed_form(inst: &'a MepInstance) -> Result<Self> {
        if inst.solution_path.is_none() {
            return Err(Error::MissingSolutionPath);
        }
        Ok(Self { inst, use_oracle: false, tol: 0.0, cache: HashMap::new() })
    }

    pub fn oracle(inst: &'a MepInstance, tol: f64) -> Self {
        Self { inst, use_oracle: true, tol, cache: HashMap::new() }
    }

    pub fn solution(&mut self, t: u64) -> Result<Vec<f64>> {
        if let Some(hit) = self.cache.get(&t) {
            return Ok(hit.clone());
        }
        let sol = if self.use_oracle {
            solve_instantaneous(self.inst, t, self.tol)?
        } else {
            let path = self.inst.solution_path.as_ref().ok_or(Error::MissingSolutionPath)?;
            path(t)
        };
        self.cache.insert(t, sol.clone());
        Ok(sol)
    }
}

/// Dynamic regret of one agent: R_{i,t} = −Σ_{s=0}^{t} Σ_j f_j^s(x_i(s), x*_s),
/// cumulative over rounds. Needs bifunction values and a solution source.
pub fn dynamic_regret(
    trace: &RunTrace,
    inst: &MepInstance,
    provider: &mut SolutionProvider<'_>,
    agent: usize,
) -> Result<MetricSeries> {
    if inst.f_value.is_none() {
        return Err(Error::MissingValues);
    }
    let mut values = Vec::with_capacity(trace.states.len());
    let mut acc = 0.0;
    for (t, round) in trace.states.iter().enumerate() {
        let star = provider.solution(t as u64)?;
        acc -= inst.aggregate_f(t as u64, &round[agent].x, &star)?;
        values.push(acc);
    }
    Ok(MetricSeries::new("regret", Some(agent), values))
}

/// Constraint violation of one agent: ‖[Σ_{s=0}^{t} Σ_j g_j^s(x_i(s))]_+‖.
/// The positive part applies to the cumulative sum, so feasible rounds cancel
/// earlier violations componentwise.
pub fn violation(trace: &RunTrace, inst: &MepInstance, agent: usize) -> MetricSeries {
    let mut cum = vec![0.0; inst.h];
    let mut values = Vec::with_capacity(trace.states.len());
    for (t, round) in trace.states.iter().enumerate() {
        let g = inst.aggregate_g(t as u64, &round[agent].x);
        for (c, v) in cum.iter_mut().zip(&g) {
            *c += v;
        }
        let clipped: Vec<f64> = cum.iter().map(|c| c.max(0.0)).collect();
        values.push(norm(&clipped));
    }
    MetricSeries::new("violation", Some(agent), values)
}

/// Total comparator movement Θ_T = Σ_{t=0}^{T} ‖x*_{t+1} − x*_t‖.
pub fn path_length(provider: &mut SolutionProvider<'_>, horizon: u64) -> Result<f64> {
    Ok(path_length_series(provider, horizon)?.last())
}

/// Cumulative form of the comparator movement: entry t holds
/// Θ_t = Σ_{s=0}^{t} ‖x*_{s+1} − x*_s‖, so the series has trace length and
/// its last entry is the horizon's path length.
pub fn path_length_series(
    provider: &mut SolutionProvider<'_>,
    horizon: u64,
) -> Result<MetricSeries> {
    let mut values = Vec::with_capacity(horizon as usize + 1);
    let mut prev = provider.solution(0)?;
    let mut acc = 0.0;
    for t in 0..=horizon {
        let cur = provider.solution(t + 1)?;
        acc += crate::geometry::dist(&cur, &prev);
        values.push(acc);
        prev = cur;
    }
    Ok(MetricSeries::new("path_length", None, values))
}

/// Max-over-agents distance to the round average, per round, for the primal
/// and dual states.
pub fn consensus_errors(trace: &RunTrace) -> (MetricSeries, MetricSeries) {
    let mut primal = Vec::with_capacity(trace.states.len());
    let mut dual = Vec::with_capacity(trace.states.len());
    for round in &trace.states {
        primal.push(max_deviation(round.iter().map(|s| s.x.as_slice())));
        dual.push(max_deviation(round.iter().map(|s| s.y.as_slice())));
    }
    (
        MetricSeries::new("consensus_primal", None, primal),
        MetricSeries::new("consensus_dual", None, dual),
    )
}

fn max_deviation<'s>(rows: impl Iterator<Item = &'s [f64]> + Clone) -> f64 {
    let n = rows.clone().count();
    let dim = rows.clone().next().map_or(0, |r| r.len());
    let mut mean = vec![0.0; dim];
    for r in rows.clone() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    rows.map(|r| crate::geometry::dist(r, &mean)).fold(0.0, f64::max)
}

/// The regret, violation, and consensus series a standard run report emits.
pub fn collect_standard(
    trace: &RunTrace,
    inst: &MepInstance,
    provider: &mut SolutionProvider<'_>,
) -> Result<Vec<MetricSeries>> {
    let mut out = Vec::with_capacity(2 * trace.n + 3);
    for i in 0..trace.n {
        out.push(dynamic_regret(trace, inst, provider, i)?);
    }
    for i in 0..trace.n {
        out.push(violation(trace, inst, i));
    }
    let (cp, cd) = consensus_errors(trace);
    out.push(cp);
    out.push(cd);
    out.push(path_length_series(provider, trace.horizon())?);
    Ok(out)
}

/// Metrics CSV: `round, metric, agent, value, value_over_t`, series in the
/// order given, rows by round within each series. Deterministic bytes for a
/// deterministic input.
pub fn write_metrics_csv(series: &[MetricSeries], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "round,metric,agent,value,value_over_t")?;
    for s in series {
        let over = s.over_t();
        for (t, (v, o)) in s.values.iter().zip(&over).enumerate() {
            match s.agent {
                Some(a) => writeln!(out, "{t},{},{a},{v},{o}", s.name)?,
                None => writeln!(out, "{t},{},,{v},{o}", s.name)?,
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Outcome of re-checking one analytical bound over a whole trace: the worst
/// round's bound and observed value, their margin, and the pass flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub margin: f64,
    pub pass: bool,
}

const CHECK_SLACK: f64 = 1e-9;

impl CertificateCheck {
    fn from_worst(name: &str, worst: Option<(f64, f64)>, fallback_bound: f64) -> Self {
        let (bound, observed) = worst.unwrap_or((fallback_bound, 0.0));
        let margin = bound - observed;
        Self { name: name.into(), bound, observed, margin, pass: margin >= -CHECK_SLACK }
    }
}

/// Per-run certificate: the mixing constants, the instance bounds the checks
/// used, and one record per bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub instance: String,
    pub algorithm: Algorithm,
    pub horizon: u64,
    pub lambda: f64,
    pub c: f64,
    pub bounds: BoundConstants,
    /// "declared" when the instance carried constants, "estimated" when they
    /// were sampled on the fly.
    pub bounds_source: String,
    /// Sampled smoothness estimate for the kernel gradient; recorded for
    /// context, not gated on.
    pub ell_estimate: f64,
    pub checks: Vec<CertificateCheck>,
    pub overall_pass: bool,
}

impl CertificateReport {
    pub fn check(&self, name: &str) -> Option<&CertificateCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Tracks the minimum-margin (bound, observed) pair across many evaluations.
struct Worst {
    pair: Option<(f64, f64)>,
}

impl Worst {
    fn new() -> Self {
        Self { pair: None }
    }

    fn update(&mut self, bound: f64, observed: f64) {
        let margin = bound - observed;
        if self.pair.is_none_or(|(b, o)| margin < b - o) {
            self.pair = Some((bound, observed));
        }
    }
}

/// Longest product window the mixing check expands per start round.
const MIXING_WINDOW: u64 = 200;

/// Re-evaluates every analytical bound on a completed trace.
///
/// Exact runs get all seven checks. Stochastic runs skip the primal step
/// bound and primal consensus envelope, whose derivations use the exact
/// gradient bound κ₁; the dual recursion never sees gradient noise, so the
/// dual checks apply to both algorithms.
pub fn certificate_check(
    trace: &RunTrace,
    inst: &MepInstance,
    seq: &GraphSequence,
    geom: &BregmanGeometry,
) -> Result<CertificateReport> {
    let cert = seq.mixing_certificate()?;
    let (bounds, bounds_source) = match inst.bounds {
        Some(b) => (b, "declared"),
        None => (estimate_bounds(inst, 4000, 0x0bad_cafe)?, "estimated"),
    };
    let n = trace.n as f64;
    let m = trace.m as f64;
    let h = trace.h as f64;
    let lam = cert.lambda;
    let c = cert.c;
    let mu = geom.mu();
    let exact = trace.algorithm == Algorithm::Exact;

    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let ell_estimate = geom.estimate_ell(&inst.omega, 2000, &mut rng);

    let mut checks = Vec::with_capacity(7);

    // Transition products stay within Cλ^{t−s} of uniform.
    let mut mixing = Worst::new();
    let horizon = trace.horizon();
    let stride = (horizon / 8).max(1);
    let mut s = 0;
    loop {
        let mut product = seq.transition_product(s, s)?;
        let t_end = (s + MIXING_WINDOW).min(horizon);
        for t in s..=t_end {
            if t > s {
                product = multiply_left(seq, t, &product);
            }
            let bound = c * lam.powi((t - s) as i32);
            let observed = product
                .iter()
                .flat_map(|row| row.iter().map(|v| (v - 1.0 / n).abs()))
                .fold(0.0, f64::max);
            mixing.update(bound, observed);
        }
        if s >= horizon {
            break;
        }
        s = (s + stride).min(horizon);
    }
    checks.push(CertificateCheck::from_worst("mixing_decay", mixing.pair, c));

    // Dual trajectories stay inside the ball of radius √n·κ₂.
    let mut dual_bound = Worst::new();
    let dual_cap = n.sqrt() * bounds.kappa2;
    for round in &trace.states {
        for st in round {
            dual_bound.update(dual_cap, norm(&st.y));
        }
    }
    checks.push(CertificateCheck::from_worst("dual_norm_bound", dual_bound.pair, dual_cap));

    // Mirror steps move at most ((√n h κ₂ κ₃ + κ₁)/μ)·η_t from the anchor.
    if exact {
        let rho5 = (n.sqrt() * h * bounds.kappa2 * bounds.kappa3 + bounds.kappa1) / mu;
        let mut step = Worst::new();
        for (t, rec) in trace.steps.iter().enumerate() {
            let next = &trace.states[t + 1];
            for (i, st) in next.iter().enumerate() {
                step.update(rho5 * rec.eta, crate::geometry::dist(&st.x, &rec.z[i]));
            }
        }
        checks.push(CertificateCheck::from_worst(
            "primal_step_bound",
            step.pair,
            rho5 * trace.schedule.eta(0),
        ));
    }

    // Consensus envelopes: geometric-decay bound on the spread around the
    // round average, with the running sum B(t) = Σ_{s=0}^{t} λ^{t−s} η_s
    // updated by B(t) = λB(t−1) + η_t.
    let rho1 = m.sqrt() * n * bounds.kappa * c;
    let rho2 = (m.sqrt() * n.powf(1.5) * h * bounds.kappa2 * bounds.kappa3 * c
        + m.sqrt() * n * bounds.kappa1 * c)
        / (mu * lam);
    let rho6 = (h.sqrt() * n.powf(1.5) * c * bounds.kappa2 + h.sqrt() * n * c * bounds.kappa2) / lam;
    let mut primal_env = Worst::new();
    let mut dual_env = Worst::new();
    let mut decay = 1.0;
    let mut b_sum = 0.0;
    for (t, round) in trace.states.iter().enumerate() {
        b_sum = lam * b_sum + trace.schedule.eta(t as u64);
        let x_obs = max_deviation(round.iter().map(|s| s.x.as_slice()));
        let y_obs = max_deviation(round.iter().map(|s| s.y.as_slice()));
        primal_env.update(rho1 * decay + rho2 * b_sum, x_obs);
        dual_env.update(rho6 * b_sum, y_obs);
        decay *= lam;
    }
    if exact {
        checks.push(CertificateCheck::from_worst(
            "primal_consensus_envelope",
            primal_env.pair,
            rho1,
        ));
    }
    checks.push(CertificateCheck::from_worst("dual_consensus_envelope", dual_env.pair, 0.0));

    // Feasibility and sign constraints every round, both algorithms.
    let mut feas = Worst::new();
    let mut nonneg = Worst::new();
    for round in &trace.states {
        for st in round {
            let proj = inst.omega.project(&st.x);
            feas.update(0.0, crate::geometry::dist(&st.x, &proj));
            let most_negative = st.y.iter().fold(0.0f64, |acc, v| acc.max(-v));
            nonneg.update(0.0, most_negative);
        }
    }
    checks.push(CertificateCheck::from_worst("primal_feasibility", feas.pair, 0.0));
    checks.push(CertificateCheck::from_worst("dual_nonnegativity", nonneg.pair, 0.0));

    let overall_pass = checks.iter().all(|c| c.pass);
    Ok(CertificateReport {
        instance: trace.instance.clone(),
        algorithm: trace.algorithm,
        horizon,
        lambda: lam,
        c,
        bounds,
        bounds_source: bounds_source.into(),
        ell_estimate,
        checks,
        overall_pass,
    })
}

fn multiply_left(seq: &GraphSequence, t: u64, product: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let a = seq.graph_at(t);
    let n = product.len();
    let mut out = vec![vec![0.0; n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (k, prod_row) in product.iter().enumerate() {
            let w = a.at(i, k);
            if w != 0.0 {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell += w * prod_row[j];
                }
            }
        }
    }
    out
}

use rand::SeedableRng;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_exact, AgentState, StepSchedule};
    use crate::geometry::FeasibleSet;
    use crate::graph::{six_agent_ring_sequence, WeightedDigraph};
    use crate::problem::{builtin_separable, example1, example2, ConstraintCount, EpsSign};
    use std::sync::Arc;

    fn ex1_canonical_run(horizon: u64) -> (MepInstance, GraphSequence, BregmanGeometry, RunTrace) {
        let inst = example1(ConstraintCount::Six);
        let seq = six_agent_ring_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::TimeVarying { a: 0.5, b: 1.0 / 3.0, scale: 20.0, offset: 8.0 };
        let trace = run_exact(&inst, &seq, &geom, &sched, horizon, None).unwrap();
        (inst, seq, geom, trace)
    }

    #[test]
    fn comparator_trajectory_has_zero_regret() {
        let inst = example1(ConstraintCount::Six);
        let path = inst.solution_path.clone().unwrap();
        // Hand-build a trace whose every agent sits exactly on x*_t.
        let horizon = 40u64;
        let states: Vec<Vec<AgentState>> = (0..=horizon)
            .map(|t| {
                (0..inst.n)
                    .map(|_| AgentState { x: path(t), y: vec![0.0] })
                    .collect()
            })
            .collect();
        let trace = RunTrace {
            instance: inst.name.clone(),
            algorithm: Algorithm::Exact,
            n: inst.n,
            m: inst.m,
            h: inst.h,
            seed: None,
            schedule: StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap(),
            states,
            steps: vec![],
        };
        let mut provider = SolutionProvider::closed_form(&inst).unwrap();
        for i in 0..inst.n {
            let r = dynamic_regret(&trace, &inst, &mut provider, i).unwrap();
            assert!(r.values.iter().all(|v| v.abs() == 0.0), "agent {i}: {:?}", r.last());
        }
    }

    #[test]
    fn zero_bifunctions_give_zero_regret() {
        let mut inst = builtin_separable(
            "zero",
            6,
            FeasibleSet::interval(-2.0, 2.0).unwrap(),
            Arc::new(|_i, _t, _x: &[f64]| 0.0),
            Arc::new(|_i, _t, _x: &[f64]| vec![0.0]),
            None,
        )
        .unwrap();
        // Any comparator works against an all-zero bifunction.
        inst.solution_path = Some(Arc::new(|_t| vec![0.0]));
        let seq = six_agent_ring_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        let trace = run_exact(&inst, &seq, &geom, &sched, 30, None).unwrap();
        let mut provider = SolutionProvider::closed_form(&inst).unwrap();
        let r = dynamic_regret(&trace, &inst, &mut provider, 2).unwrap();
        assert!(r.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn violation_cancels_through_the_cumulative_sum() {
        // Two agents, per-round aggregate g alternating +1, −1.
        let g: crate::problem::ConstraintOracle =
            Arc::new(|_i, t, _x: &[f64]| vec![if t % 2 == 0 { 0.5 } else { -0.5 }]);
        let jac: crate::problem::JacOracle = Arc::new(|_i, _t, _x: &[f64]| vec![vec![0.0]]);
        let inst = builtin_separable(
            "alternating",
            2,
            FeasibleSet::interval(-1.0, 1.0).unwrap(),
            Arc::new(|_i, _t, _x: &[f64]| 0.0),
            Arc::new(|_i, _t, _x: &[f64]| vec![0.0]),
            Some((1, g, jac)),
        )
        .unwrap();
        let seq = crate::graph::GraphSequence::cyclic(
            vec![WeightedDigraph::complete(2).unwrap()],
            1,
        )
        .unwrap();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        let trace = run_exact(&inst, &seq, &geom, &sched, 11, None).unwrap();
        let v = violation(&trace, &inst, 0);
        for (t, val) in v.values.iter().enumerate() {
            let expect = if t % 2 == 0 { 1.0 } else { 0.0 };
            assert!((val - expect).abs() < 1e-12, "t={t}: {val}");
        }
    }

    #[test]
    fn feasible_runs_have_zero_violation_and_monotone_series() {
        let (inst, _, _, trace) = ex1_canonical_run(60);
        // A strictly feasible stretch keeps the positive part at zero only
        // when the aggregate stays nonpositive; here just check shape rules:
        let v = violation(&trace, &inst, 0);
        assert_eq!(v.values.len(), 61);
        assert!(v.values.iter().all(|x| *x >= 0.0 && x.is_finite()));
    }

    #[test]
    fn path_length_matches_direct_summation() {
        let inst = example1(ConstraintCount::Six);
        let mut provider = SolutionProvider::closed_form(&inst).unwrap();
        let total = path_length(&mut provider, 10).unwrap();
        let direct: f64 = (0..=10)
            .map(|t| {
                let a = (6.0 / 7.0) * (t as f64).sin();
                let b = (6.0 / 7.0) * ((t + 1) as f64).sin();
                (b - a).abs()
            })
            .sum();
        assert!((total - direct).abs() < 1e-12);

        // Constant path: zero length.
        let mut zero = builtin_separable(
            "still",
            2,
            FeasibleSet::interval(-1.0, 1.0).unwrap(),
            Arc::new(|_i, _t, _x: &[f64]| 0.0),
            Arc::new(|_i, _t, _x: &[f64]| vec![0.0]),
            None,
        )
        .unwrap();
        zero.solution_path = Some(Arc::new(|_t| vec![0.3]));
        let mut zp = SolutionProvider::closed_form(&zero).unwrap();
        assert_eq!(path_length(&mut zp, 25).unwrap(), 0.0);
    }

    #[test]
    fn missing_solution_path_directs_to_oracle() {
        let mut inst = example1(ConstraintCount::Six);
        inst.solution_path = None;
        assert!(matches!(SolutionProvider::closed_form(&inst), Err(Error::MissingSolutionPath)));
        // The oracle provider still serves solutions, cached by round.
        let mut provider = SolutionProvider::oracle(&inst, 1e-8);
        let a = provider.solution(3).unwrap();
        let b = provider.solution(3).unwrap();
        assert_eq!(a, b);
        let closed = (6.0 / 7.0) * 3.0f64.sin();
        assert!((a[0] - closed).abs() < 1e-4);
    }

    #[test]
    fn consensus_errors_zero_for_identical_states() {
        let inst = builtin_separable(
            "zero",
            3,
            FeasibleSet::interval(-1.0, 1.0).unwrap(),
            Arc::new(|_i, _t, _x: &[f64]| 0.0),
            Arc::new(|_i, _t, _x: &[f64]| vec![0.0]),
            None,
        )
        .unwrap();
        let seq =
            crate::graph::GraphSequence::cyclic(vec![WeightedDigraph::complete(3).unwrap()], 1)
                .unwrap();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        let init = vec![vec![0.25]; 3];
        let trace = run_exact(&inst, &seq, &geom, &sched, 20, Some(&init)).unwrap();
        let (p, d) = consensus_errors(&trace);
        assert!(p.values.iter().all(|v| *v == 0.0));
        assert!(d.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn certificate_passes_on_canonical_run_and_reports_seven_checks() {
        let (inst, seq, geom, trace) = ex1_canonical_run(400);
        let report = certificate_check(&trace, &inst, &seq, &geom).unwrap();
        assert!(report.overall_pass, "{report:?}");
        assert_eq!(report.checks.len(), 7);
        assert_eq!(report.bounds_source, "declared");
        for name in [
            "mixing_decay",
            "dual_norm_bound",
            "primal_step_bound",
            "primal_consensus_envelope",
            "dual_consensus_envelope",
            "primal_feasibility",
            "dual_nonnegativity",
        ] {
            let check = report.check(name).unwrap_or_else(|| panic!("missing {name}"));
            assert!(check.pass, "{name}: {check:?}");
            assert!((check.margin - (check.bound - check.observed)).abs() < 1e-15);
        }
        // The report serializes.
        let json = report.to_json().unwrap();
        assert!(json.contains("mixing_decay"));
    }

    #[test]
    fn injected_dual_violation_fails_the_bound_check() {
        let (inst, seq, geom, mut trace) = ex1_canonical_run(50);
        trace.states[30][2].y = vec![1.0e3];
        let report = certificate_check(&trace, &inst, &seq, &geom).unwrap();
        let check = report.check("dual_norm_bound").unwrap();
        assert!(!check.pass);
        assert!(check.margin < -1e-9);
        assert!(!report.overall_pass);
    }

    #[test]
    fn zero_oracle_run_margins_equal_full_bounds() {
        let inst = builtin_separable(
            "zero",
            6,
            FeasibleSet::interval(-2.0, 2.0).unwrap(),
            Arc::new(|_i, _t, _x: &[f64]| 0.0),
            Arc::new(|_i, _t, _x: &[f64]| vec![0.0]),
            None,
        )
        .unwrap();
        let seq = six_agent_ring_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        let init = vec![vec![0.0]; 6];
        let trace = run_exact(&inst, &seq, &geom, &sched, 25, Some(&init)).unwrap();
        let report = certificate_check(&trace, &inst, &seq, &geom).unwrap();
        assert_eq!(report.bounds_source, "estimated");
        for name in ["dual_norm_bound", "primal_step_bound", "primal_feasibility"] {
            let check = report.check(name).unwrap();
            assert_eq!(check.observed, 0.0, "{name}");
            assert!((check.margin - check.bound).abs() < 1e-15);
        }
    }

    #[test]
    fn stochastic_certificate_skips_exact_only_checks() {
        let inst = example2(EpsSign::Capacity);
        let seq = crate::graph::five_agent_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::Fixed { a: 0.5, b: 1.0 / 3.0, horizon: 40, offset: 30.0 };
        let noise = crate::oracle::NoiseModel { sigma1: 0.5, sigma2: 0.5 };
        let trace =
            crate::engine::run_stochastic(&inst, &seq, &geom, &sched, 40, None, &noise, 5).unwrap();
        let report = certificate_check(&trace, &inst, &seq, &geom).unwrap();
        assert_eq!(report.checks.len(), 5);
        assert!(report.check("primal_step_bound").is_none());
        assert!(report.check("primal_consensus_envelope").is_none());
        assert!(report.check("dual_norm_bound").unwrap().pass);
        assert!(report.overall_pass, "{report:?}");
    }

    #[test]
    fn metrics_csv_schema_and_determinism() {
        let (inst, _, _, trace) = ex1_canonical_run(5);
        let mut provider = SolutionProvider::closed_form(&inst).unwrap();
        let series = collect_standard(&trace, &inst, &mut provider).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.csv");
        let p2 = dir.path().join("m2.csv");
        write_metrics_csv(&series, &p1).unwrap();
        write_metrics_csv(&series, &p2).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        let b2 = std::fs::read(&p2).unwrap();
        assert_eq!(b1, b2);
        let text = String::from_utf8(b1).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "round,metric,agent,value,value_over_t");
        assert!(text.contains("1,regret,0,"));
        assert!(text.contains(",consensus_primal,,"));
        // regret + violation per agent, two consensus series, one path
        // series, all of trace length.
        let expected_rows = (2 * 6 + 2 + 1) * 6;
        assert_eq!(text.lines().count() - 1, expected_rows);
    }

    #[test]
    fn regret_per_round_eventually_decreases_at_checkpoints() {
        // Canonical decaying schedule on the first built-in; checkpoints
        // sample the long-run trend of R_t/t.
        let inst = example1(ConstraintCount::Six);
        let seq = six_agent_ring_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        let trace = run_exact(&inst, &seq, &geom, &sched, 4000, None).unwrap();
        let mut provider = SolutionProvider::closed_form(&inst).unwrap();
        let r = dynamic_regret(&trace, &inst, &mut provider, 0).unwrap();
        let over = r.over_t();
        let picks: Vec<f64> = [250usize, 500, 1000, 2000, 4000].iter().map(|t| over[*t]).collect();
        assert!(
            picks[2] > picks[3] && picks[3] > picks[4],
            "tail not decreasing: {picks:?}"
        );
    }
}
