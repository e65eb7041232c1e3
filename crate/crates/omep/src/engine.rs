//! The two online distributed algorithms over a mixing graph sequence.
//!
//! Each synchronous round t runs three phases in the literal update order:
//!
//! 1. mixing: z_i(t) = Σ_j a_ij(t) x_j(t),
//! 2. primal: x_i(t+1) = argmin_{x∈Ω} D_φ(x, z_i(t)) + ⟨ζ_t b_i + η_t c_i y_i(t), x⟩,
//! 3. dual:   y_i(t+1) = [(1−η_t) Σ_j a_ij(t) y_j(t) + η_t g_i^t(x_i(t))]_+,
//!
//! where the exact algorithm uses b_i = ∇₂f_i^t(x_i(t), x_i(t)) and
//! c_i = ∇g_i^t(x_i(t)), and the stochastic variant replaces both with their
//! noisy counterparts while keeping the dual innovation exact. Dual states
//! start at zero; ζ_t ≤ η_t is enforced by schedule construction.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{mirror_argmin, BregmanGeometry, FeasibleSet};
use crate::graph::GraphSequence;
use crate::oracle::{noisy_grad2_f, noisy_jac_g, NoiseModel};
use crate::problem::MepInstance;
use crate::{Error, Result};

fn default_scale() -> f64 {
    1.0
}
fn default_offset() -> f64 {
    1.0
}

/// Step-size schedules. The canonical forms are ζ_t = (t+1)^{−a},
/// η_t = (t+1)^{−b} (time-varying) and ζ = (T+1)^{−a}, η = (T+1)^{−b}
/// (fixed); `scale` and `offset` generalize the base to (scale·t + offset)
/// and (T + offset) so scaled-clock settings like (20t+8)^{−a} or
/// (T+30)^{−a} are expressible. Defaults reproduce the canonical forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum StepSchedule {
    TimeVarying {
        a: f64,
        b: f64,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default = "default_offset")]
        offset: f64,
    },
    Fixed {
        a: f64,
        b: f64,
        horizon: u64,
        #[serde(default = "default_offset")]
        offset: f64,
    },
}

impl StepSchedule {
    pub fn time_varying(a: f64, b: f64) -> Result<Self> {
        let s = Self::TimeVarying { a, b, scale: 1.0, offset: 1.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn fixed(a: f64, b: f64, horizon: u64) -> Result<Self> {
        let s = Self::Fixed { a, b, horizon, offset: 1.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn exponents(&self) -> (f64, f64) {
        match self {
            Self::TimeVarying { a, b, .. } | Self::Fixed { a, b, .. } => (*a, *b),
        }
    }

    /// Exponent and base constraints: a,b ∈ (0,1) with b < a < 2b (so
    /// ζ_t ≤ η_t and the regret rates hold), base ≥ 1 at every round (so both
    /// steps lie in (0,1] and decay preserves ζ_t ≤ η_t).
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.exponents();
        if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
            return Err(Error::InvalidSchedule(format!("exponents must lie in (0,1); got a={a}, b={b}")));
        }
        if !(b < a && a < 2.0 * b) {
            return Err(Error::InvalidSchedule(format!("need b < a < 2b; got a={a}, b={b}")));
        }
        match self {
            Self::TimeVarying { scale, offset, .. } => {
                if !(*scale >= 0.0 && scale.is_finite() && *offset >= 1.0 && offset.is_finite()) {
                    return Err(Error::InvalidSchedule(
                        "time-varying base needs scale >= 0 and offset >= 1".into(),
                    ));
                }
            }
            Self::Fixed { offset, .. } => {
                if !(*offset >= 1.0 && offset.is_finite()) {
                    return Err(Error::InvalidSchedule("fixed base needs offset >= 1".into()));
                }
            }
        }
        Ok(())
    }

    fn base(&self, t: u64) -> f64 {
        match self {
            Self::TimeVarying { scale, offset, .. } => scale * t as f64 + offset,
            Self::Fixed { horizon, offset, .. } => *horizon as f64 + offset,
        }
    }

    pub fn zeta(&self, t: u64) -> f64 {
        let (a, _) = self.exponents();
        self.base(t).powf(-a)
    }

    pub fn eta(&self, t: u64) -> f64 {
        let (_, b) = self.exponents();
        self.base(t).powf(-b)
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Self::Fixed { .. })
    }
}

/// One agent's state after a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Everything round t consumed and produced beyond the states themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub zeta: f64,
    pub eta: f64,
    /// Mixed anchors z_i(t), one per agent.
    pub z: Vec<Vec<f64>>,
    /// The primal gradient actually used (noisy under the stochastic
    /// algorithm), one m-vector per agent.
    pub primal_grad: Vec<Vec<f64>>,
    /// Exact dual innovations g_i^t(x_i(t)), one h-vector per agent.
    pub dual_innovation: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Exact,
    Stochastic,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Exact => write!(f, "exact"),
            Self::Stochastic => write!(f, "stochastic"),
        }
    }
}

/// Complete replayable run history: states[t][i] for t = 0..=horizon plus a
/// StepRecord per executed round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    pub instance: String,
    pub algorithm: Algorithm,
    pub n: usize,
    pub m: usize,
    pub h: usize,
    pub seed: Option<u64>,
    pub schedule: StepSchedule,
    pub states: Vec<Vec<AgentState>>,
    pub steps: Vec<StepRecord>,
}

impl RunTrace {
    pub fn horizon(&self) -> u64 {
        self.steps.len() as u64
    }
}

/// Primal mirror step: x⁺ = argmin_{x∈Ω} D_φ(x,z) + ⟨ζ·b + η·(c·y), x⟩ with
/// c the m×h constraint Jacobian and y the h-dimensional dual state.
pub fn primal_step(
    geom: &BregmanGeometry,
    omega: &FeasibleSet,
    z: &[f64],
    grad_f: &[f64],
    jac_g: &[Vec<f64>],
    y: &[f64],
    zeta: f64,
    eta: f64,
) -> Result<Vec<f64>> {
    if zeta > eta {
        return Err(Error::Contract(format!("primal step needs zeta <= eta; got {zeta} > {eta}")));
    }
    if y.iter().any(|v| *v < 0.0) {
        return Err(Error::Contract("dual state must be nonnegative".into()));
    }
    if grad_f.len() != omega.dim() || jac_g.len() != omega.dim() {
        return Err(Error::Contract("primal step dimensions disagree".into()));
    }
    let s: Vec<f64> = grad_f
        .iter()
        .zip(jac_g)
        .map(|(gf, row)| {
            let coupling: f64 = row.iter().zip(y).map(|(c, yi)| c * yi).sum();
            zeta * gf + eta * coupling
        })
        .collect();
    mirror_argmin(geom, omega, z, &s)
}

/// Dual step for all agents: y_i⁺ = [(1−η) Σ_j a_ij(t) y_j + η g_i]_+.
pub fn dual_step(
    seq: &GraphSequence,
    t: u64,
    y_all: &[Vec<f64>],
    g_vals: &[Vec<f64>],
    eta: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Contract(format!("dual step needs eta in (0,1]; got {eta}")));
    }
    let mixed = seq.mix(t, y_all)?;
    Ok(mixed
        .into_iter()
        .zip(g_vals)
        .map(|(mi, gi)| {
            mi.iter()
                .zip(gi)
                .map(|(m, g)| ((1.0 - eta) * m + eta * g).max(0.0))
                .collect()
        })
        .collect())
}

enum GradientSource<'a> {
    Exact,
    Noisy { noise: &'a NoiseModel, seed: u64 },
}

/// Exact-gradient algorithm.
pub fn run_exact(
    inst: &MepInstance,
    seq: &GraphSequence,
    geom: &BregmanGeometry,
    sched: &StepSchedule,
    horizon: u64,
    init: Option<&[Vec<f64>]>,
) -> Result<RunTrace> {
    run_inner(inst, seq, geom, sched, horizon, init, GradientSource::Exact, Algorithm::Exact, None)
}

/// Stochastic-gradient algorithm: noisy primal gradients, exact dual
/// innovation, fixed step sizes only.
pub fn run_stochastic(
    inst: &MepInstance,
    seq: &GraphSequence,
    geom: &BregmanGeometry,
    sched: &StepSchedule,
    horizon: u64,
    init: Option<&[Vec<f64>]>,
    noise: &NoiseModel,
    seed: u64,
) -> Result<RunTrace> {
    if !sched.is_fixed() {
        return Err(Error::InvalidSchedule(
            "the stochastic algorithm runs on the fixed-step schedule".into(),
        ));
    }
    noise.validate()?;
    run_inner(
        inst,
        seq,
        geom,
        sched,
        horizon,
        init,
        GradientSource::Noisy { noise, seed },
        Algorithm::Stochastic,
        Some(seed),
    )
}

#[allow(clippy::too_many_arguments)]
fn run_inner(
    inst: &MepInstance,
    seq: &GraphSequence,
    geom: &BregmanGeometry,
    sched: &StepSchedule,
    horizon: u64,
    init: Option<&[Vec<f64>]>,
    source: GradientSource<'_>,
    algorithm: Algorithm,
    seed: Option<u64>,
) -> Result<RunTrace> {
    sched.validate()?;
    if seq.n() != inst.n {
        return Err(Error::Contract(format!(
            "graph sequence has {} agents but the instance has {}",
            seq.n(),
            inst.n
        )));
    }
    let init_owned;
    let init: &[Vec<f64>] = match init {
        Some(v) => v,
        None => match &inst.default_init {
            Some(d) => d,
            None => {
                init_owned = vec![inst.omega.center(); inst.n];
                &init_owned
            }
        },
    };
    if init.len() != inst.n {
        return Err(Error::Contract(format!(
            "{} initial states supplied for {} agents",
            init.len(),
            inst.n
        )));
    }
    for (i, x0) in init.iter().enumerate() {
        if x0.len() != inst.m || !inst.omega.contains(x0, 1e-9) {
            return Err(Error::Contract(format!("initial state of agent {i} lies outside the set")));
        }
    }

    let first: Vec<AgentState> = init
        .iter()
        .map(|x0| AgentState { x: x0.clone(), y: vec![0.0; inst.h] })
        .collect();
    let mut states = vec![first];
    let mut steps = Vec::with_capacity(horizon as usize);

    for t in 0..horizon {
        let zeta = sched.zeta(t);
        let eta = sched.eta(t);
        let current = states.last().expect("at least the initial state");
        let xs: Vec<Vec<f64>> = current.iter().map(|s| s.x.clone()).collect();
        let ys: Vec<Vec<f64>> = current.iter().map(|s| s.y.clone()).collect();
        let z = seq.mix(t, &xs)?;

        let mut grads = Vec::with_capacity(inst.n);
        let mut jacs = Vec::with_capacity(inst.n);
        let mut gvals = Vec::with_capacity(inst.n);
        for i in 0..inst.n {
            let (grad, jac) = match &source {
                GradientSource::Exact => ((inst.grad2_f)(i, t, &xs[i]), (inst.jac_g)(i, t, &xs[i])),
                GradientSource::Noisy { noise, seed } => (
                    noisy_grad2_f(inst, i, t, &xs[i], noise, *seed),
                    noisy_jac_g(inst, i, t, &xs[i], noise, *seed),
                ),
            };
            let gval = (inst.g)(i, t, &xs[i]);
            let finite = grad.iter().chain(gval.iter()).all(|v| v.is_finite())
                && jac.iter().flatten().all(|v| v.is_finite());
            if !finite || grad.len() != inst.m || gval.len() != inst.h || jac.len() != inst.m {
                return Err(Error::NonFiniteOracle { agent: i, round: t });
            }
            grads.push(grad);
            jacs.push(jac);
            gvals.push(gval);
        }

        let mut next = Vec::with_capacity(inst.n);
        for i in 0..inst.n {
            let x_next =
                primal_step(geom, &inst.omega, &z[i], &grads[i], &jacs[i], &ys[i], zeta, eta)?;
            next.push(x_next);
        }
        let y_next = dual_step(seq, t, &ys, &gvals, eta)?;

        steps.push(StepRecord {
            zeta,
            eta,
            z,
            primal_grad: grads,
            dual_innovation: gvals,
        });
        states.push(
            next.into_iter()
                .zip(y_next)
                .map(|(x, y)| AgentState { x, y })
                .collect(),
        );
    }

    Ok(RunTrace {
        instance: inst.name.clone(),
        algorithm,
        n: inst.n,
        m: inst.m,
        h: inst.h,
        seed,
        schedule: *sched,
        states,
        steps,
    })
}

/// Trace CSV: one row per (round, agent, coordinate) with the full dual
/// vector and the round's step sizes repeated on each row.
pub fn write_trace_csv(trace: &RunTrace, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "round,agent,coord,x")?;
    for k in 1..=trace.h {
        write!(out, ",y_{k}")?;
    }
    writeln!(out, ",zeta,eta")?;
    for (t, round_states) in trace.states.iter().enumerate() {
        let (zeta, eta) = match trace.steps.get(t) {
            Some(s) => (s.zeta, s.eta),
            // The terminal state row reuses the schedule values at its index.
            None => (trace.schedule.zeta(t as u64), trace.schedule.eta(t as u64)),
        };
        for (i, st) in round_states.iter().enumerate() {
            for (c, xv) in st.x.iter().enumerate() {
                write!(out, "{t},{i},{c},{xv}")?;
                for yv in &st.y {
                    write!(out, ",{yv}")?;
                }
                writeln!(out, ",{zeta},{eta}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{five_agent_sequence, six_agent_ring_sequence};
    use crate::problem::{builtin_separable, example1, example2, ConstraintCount, EpsSign};
    use std::sync::Arc;

    fn zero_instance(n: usize) -> MepInstance {
        builtin_separable(
            "zero",
            n,
            FeasibleSet::interval(-2.0, 2.0).unwrap(),
            Arc::new(|_i, _t, _x: &[f64]| 0.0),
            Arc::new(|_i, _t, _x: &[f64]| vec![0.0]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn schedule_values_and_validation() {
        let tv = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        assert!((tv.zeta(0) - 1.0).abs() < 1e-15);
        assert!((tv.zeta(3) - 0.5).abs() < 1e-15);
        assert!((tv.eta(7) - 0.5).abs() < 1e-15);

        let scaled = StepSchedule::TimeVarying { a: 0.5, b: 1.0 / 3.0, scale: 20.0, offset: 8.0 };
        scaled.validate().unwrap();
        assert!((scaled.zeta(0) - 8.0f64.powf(-0.5)).abs() < 1e-15);
        assert!((scaled.eta(0) - 0.5).abs() < 1e-15);
        assert!((scaled.zeta(1) - 28.0f64.powf(-0.5)).abs() < 1e-15);

        let fixed = StepSchedule::Fixed { a: 0.5, b: 1.0 / 3.0, horizon: 100, offset: 30.0 };
        fixed.validate().unwrap();
        assert!((fixed.zeta(0) - 130.0f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(fixed.zeta(7), fixed.zeta(93));

        for t in 0..200 {
            assert!(scaled.zeta(t) <= scaled.eta(t));
            assert!(tv.zeta(t) <= tv.eta(t));
        }

        assert!(StepSchedule::time_varying(0.5, 0.5).is_err()); // a = b
        assert!(StepSchedule::time_varying(0.9, 0.4).is_err()); // a >= 2b
        assert!(StepSchedule::time_varying(1.0, 0.6).is_err()); // a out of range
        assert!(StepSchedule::TimeVarying { a: 0.5, b: 1.0 / 3.0, scale: 1.0, offset: 0.5 }
            .validate()
            .is_err());
    }

    #[test]
    fn primal_step_closed_form_cases() {
        let geom = BregmanGeometry::euclidean();
        let omega = FeasibleSet::interval(-2.0, 2.0).unwrap();
        // Zero tilt returns the anchor.
        let x = primal_step(&geom, &omega, &[0.7], &[0.0], &[vec![0.0]], &[0.0], 0.1, 0.2).unwrap();
        assert_eq!(x, vec![0.7]);
        // Combined tilt 2 from z=0 lands at −1: ζ·grad = 2 with η·jac·y = 0.
        let x = primal_step(&geom, &omega, &[0.0], &[4.0], &[vec![0.0]], &[0.0], 0.5, 0.6).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-12);
        // zeta > eta rejected.
        assert!(primal_step(&geom, &omega, &[0.0], &[1.0], &[vec![0.0]], &[0.0], 0.5, 0.3).is_err());
    }

    #[test]
    fn dual_step_closed_form_cases() {
        let seq = crate::graph::GraphSequence::cyclic(
            vec![crate::graph::WeightedDigraph::complete(2).unwrap()],
            1,
        )
        .unwrap();
        // Zero duals, nonpositive g: stays zero.
        let y = dual_step(&seq, 0, &[vec![0.0], vec![0.0]], &[vec![-1.0], vec![0.0]], 0.5).unwrap();
        assert_eq!(y, vec![vec![0.0], vec![0.0]]);
        // eta = 1 annihilates mixing.
        let y = dual_step(&seq, 0, &[vec![5.0], vec![7.0]], &[vec![2.0], vec![-3.0]], 1.0).unwrap();
        assert_eq!(y, vec![vec![2.0], vec![0.0]]);
        // Convex-combination example: (1−.5)(.5·1+.5·3) = 1 for both agents.
        let y = dual_step(&seq, 0, &[vec![1.0], vec![3.0]], &[vec![0.0], vec![0.0]], 0.5).unwrap();
        assert_eq!(y, vec![vec![1.0], vec![1.0]]);
    }

    #[test]
    fn horizon_zero_trace_holds_initial_states_only() {
        let inst = example1(ConstraintCount::Six);
        let seq = six_agent_ring_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        let trace = run_exact(&inst, &seq, &geom, &sched, 0, None).unwrap();
        assert_eq!(trace.states.len(), 1);
        assert!(trace.steps.is_empty());
        assert_eq!(trace.states[0][0].x, vec![-2.0]);
        assert_eq!(trace.states[0][3].y, vec![0.0]);
    }

    #[test]
    fn zero_oracles_degenerate_to_average_consensus() {
        let inst = zero_instance(6);
        let seq = six_agent_ring_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        let init: Vec<Vec<f64>> = vec![
            vec![-2.0],
            vec![-1.0],
            vec![0.5],
            vec![1.5],
            vec![2.0],
            vec![-0.5],
        ];
        let mean: f64 = init.iter().map(|v| v[0]).sum::<f64>() / 6.0;
        let trace = run_exact(&inst, &seq, &geom, &sched, 200, Some(&init)).unwrap();
        for round in &trace.states {
            let avg: f64 = round.iter().map(|s| s.x[0]).sum::<f64>() / 6.0;
            assert!((avg - mean).abs() < 1e-12, "mixing must preserve the average");
            for s in round {
                assert_eq!(s.y, vec![0.0]);
            }
        }
        let last = trace.states.last().unwrap();
        for s in last {
            assert!((s.x[0] - mean).abs() < 1e-4, "not mixed: {} vs {mean}", s.x[0]);
        }
    }

    #[test]
    fn exact_run_respects_feasibility_and_dual_bound() {
        let inst = example1(ConstraintCount::Six);
        let seq = six_agent_ring_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::TimeVarying { a: 0.5, b: 1.0 / 3.0, scale: 20.0, offset: 8.0 };
        let trace = run_exact(&inst, &seq, &geom, &sched, 300, None).unwrap();
        assert_eq!(trace.states.len(), 301);
        let bound = (6.0f64).sqrt() * inst.bounds.unwrap().kappa2 + 1e-9;
        for round in &trace.states {
            for s in round {
                assert!(inst.omega.contains(&s.x, 1e-9));
                assert!(s.y.iter().all(|v| *v >= 0.0));
                assert!(crate::geometry::norm(&s.y) <= bound);
            }
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let inst = example1(ConstraintCount::Six);
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::time_varying(0.5, 1.0 / 3.0).unwrap();
        // Wrong agent count in the graph.
        let seq5 = five_agent_sequence();
        assert!(run_exact(&inst, &seq5, &geom, &sched, 10, None).is_err());
        // Initial state outside the set.
        let seq = six_agent_ring_sequence();
        let bad = vec![vec![3.0]; 6];
        assert!(run_exact(&inst, &seq, &geom, &sched, 10, Some(&bad)).is_err());
        // Stochastic runs demand the fixed schedule.
        let noise = NoiseModel { sigma1: 0.1, sigma2: 0.1 };
        assert!(matches!(
            run_stochastic(&inst, &seq, &geom, &sched, 10, None, &noise, 1),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn stochastic_runs_are_seed_deterministic() {
        let inst = example2(EpsSign::Capacity);
        let seq = five_agent_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::Fixed { a: 0.5, b: 1.0 / 3.0, horizon: 60, offset: 30.0 };
        let noise = NoiseModel { sigma1: 1.0, sigma2: 0.5 };
        let t1 = run_stochastic(&inst, &seq, &geom, &sched, 60, None, &noise, 42).unwrap();
        let t2 = run_stochastic(&inst, &seq, &geom, &sched, 60, None, &noise, 42).unwrap();
        for (a, b) in t1.states.iter().zip(&t2.states) {
            assert_eq!(a, b);
        }
        let t3 = run_stochastic(&inst, &seq, &geom, &sched, 60, None, &noise, 43).unwrap();
        assert_ne!(t1.states.last(), t3.states.last());
    }

    #[test]
    fn zero_noise_stochastic_equals_exact_on_fixed_steps() {
        let inst = example2(EpsSign::Capacity);
        let seq = five_agent_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::Fixed { a: 0.5, b: 1.0 / 3.0, horizon: 50, offset: 30.0 };
        let noiseless = NoiseModel::noiseless();
        let st = run_stochastic(&inst, &seq, &geom, &sched, 50, None, &noiseless, 7).unwrap();
        let ex = run_exact(&inst, &seq, &geom, &sched, 50, None).unwrap();
        for (ra, rb) in st.states.iter().zip(&ex.states) {
            for (a, b) in ra.iter().zip(rb) {
                assert_eq!(a.x, b.x);
                assert_eq!(a.y, b.y);
            }
        }
    }

    #[test]
    fn trace_csv_has_declared_schema() {
        let inst = example2(EpsSign::Capacity);
        let seq = five_agent_sequence();
        let geom = BregmanGeometry::euclidean();
        let sched = StepSchedule::Fixed { a: 0.5, b: 1.0 / 3.0, horizon: 3, offset: 30.0 };
        let trace = run_exact(&inst, &seq, &geom, &sched, 3, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&trace, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "round,agent,coord,x,y_1,zeta,eta");
        // 4 state rows × 5 agents × 5 coords.
        assert_eq!(lines.count(), 4 * 5 * 5);
    }
}
