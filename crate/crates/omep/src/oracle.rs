//! Stochastic gradient noise and centralized reference solutions.
//!
//! The noise model implements the sub-Gaussian contract
//! E[exp(‖ξ‖²/σ²)] ≤ e with zero-mean Gaussian perturbations. Calibration:
//! a d-component Gaussian with per-component variance s² has
//! E[exp(‖ξ‖²/σ²)] = (1 − 2s²/σ²)^{−d/2}; choosing
//! s² = σ²·0.95·(1 − e^{−2/d})/2 makes the log-moment −(d/2)ln(1 − 0.95(1−e^{−2/d})),
//! which is increasing in d toward its limit 0.95 < 1, so the bound holds for
//! every dimension (including d = 1, where a naive 1/(2d) scaling diverges).
//!
//! The reference solver produces the per-round benchmark x*_t: a certified
//! solution of the instantaneous problem over X^t = Ω ∩ {Σ_i g_i^t ≤ 0},
//! via golden-section search (scalar separable instances with an exact X^t
//! projector), extragradient iteration on the aggregate operator (general
//! case), or a squared-hinge penalty homotopy when no exact projector exists.
//! Every solution is gated by the probe inequality Σ_i f_i^t(x̂, y) ≥ −10·tol
//! at randomly sampled feasible y.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::dist;
use crate::problem::MepInstance;
use crate::{Error, Result};

/// Gaussian noise attached to the stochastic algorithm's gradient oracles.
/// `sigma1` scales the bifunction-gradient channel, `sigma2` the
/// constraint-Jacobian channel; either may be zero for a noiseless channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { sigma1: 0.0, sigma2: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma1.is_finite() && self.sigma2.is_finite())
            || self.sigma1 < 0.0
            || self.sigma2 < 0.0
        {
            return Err(Error::InvalidConfig("noise scales must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Per-component standard deviation for a d-dimensional perturbation at
/// channel scale sigma; see the module docs for the calibration argument.
pub fn component_std(sigma: f64, d: usize) -> f64 {
    sigma * (0.95 * (1.0 - (-2.0 / d as f64).exp()) / 2.0).sqrt()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream key for the (agent, round, channel) draw: a SplitMix64 chain makes
/// draws order-independent, so any evaluation schedule reproduces the run.
pub fn stream_key(seed: u64, agent: usize, round: u64, salt: u64) -> u64 {
    let mut k = splitmix64(seed);
    k = splitmix64(k ^ agent as u64);
    k = splitmix64(k ^ round);
    splitmix64(k ^ salt)
}

const SALT_GRAD: u64 = 0;
const SALT_JAC: u64 = 1;

/// b_i^t: exact ∇₂f_i^t(x,x) plus the calibrated Gaussian perturbation.
/// A zero sigma1 skips the draw entirely, so the noiseless stochastic run is
/// bit-identical to the exact gradient.
pub fn noisy_grad2_f(
    inst: &MepInstance,
    i: usize,
    t: u64,
    x: &[f64],
    noise: &NoiseModel,
    seed: u64,
) -> Vec<f64> {
    let mut v = (inst.grad2_f)(i, t, x);
    if noise.sigma1 > 0.0 {
        let s = component_std(noise.sigma1, inst.m);
        let mut rng = ChaCha8Rng::seed_from_u64(stream_key(seed, i, t, SALT_GRAD));
        for vi in &mut v {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            *vi += s * z;
        }
    }
    v
}

/// c_i^t: exact m×h Jacobian ∇g_i^t(x) plus the calibrated perturbation with
/// the whole matrix treated as one (m·h)-dimensional noise vector.
pub fn noisy_jac_g(
    inst: &MepInstance,
    i: usize,
    t: u64,
    x: &[f64],
    noise: &NoiseModel,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut jac = (inst.jac_g)(i, t, x);
    if noise.sigma2 > 0.0 {
        let s = component_std(noise.sigma2, inst.m * inst.h);
        let mut rng = ChaCha8Rng::seed_from_u64(stream_key(seed, i, t, SALT_JAC));
        for row in &mut jac {
            for e in row.iter_mut() {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                *e += s * z;
            }
        }
    }
    jac
}

/// Empirical verification of the exponential-moment contract for one noise
/// channel at dimension `dim`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgaussianReport {
    pub dim: usize,
    pub sigma: f64,
    pub samples: usize,
    /// Monte-Carlo estimate of E[exp(‖ξ‖²/σ²)].
    pub estimate: f64,
    /// Acceptance band around e; covers sampling error of a heavy-tailed
    /// estimator (the summand has infinite variance for small dims, so the
    /// band is floored at 5%).
    pub band: f64,
    pub pass: bool,
}

/// Draws `samples` calibrated noise vectors and estimates their exponential
/// moment. Passes when the estimate is within the band of exp(1); a zero
/// sigma gives exactly 1.
pub fn subgaussian_selfcheck(sigma: f64, dim: usize, samples: usize, seed: u64) -> Result<SubgaussianReport> {
    if samples < 100_000 {
        return Err(Error::Contract("self-check needs at least 1e5 samples".into()));
    }
    if sigma == 0.0 {
        return Ok(SubgaussianReport { dim, sigma, samples, estimate: 1.0, band: 0.0, pass: true });
    }
    let s = component_std(sigma, dim);
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x5e1f));
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for _ in 0..samples {
        let sq: f64 = (0..dim)
            .map(|_| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                (s * z).powi(2)
            })
            .sum();
        let v = (sq / (sigma * sigma)).exp();
        sum += v;
        sumsq += v * v;
    }
    let n = samples as f64;
    let estimate = sum / n;
    let var = (sumsq / n - estimate * estimate).max(0.0);
    let se = (var / n).sqrt();
    let band = (2.0 * se / std::f64::consts::E).max(0.05);
    let pass = estimate <= std::f64::consts::E * (1.0 + band);
    Ok(SubgaussianReport { dim, sigma, samples, estimate, band, pass })
}

// ── reference instantaneous solver ───────────────────────────────────────────

const ORACLE_CAP: usize = 1_000_000;
const PROBES: usize = 1000;

/// Solves the round-t instantaneous problem to `tol` and certifies the
/// result with the MEP probe inequality. Deterministic and idempotent for
/// fixed inputs.
pub fn solve_instantaneous(inst: &MepInstance, t: u64, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Contract("oracle tolerance must be positive".into()));
    }
    let xhat = match (&inst.coupled_projection, inst.structure, inst.m) {
        (Some(proj), crate::problem::Structure::Separable, 1) => {
            golden_section_scalar(inst, t, proj, tol)?
        }
        (Some(proj), _, _) => {
            let p = proj.clone();
            let start = p(t, &inst.omega.center());
            extragradient(start, move |v: &[f64]| p(t, v), |x| inst.aggregate_grad(t, x), tol)?
        }
        (None, _, _) => penalty_homotopy(inst, t, tol)?,
    };
    certify(inst, t, &xhat, tol)?;
    Ok(xhat)
}

/// Scalar separable case: the aggregate objective is convex on the feasible
/// interval, recovered through the exact projector's fixed points; golden
/// section then brackets the minimizer to `tol`.
fn golden_section_scalar(
    inst: &MepInstance,
    t: u64,
    proj: &crate::problem::ProjectionOracle,
    tol: f64,
) -> Result<Vec<f64>> {
    let big = inst.omega.radius() * 4.0 + 1.0;
    let mut lo = proj(t, &[-big])[0];
    let mut hi = proj(t, &[big])[0];
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    // Anchoring the first slot anywhere fixed turns Σf_i(x0, ·) into the
    // aggregate objective shifted by a constant.
    let anchor = inst.omega.center();
    let obj = |v: f64| -> Result<f64> { inst.aggregate_f(t, &anchor, &[v]) };
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = obj(c)?;
    let mut fd = obj(d)?;
    let mut it = 0usize;
    while (b - a) > tol {
        if it > 10_000 {
            return Err(Error::OracleStalled { residual: b - a, iterations: it });
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = obj(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = obj(d)?;
        }
        it += 1;
    }
    Ok(vec![0.5 * (a + b)])
}

/// Extragradient iteration on an operator over a projectable set, run to the
/// unit-step natural residual ‖x − P(x − T(x))‖ ≤ tol. The step size is
/// controlled adaptively: τ backtracks until τ·‖T(x̄) − T(x)‖ ≤ ½‖x̄ − x‖
/// (the standard convergence condition), then relaxes, so stiff regions slow
/// the iteration only while it is inside them.
fn extragradient<P, T>(start: Vec<f64>, project: P, op: T, tol: f64) -> Result<Vec<f64>>
where
    P: Fn(&[f64]) -> Vec<f64>,
    T: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = project(&start);
    let mut tau = 1.0f64;
    for it in 0..ORACLE_CAP {
        let tx = op(&x);
        let probe: Vec<f64> = x.iter().zip(&tx).map(|(a, b)| a - b).collect();
        let residual = dist(&x, &project(&probe));
        if residual <= tol {
            return Ok(x);
        }
        if it == ORACLE_CAP - 1 {
            return Err(Error::OracleStalled { residual, iterations: it });
        }
        let mut xbar;
        let mut txbar;
        let mut shrinks = 0usize;
        loop {
            let half: Vec<f64> = x.iter().zip(&tx).map(|(a, b)| a - tau * b).collect();
            xbar = project(&half);
            txbar = op(&xbar);
            let lhs = tau * dist(&txbar, &tx);
            let rhs = 0.5 * dist(&xbar, &x);
            if lhs <= rhs || rhs == 0.0 {
                break;
            }
            tau *= 0.5;
            shrinks += 1;
            if shrinks > 200 {
                return Err(Error::OracleStalled { residual, iterations: it });
            }
        }
        let full: Vec<f64> = x.iter().zip(&txbar).map(|(a, b)| a - tau * b).collect();
        x = project(&full);
        tau = (tau * 1.2).min(1e6);
    }
    unreachable!("loop returns or errors at the cap");
}

/// No exact X^t projector: augment the operator with the gradient of
/// ρ·½‖[Σg]_+‖² and sweep ρ upward, warm-starting each stage. Reports
/// infeasibility when the tightest stage still violates the aggregate
/// constraint (for the built-in game instance this is the literal epsilon
/// sign; see the --epsilon-sign flag).
fn penalty_homotopy(inst: &MepInstance, t: u64, tol: f64) -> Result<Vec<f64>> {
    let mut x = inst.omega.center();
    for stage in 1..=6u32 {
        let rho = 10f64.powi(stage as i32);
        let penalized = |v: &[f64]| -> Vec<f64> {
            let mut out = inst.aggregate_grad(t, v);
            let agg = inst.aggregate_g(t, v);
            // Σ_i jac_i(v) · [agg]_+ scaled by ρ.
            for i in 0..inst.n {
                let jac = (inst.jac_g)(i, t, v);
                for (j, row) in jac.iter().enumerate() {
                    let mut a = 0.0;
                    for (k, e) in row.iter().enumerate() {
                        a += e * agg[k].max(0.0);
                    }
                    out[j] += rho * a;
                }
            }
            out
        };
        x = extragradient(x, |v: &[f64]| inst.omega.project(v), penalized, tol)?;
    }
    let violation = hinge_norm(&inst.aggregate_g(t, &x));
    if violation > 1e3 * tol {
        return Err(Error::Infeasible(format!(
            "aggregate constraint violation {violation:.3e} persists at the stiffest penalty; \
             the round-{t} feasible set appears empty (for the built-in quantity game check \
             the epsilon sign convention, --epsilon-sign)"
        )));
    }
    Ok(x)
}

fn hinge_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a.max(0.0).powi(2)).sum::<f64>().sqrt()
}

/// Soundness gate: Σ_i f_i^t(x̂, y) ≥ −10·tol at feasible probes drawn from a
/// deterministic per-round stream.
fn certify(inst: &MepInstance, t: u64, xhat: &[f64], tol: f64) -> Result<()> {
    if inst.f_value.is_none() {
        return Err(Error::MissingValues);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(t.wrapping_mul(0x9e37_79b9) ^ 0xcafe));
    let mut worst = f64::INFINITY;
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < PROBES && attempts < PROBES * 50 {
        attempts += 1;
        let y = match &inst.coupled_projection {
            Some(p) => p(t, &inst.omega.sample(&mut rng)),
            None => {
                // Rejection-sample the aggregate constraint.
                let cand = inst.omega.sample(&mut rng);
                if hinge_norm(&inst.aggregate_g(t, &cand)) > 1e-7 {
                    continue;
                }
                cand
            }
        };
        let v = inst.aggregate_f(t, xhat, &y)?;
        worst = worst.min(v);
        checked += 1;
    }
    if checked < PROBES / 10 {
        return Err(Error::Infeasible(format!(
            "could not sample feasible probe points at round {t}; the aggregate-feasible set \
             appears (near-)empty (for the built-in quantity game check --epsilon-sign)"
        )));
    }
    if worst < -10.0 * tol {
        return Err(Error::OracleUncertified { gap: worst });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{example1, example2, ConstraintCount, EpsSign};
    use std::sync::Arc;

    #[test]
    fn calibration_moment_below_e_for_all_dims() {
        // Closed form: E[exp(‖ξ‖²/σ²)] = (1 − 2s²/σ²)^{−d/2}.
        for d in 1..=64usize {
            let s = component_std(1.0, d);
            let rho: f64 = 2.0 * s * s;
            assert!(rho < 1.0);
            let log_moment = -(d as f64 / 2.0) * (1.0 - rho).ln();
            assert!(log_moment <= 0.95 + 1e-12, "d={d}: log moment {log_moment}");
            assert!(log_moment > 0.5, "calibration should not be vacuous at d={d}");
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let inst = example1(ConstraintCount::Six);
        let noise = NoiseModel { sigma1: 0.7, sigma2: 0.3 };
        let a = noisy_grad2_f(&inst, 2, 17, &[0.5], &noise, 99);
        let b = noisy_grad2_f(&inst, 2, 17, &[0.5], &noise, 99);
        assert_eq!(a, b);
        let c = noisy_grad2_f(&inst, 2, 18, &[0.5], &noise, 99);
        let d = noisy_grad2_f(&inst, 3, 17, &[0.5], &noise, 99);
        assert_ne!(a, c);
        assert_ne!(a, d);
        // Jacobian channel never shares draws with the gradient channel.
        let j1 = noisy_jac_g(&inst, 2, 17, &[0.5], &noise, 99);
        let j2 = noisy_jac_g(&inst, 2, 17, &[0.5], &noise, 99);
        assert_eq!(j1, j2);
    }

    #[test]
    fn zero_sigma_is_bitwise_exact() {
        let inst = example2(EpsSign::Capacity);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let noise = NoiseModel::noiseless();
        assert_eq!(noisy_grad2_f(&inst, 1, 9, &x, &noise, 1), (inst.grad2_f)(1, 9, &x));
        assert_eq!(noisy_jac_g(&inst, 1, 9, &x, &noise, 1), (inst.jac_g)(1, 9, &x));
    }

    #[test]
    fn noise_is_empirically_unbiased() {
        let inst = example1(ConstraintCount::Six);
        let noise = NoiseModel { sigma1: 1.0, sigma2: 0.5 };
        let x = [0.7];
        let exact = (inst.grad2_f)(2, 5, &x)[0];
        let n = 100_000usize;
        let mean: f64 = (0..n)
            .map(|k| noisy_grad2_f(&inst, 2, 5, &x, &noise, k as u64)[0])
            .sum::<f64>()
            / n as f64;
        let tol = 4.0 * noise.sigma1 / (n as f64).sqrt();
        assert!((mean - exact).abs() < tol, "bias {} vs tol {tol}", mean - exact);
    }

    #[test]
    fn selfcheck_passes_calibrated_fails_inflated() {
        for d in [1usize, 3, 5] {
            let rep = subgaussian_selfcheck(1.0, d, 100_000, 7).unwrap();
            assert!(rep.pass, "d={d}: estimate {} band {}", rep.estimate, rep.band);
        }
        // Inflate the per-component scale ×10 by checking against a sigma 10×
        // smaller than the one used to draw: equivalent to oversized noise.
        let s = component_std(10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sum = 0.0;
        let n = 100_000;
        for _ in 0..n {
            let sq: f64 = (0..2)
                .map(|_| {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    (s * z).powi(2)
                })
                .sum();
            sum += (sq / 1.0).exp(); // judged at sigma = 1
        }
        let estimate = sum / n as f64;
        assert!(estimate > std::f64::consts::E * 1.05);
        // Zero noise: moment exactly 1.
        let rep = subgaussian_selfcheck(0.0, 4, 100_000, 1).unwrap();
        assert_eq!(rep.estimate, 1.0);
        assert!(rep.pass);
    }

    #[test]
    fn scalar_solver_matches_grid_search() {
        let inst = example1(ConstraintCount::Six);
        for t in [0u64, 2, 8, 11, 30] {
            let xhat = solve_instantaneous(&inst, t, 1e-6).unwrap();
            // Independent grid search over the same interval (the acceptance
            // suite repeats this at the full 1e−6 resolution over 50 rounds).
            let proj = inst.coupled_projection.as_ref().unwrap();
            let lo = proj(t, &[-10.0])[0];
            let hi = proj(t, &[10.0])[0];
            let anchor = inst.omega.center();
            let steps = ((hi - lo) / 1e-5).ceil().max(1.0) as usize;
            let mut best = (f64::INFINITY, lo);
            for k in 0..=steps {
                let v = lo + (hi - lo) * k as f64 / steps as f64;
                let f = inst.aggregate_f(t, &anchor, &[v]).unwrap();
                if f < best.0 {
                    best = (f, v);
                }
            }
            assert!(
                (xhat[0] - best.1).abs() < 1e-4,
                "t={t}: solver {} vs grid {}",
                xhat[0],
                best.1
            );
        }
        // t=0 reproduces the closed-form benchmark value 0.
        let x0 = solve_instantaneous(&inst, 0, 1e-6).unwrap();
        assert!(x0[0].abs() < 1e-4);
    }

    #[test]
    fn game_solver_recovers_equilibrium_at_round_zero() {
        let inst = example2(EpsSign::Capacity);
        let xhat = solve_instantaneous(&inst, 0, 1e-6).unwrap();
        let expected = [0.0, 5.0, 10.0, 15.0, 20.0];
        for (a, b) in xhat.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-4, "{xhat:?}");
        }
        // Idempotence: bit-identical on repeat.
        let again = solve_instantaneous(&inst, 0, 1e-6).unwrap();
        assert_eq!(xhat, again);
    }

    #[test]
    fn literal_sign_reports_infeasible() {
        let inst = example2(EpsSign::Paper);
        match solve_instantaneous(&inst, 0, 1e-6) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("epsilon-sign")),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn certification_rejects_lying_gradients() {
        // Value oracle says minimize ψ, gradient oracle points the wrong way.
        // Declared operator-driven so the solver consults the (lying)
        // gradient; it lands at a maximizer and the probe gate must catch it.
        let mut inst = example1(ConstraintCount::Six);
        inst.structure = crate::problem::Structure::OperatorDriven;
        inst.grad2_f = Arc::new(|i, t, x| {
            let r = (i + 1) as f64;
            vec![-(r * x[0] - 3.0 * (t as f64).sin())]
        });
        match solve_instantaneous(&inst, 8, 1e-6) {
            Err(Error::OracleUncertified { gap }) => assert!(gap < 0.0),
            other => panic!("expected certification failure, got {other:?}"),
        }
    }

    #[test]
    fn penalty_path_handles_missing_projector() {
        // Capacity instance with the projector stripped: the homotopy must
        // still find the certified solution.
        let mut inst = example2(EpsSign::Capacity);
        inst.coupled_projection = None;
        let xhat = solve_instantaneous(&inst, 0, 1e-6).unwrap();
        let expected = [0.0, 5.0, 10.0, 15.0, 20.0];
        for (a, b) in xhat.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-3, "{xhat:?}");
        }
    }
}
