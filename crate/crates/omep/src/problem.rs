//! MEP instance definitions: oracle bundles, the two built-in benchmark
//! problems, a separable constructor, synthetic instance generation, and
//! Monte-Carlo estimation of the bound constants used by the certificate
//! checker.
//!
//! An instance describes n agents cooperating on a mixed equilibrium problem
//! over a common compact convex set Ω: find x* feasible for the coupled
//! constraint Σ_i g_i^t(x) ≤ 0 with Σ_i f_i^t(x*, y) ≥ 0 for all feasible y.
//! Agents are indexed 0-based throughout the API; the built-in formulas use
//! the 1-based rank i+1 internally.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{dist, norm, FeasibleSet};
use crate::{Error, Result};

/// ∇₂f_i^t(x,x): the bifunction's second-argument gradient on the diagonal.
pub type GradOracle = Arc<dyn Fn(usize, u64, &[f64]) -> Vec<f64> + Send + Sync>;
/// f_i^t(x,y).
pub type ValueOracle = Arc<dyn Fn(usize, u64, &[f64], &[f64]) -> f64 + Send + Sync>;
/// g_i^t(x): the agent's h-vector constraint block.
pub type ConstraintOracle = Arc<dyn Fn(usize, u64, &[f64]) -> Vec<f64> + Send + Sync>;
/// ∇g_i^t(x) as an m×h matrix: row j, column k holds ∂g_{ik}/∂x_j.
pub type JacOracle = Arc<dyn Fn(usize, u64, &[f64]) -> Vec<Vec<f64>> + Send + Sync>;
/// Closed-form benchmark path t → x*_t.
pub type PathOracle = Arc<dyn Fn(u64) -> Vec<f64> + Send + Sync>;
/// Exact projection onto the round-t aggregate-feasible set
/// X^t = Ω ∩ {x : Σ_i g_i^t(x) ≤ 0}, when one is available.
pub type ProjectionOracle = Arc<dyn Fn(u64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Structural hint for the reference solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// f_i^t(x,y) = ψ_i^t(y) − ψ_i^t(x): the optimization reduction.
    Separable,
    /// f_i^t(x,y) = ⟨φ_i^t(x), y−x⟩: the variational-inequality reduction.
    OperatorDriven,
    /// No exploitable structure declared.
    Generic,
}

/// Example 1's constraint summation: over all six agents, or the five-term
/// variant in which the last agent contributes no constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintCount {
    Five,
    Six,
}

/// Example 2's per-agent constraint sign: `Capacity` reads x_i − ε_i ≤ 0
/// (market capacity); `Paper` keeps the literal x_i + ε_i, which makes the
/// aggregate-feasible set empty on the nonnegative box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsSign {
    Capacity,
    Paper,
}

/// Certified magnitude bounds consumed by the certificate checker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Radius bound of Ω: sup ‖x‖.
    pub kappa: f64,
    /// sup ‖∇₂f_i^t(x,x)‖.
    pub kappa1: f64,
    /// sup ‖g_i^t(x)‖.
    pub kappa2: f64,
    /// sup over constraint components k of ‖∇g_{ik}^t(x)‖.
    pub kappa3: f64,
    /// First-argument Lipschitz constant of f_i^t; informational.
    pub l_f: f64,
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.kappa, self.kappa1, self.kappa2, self.kappa3, self.l_f];
        if vals.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidInstance("bound constants must be positive and finite".into()));
        }
        Ok(())
    }
}

/// A full problem instance. Oracles must be pure: identical inputs produce
/// identical outputs; stochasticity is layered on top elsewhere.
#[derive(Clone)]
pub struct MepInstance {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub h: usize,
    pub omega: FeasibleSet,
    pub structure: Structure,
    pub grad2_f: GradOracle,
    pub f_value: Option<ValueOracle>,
    pub g: ConstraintOracle,
    pub jac_g: JacOracle,
    pub solution_path: Option<PathOracle>,
    pub coupled_projection: Option<ProjectionOracle>,
    pub bounds: Option<BoundConstants>,
    /// Canonical initial primal states bundled with the instance, if any.
    pub default_init: Option<Vec<Vec<f64>>>,
}

impl std::fmt::Debug for MepInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MepInstance")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("h", &self.h)
            .field("omega", &self.omega)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl MepInstance {
    /// Aggregate constraint Σ_i g_i^t(x), the h-vector whose nonpositivity
    /// defines round-t feasibility.
    pub fn aggregate_g(&self, t: u64, x: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.h];
        for i in 0..self.n {
            let gi = (self.g)(i, t, x);
            for (a, v) in acc.iter_mut().zip(&gi) {
                *a += v;
            }
        }
        acc
    }

    /// Aggregate diagonal operator Σ_i ∇₂f_i^t(x,x); the gradient field of
    /// the aggregate objective in the separable case and the game operator in
    /// the operator-driven case.
    pub fn aggregate_grad(&self, t: u64, x: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.m];
        for i in 0..self.n {
            let gi = (self.grad2_f)(i, t, x);
            for (a, v) in acc.iter_mut().zip(&gi) {
                *a += v;
            }
        }
        acc
    }

    /// Σ_i f_i^t(x, y); errors when the instance carries no value oracle.
    pub fn aggregate_f(&self, t: u64, x: &[f64], y: &[f64]) -> Result<f64> {
        let f = self.f_value.as_ref().ok_or(Error::MissingValues)?;
        Ok((0..self.n).map(|i| f(i, t, x, y)).sum())
    }
}

/// Tracking benchmark over a box with a time-varying quadratic game among
/// six agents on a scalar decision. Bifunctions are separable,
/// f_i^t(x,y) = ψ_i^t(y) − ψ_i^t(x) with ψ rank-weighted quadratics driven by
/// sin t, and each agent's scalar constraint is a rank-tilted parabola.
pub fn example1(variant: ConstraintCount) -> MepInstance {
    let n = 6usize;
    let contributes = move |i: usize| variant == ConstraintCount::Six || i < 5;

    let grad2_f: GradOracle = Arc::new(|i, t, x| {
        let r = (i + 1) as f64;
        vec![r * x[0] - 3.0 * (t as f64).sin()]
    });
    let f_value: ValueOracle = Arc::new(|i, t, x, y| {
        let r = (i + 1) as f64;
        let s = (t as f64).sin();
        0.5 * r * (y[0] * y[0] - x[0] * x[0]) - 3.0 * (y[0] - x[0]) * s
    });
    let g: ConstraintOracle = Arc::new(move |i, t, x| {
        if !contributes(i) {
            return vec![0.0];
        }
        let r = (i + 1) as f64;
        let s = (t as f64).sin();
        vec![(s + 1.0) * x[0] * x[0] - (r / 6.0) * x[0]]
    });
    let jac_g: JacOracle = Arc::new(move |i, t, x| {
        if !contributes(i) {
            return vec![vec![0.0]];
        }
        let r = (i + 1) as f64;
        let s = (t as f64).sin();
        vec![vec![2.0 * (s + 1.0) * x[0] - r / 6.0]]
    });
    let solution_path: PathOracle = Arc::new(|t| vec![6.0 * (t as f64).sin() / 7.0]);

    // Σ_i g_i^t(x) = A(s+1)x² − Bx with A the contributing count and
    // B = Σ ranks/6, so X^t = [0, min(2, B/(A(s+1)))].
    let (a_cnt, b_sum) = match variant {
        ConstraintCount::Six => (6.0, 21.0 / 6.0),
        ConstraintCount::Five => (5.0, 15.0 / 6.0),
    };
    let coupled_projection: ProjectionOracle = Arc::new(move |t, v| {
        let s = (t as f64).sin();
        let denom = a_cnt * (s + 1.0);
        let ub = if denom > 0.0 { (b_sum / denom).min(2.0) } else { 2.0 };
        vec![v[0].clamp(0.0, ub)]
    });

    // Suprema over Ω=[−2,2], |sin|≤1, ranks ≤ 6:
    // ‖∇₂f‖ ≤ 6·2+3 = 15; |g| ≤ 2·4+2 = 10; |∇g| ≤ 2·2·2+1 = 9;
    // |f(x,z)−f(y,z)| ≤ (3|x+y|+3)|x−y| ≤ 15|x−y|.
    let bounds = BoundConstants { kappa: 2.0, kappa1: 15.0, kappa2: 10.0, kappa3: 9.0, l_f: 15.0 };

    MepInstance {
        name: match variant {
            ConstraintCount::Six => "tracking-game-6".into(),
            ConstraintCount::Five => "tracking-game-5".into(),
        },
        n,
        m: 1,
        h: 1,
        omega: FeasibleSet::interval(-2.0, 2.0).expect("static bounds"),
        structure: Structure::Separable,
        grad2_f,
        f_value: Some(f_value),
        g,
        jac_g,
        solution_path: Some(solution_path),
        coupled_projection: Some(coupled_projection),
        bounds: Some(bounds),
        default_init: Some(
            [-2.0, -1.5, -1.0, 2.0, 1.5, 1.0].iter().map(|&v| vec![v]).collect(),
        ),
    }
}

const EX2_EPS: [f64; 5] = [10.0, 15.0, 8.0, 8.0, 15.0];

fn ex2_price_sensitivity(t: u64) -> f64 {
    5.0 * (t as f64 / 6.0).sin()
}

fn ex2_demand_intercept(rank: f64, t: u64) -> f64 {
    5.0 * rank + 45.0 - 2.5 * rank * (t as f64 / 6.0).sin()
}

/// Marginal expected cost of producer i at the joint quantity vector x:
/// the i-th entry of the game operator.
fn ex2_marginal(i: usize, t: u64, x: &[f64]) -> f64 {
    let r = (i + 1) as f64;
    let total: f64 = x.iter().sum();
    ex2_price_sensitivity(t) - ex2_demand_intercept(r, t) + total + x[i]
}

/// Online quantity game among five producers sharing one market. Each agent
/// estimates the full 5-vector of quantities; bifunctions take the
/// operator-driven form f_i^t(x,y) = ⟨φ_i^t(x), y−x⟩ with φ_i^t the
/// coordinate-embedded marginal cost, and the coupled constraint is the
/// aggregate market capacity.
pub fn example2(sign: EpsSign) -> MepInstance {
    let n = 5usize;
    let m = 5usize;

    let grad2_f: GradOracle = Arc::new(|i, t, x| {
        let mut v = vec![0.0; 5];
        v[i] = ex2_marginal(i, t, x);
        v
    });
    let f_value: ValueOracle =
        Arc::new(|i, t, x, y| ex2_marginal(i, t, x) * (y[i] - x[i]));
    let g: ConstraintOracle = Arc::new(move |i, _t, x| match sign {
        EpsSign::Capacity => vec![x[i] - EX2_EPS[i]],
        EpsSign::Paper => vec![x[i] + EX2_EPS[i]],
    });
    let jac_g: JacOracle = Arc::new(|i, _t, _x| {
        (0..5).map(|j| vec![if j == i { 1.0 } else { 0.0 }]).collect()
    });
    // The closed-form equilibrium only exists under the capacity sign; the
    // literal sign empties the aggregate-feasible set, so that variant has
    // no comparator path and regret evaluation must go through the
    // reference solver's infeasibility detection.
    let solution_path: Option<PathOracle> = match sign {
        EpsSign::Capacity => Some(Arc::new(|t| {
            let s = (t as f64 / 6.0).sin();
            vec![
                (35.0 / 12.0 * s).abs(),
                5.0 + 5.0 / 12.0 * s,
                10.0 - 25.0 / 12.0 * s,
                15.0 - 55.0 / 12.0 * s,
                20.0 - 85.0 / 12.0 * s,
            ]
        })),
        EpsSign::Paper => None,
    };

    // Capacity sign: X^t = [0,30]⁵ ∩ {Σx ≤ Σε = 56}, an exactly projectable
    // box/halfspace intersection. The literal sign admits no feasible point,
    // so no projector is attached and the reference solver reports
    // infeasibility instead.
    let coupled_projection: Option<ProjectionOracle> = match sign {
        EpsSign::Capacity => Some(Arc::new(|_t, v| {
            project_box_halfspace(v, 0.0, 30.0, EX2_EPS.iter().sum())
        })),
        EpsSign::Paper => None,
    };

    // Suprema over Ω=[0,30]⁵: |marginal| ≤ |5| + |S| + |x_i| + max|l_r|
    //   ≤ 5 + 150 + 30 − min l_r with l_r ∈ [47.5, 82.5] → ≤ 137.5.
    // |g| ≤ max(30−8, 15) = 22 (capacity) or 30+15 = 45 (literal).
    // ‖∇_x f(·,z)‖ ≤ √8·30 + 137.5 ≤ 223.
    let kappa2 = match sign {
        EpsSign::Capacity => 22.0,
        EpsSign::Paper => 45.0,
    };
    let bounds = BoundConstants {
        kappa: 30.0 * (5.0f64).sqrt(),
        kappa1: 137.5,
        kappa2,
        kappa3: 1.0,
        l_f: 223.0,
    };

    MepInstance {
        name: match sign {
            EpsSign::Capacity => "quantity-game-capacity".into(),
            EpsSign::Paper => "quantity-game-literal".into(),
        },
        n,
        m,
        h: 1,
        omega: FeasibleSet::box_set(vec![0.0; 5], vec![30.0; 5]).expect("static bounds"),
        structure: Structure::OperatorDriven,
        grad2_f,
        f_value: Some(f_value),
        g,
        jac_g,
        solution_path,
        coupled_projection,
        bounds: Some(bounds),
        default_init: Some(vec![
            vec![10.0, 15.0, 20.0, 25.0, 30.0],
            vec![5.0, 10.0, 15.0, 20.0, 25.0],
            vec![3.0, 8.0, 13.0, 18.0, 23.0],
            vec![5.0, 10.0, 15.0, 20.0, 25.0],
            vec![10.0, 15.0, 20.0, 25.0, 30.0],
        ]),
    }
}

/// Exact Euclidean projection onto {x : lo ≤ x ≤ hi, Σx ≤ cap} by bisection
/// on the halfspace multiplier: the KKT solution is clip(v − μ·1) with μ ≥ 0
/// and complementary slackness on the sum.
pub fn project_box_halfspace(v: &[f64], lo: f64, hi: f64, cap: f64) -> Vec<f64> {
    let clip = |mu: f64| -> Vec<f64> { v.iter().map(|x| (x - mu).clamp(lo, hi)).collect() };
    let p0 = clip(0.0);
    if p0.iter().sum::<f64>() <= cap {
        return p0;
    }
    let mut lo_mu = 0.0;
    let mut hi_mu = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - lo;
    // Σ clip(v − μ) is continuous and nonincreasing in μ; bisect to the cap.
    for _ in 0..200 {
        let mid = 0.5 * (lo_mu + hi_mu);
        if clip(mid).iter().sum::<f64>() > cap {
            lo_mu = mid;
        } else {
            hi_mu = mid;
        }
    }
    clip(hi_mu)
}

/// Optimization-reduction constructor: f_i^t(x,y) = ψ_i^t(y) − ψ_i^t(x) from
/// per-agent convex families, with optional constraints (zero when omitted).
pub fn builtin_separable(
    name: &str,
    n: usize,
    omega: FeasibleSet,
    psi_value: Arc<dyn Fn(usize, u64, &[f64]) -> f64 + Send + Sync>,
    psi_grad: Arc<dyn Fn(usize, u64, &[f64]) -> Vec<f64> + Send + Sync>,
    constraint: Option<(usize, ConstraintOracle, JacOracle)>,
) -> Result<MepInstance> {
    if n < 2 {
        return Err(Error::InvalidInstance("need at least two agents".into()));
    }
    let m = omega.dim();
    let (h, g, jac_g) = match constraint {
        Some((h, g, j)) => (h, g, j),
        None => {
            let g: ConstraintOracle = Arc::new(|_i, _t, _x| vec![0.0]);
            let jac: JacOracle = Arc::new(move |_i, _t, x| vec![vec![0.0]; x.len()]);
            (1, g, jac)
        }
    };
    let pv = psi_value.clone();
    let f_value: ValueOracle =
        Arc::new(move |i, t, x, y| pv(i, t, y) - pv(i, t, x));
    let pg = psi_grad.clone();
    let grad2_f: GradOracle = Arc::new(move |i, t, x| pg(i, t, x));
    Ok(MepInstance {
        name: name.into(),
        n,
        m,
        h,
        omega,
        structure: Structure::Separable,
        grad2_f,
        f_value: Some(f_value),
        g,
        jac_g,
        solution_path: None,
        coupled_projection: None,
        bounds: None,
        default_init: None,
    })
}

/// Deterministic random separable instance: per-agent strongly convex
/// quadratics with a slow sinusoidal drift and affine constraints kept
/// strictly feasible at the box center. Used by the invariant suites.
pub fn synthetic_separable(n: usize, m: usize, h: usize, seed: u64) -> Result<MepInstance> {
    if n < 2 || m == 0 || h == 0 {
        return Err(Error::InvalidInstance("synthetic instance needs n >= 2, m >= 1, h >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1));
    let omega = FeasibleSet::box_set(vec![-1.0; m], vec![1.0; m])?;

    // ψ_i^t(x) = ½ Σ_j q_ij x_j² + (1 + ½ sin(t/8)) c_iᵀ x.
    let q: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(0.5..2.0)).collect())
        .collect();
    let c: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    // Constraint rows w_ik and offsets fixing Σ_i g_ik(center) = −margin.
    let w: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| {
            (0..h)
                .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        })
        .collect();
    let d: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..h).map(|_| rng.random_range(0.1..0.5)).collect())
        .collect();

    let qv = q.clone();
    let cv = c.clone();
    let psi_value = move |i: usize, t: u64, x: &[f64]| -> f64 {
        let drift = 1.0 + 0.5 * (t as f64 / 8.0).sin();
        let quad: f64 = x.iter().zip(&qv[i]).map(|(xj, qj)| 0.5 * qj * xj * xj).sum();
        let lin: f64 = x.iter().zip(&cv[i]).map(|(xj, cj)| cj * xj).sum();
        quad + drift * lin
    };
    let qg = q.clone();
    let cg = c.clone();
    let psi_grad = move |i: usize, t: u64, x: &[f64]| -> Vec<f64> {
        let drift = 1.0 + 0.5 * (t as f64 / 8.0).sin();
        x.iter()
            .zip(qg[i].iter().zip(&cg[i]))
            .map(|(xj, (qj, cj))| qj * xj + drift * cj)
            .collect()
    };

    let wg = w.clone();
    let dg = d.clone();
    let g: ConstraintOracle = Arc::new(move |i, _t, x| {
        (0..h)
            .map(|k| x.iter().zip(&wg[i][k]).map(|(xj, wj)| xj * wj).sum::<f64>() - dg[i][k])
            .collect()
    });
    let wj = w.clone();
    let jac_g: JacOracle = Arc::new(move |i, _t, _x| {
        (0..m).map(|j| (0..h).map(|k| wj[i][k][j]).collect()).collect()
    });

    let mut inst = builtin_separable(
        &format!("synthetic-separable-{seed}"),
        n,
        omega,
        Arc::new(psi_value),
        Arc::new(psi_grad),
        Some((h, g, jac_g)),
    )?;
    inst.bounds = Some(estimate_bounds(&inst, 4000, seed ^ 0xb0f)?);
    Ok(inst)
}

/// Monte-Carlo suprema of the oracle magnitudes over Ω and sampled rounds,
/// inflated ×1.1 and floored at 1e−9; κ is the exact set radius. Deterministic
/// for a fixed seed.
pub fn estimate_bounds(inst: &MepInstance, samples: usize, seed: u64) -> Result<BoundConstants> {
    if samples < 1000 {
        return Err(Error::Contract("bound estimation needs at least 1000 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k1: f64 = 0.0;
    let mut k2: f64 = 0.0;
    let mut k3: f64 = 0.0;
    let mut lf: f64 = 0.0;
    for _ in 0..samples {
        let t = rng.random_range(0..4096u64);
        let i = rng.random_range(0..inst.n);
        let x = inst.omega.sample(&mut rng);
        let nonfinite = |v: &[f64]| v.iter().any(|a| !a.is_finite());

        let gf = (inst.grad2_f)(i, t, &x);
        if gf.len() != inst.m || nonfinite(&gf) {
            return Err(Error::NonFiniteOracle { agent: i, round: t });
        }
        k1 = k1.max(norm(&gf));

        let gv = (inst.g)(i, t, &x);
        if gv.len() != inst.h || nonfinite(&gv) {
            return Err(Error::NonFiniteOracle { agent: i, round: t });
        }
        k2 = k2.max(norm(&gv));

        let jac = (inst.jac_g)(i, t, &x);
        if jac.len() != inst.m || jac.iter().any(|row| row.len() != inst.h || nonfinite(row)) {
            return Err(Error::NonFiniteOracle { agent: i, round: t });
        }
        for k in 0..inst.h {
            let col: f64 = jac.iter().map(|row| row[k] * row[k]).sum::<f64>().sqrt();
            k3 = k3.max(col);
        }

        if let Some(f) = &inst.f_value {
            let x2 = inst.omega.sample(&mut rng);
            let y = inst.omega.sample(&mut rng);
            let gap = dist(&x, &x2);
            if gap > 1e-9 {
                let fv = f(i, t, &x, &y);
                let fv2 = f(i, t, &x2, &y);
                if !fv.is_finite() || !fv2.is_finite() {
                    return Err(Error::NonFiniteOracle { agent: i, round: t });
                }
                lf = lf.max((fv - fv2).abs() / gap);
            }
        }
    }
    let inflate = |v: f64| (v * 1.1).max(1e-9);
    let out = BoundConstants {
        kappa: inst.omega.radius(),
        kappa1: inflate(k1),
        kappa2: inflate(k2),
        kappa3: inflate(k3),
        l_f: inflate(lf),
    };
    out.validate()?;
    Ok(out)
}

/// Structural validation: oracle output shapes, the diagonal identity
/// f_i^t(x,x) = 0, and finite-difference consistency of both gradients.
pub fn validate_instance(inst: &MepInstance, samples: usize, seed: u64) -> Result<()> {
    if inst.n < 2 {
        return Err(Error::InvalidInstance("need at least two agents".into()));
    }
    if inst.omega.dim() != inst.m {
        return Err(Error::InvalidInstance("set dimension disagrees with m".into()));
    }
    if let Some(p) = &inst.solution_path {
        if p(0).len() != inst.m {
            return Err(Error::InvalidInstance("solution path dimension disagrees with m".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let eps = 1e-6;
    for _ in 0..samples {
        let t = rng.random_range(0..512u64);
        let i = rng.random_range(0..inst.n);
        let x = inst.omega.sample(&mut rng);

        if let Some(f) = &inst.f_value {
            let diag = f(i, t, &x, &x);
            if diag.abs() > 1e-12 {
                return Err(Error::InvalidInstance(format!(
                    "f(x,x) = {diag:.3e} violates the diagonal identity at agent {i}, round {t}"
                )));
            }
            // ∇₂f at (x,x) against a central difference in the second slot.
            let grad = (inst.grad2_f)(i, t, &x);
            for j in 0..inst.m {
                let mut yp = x.clone();
                let mut ym = x.clone();
                yp[j] += eps;
                ym[j] -= eps;
                let fd = (f(i, t, &x, &yp) - f(i, t, &x, &ym)) / (2.0 * eps);
                if (fd - grad[j]).abs() > 1e-5 * (1.0 + grad[j].abs()) {
                    return Err(Error::InvalidInstance(format!(
                        "grad2_f[{j}] = {} disagrees with finite difference {fd} at agent {i}, round {t}",
                        grad[j]
                    )));
                }
            }
        }

        let jac = (inst.jac_g)(i, t, &x);
        for j in 0..inst.m {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += eps;
            xm[j] -= eps;
            let gp = (inst.g)(i, t, &xp);
            let gm = (inst.g)(i, t, &xm);
            for k in 0..inst.h {
                let fd = (gp[k] - gm[k]) / (2.0 * eps);
                if (fd - jac[j][k]).abs() > 1e-5 * (1.0 + jac[j][k].abs()) {
                    return Err(Error::InvalidInstance(format!(
                        "jac_g[{j}][{k}] = {} disagrees with finite difference {fd} at agent {i}, round {t}",
                        jac[j][k]
                    )));
                }
            }
        }
    }
    Ok(())
}
