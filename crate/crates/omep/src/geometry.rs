//! Feasible sets, Bregman divergences, and the mirror-descent argmin step.
//!
//! The primal update of both online algorithms is
//!
//! ```text
//! x̂ = argmin_{x∈Ω} { D_φ(x, z) + ⟨s, x⟩ },
//! ```
//!
//! where D_φ(x,y) = φ(x) − φ(y) − ⟨∇φ(y), x−y⟩ is the Bregman divergence of a
//! strongly convex generator φ. Three generators are supported, in their
//! un-halved forms:
//!
//! - Euclidean: D(x,y) = ‖x−y‖² (μ = 2, K = 1), closed form
//!   x̂ = Proj_Ω(z − s/2) for every set variant with an exact projection.
//! - Mahalanobis: D(x,y) = (x−y)ᵀP⁻¹(x−y) for symmetric positive definite P;
//!   solved by a projected-gradient inner iteration.
//! - KL: D(x,y) = Σ x_i (ln x_i − ln y_i) on a floored probability simplex;
//!   closed form by exponentiated reweighting with an active floor set.
//!
//! The solution x̂ is characterized by the variational inequality
//! ⟨s, x̂−w⟩ ≤ D_φ(w,z) − D_φ(w,x̂) − D_φ(x̂,z) for all w ∈ Ω; tests probe it
//! directly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Inner-solver convergence tolerance on the projected-gradient residual.
const INNER_TOL: f64 = 1e-10;
/// Inner-solver iteration cap.
const INNER_CAP: usize = 10_000;

// ── feasible sets ────────────────────────────────────────────────────────────

/// Compact convex feasible set Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FeasibleSet {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex { dim: usize, floor: f64 },
    Product { parts: Vec<FeasibleSet> },
}

impl FeasibleSet {
    pub fn box_set(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidGeometry("box bounds empty or mismatched".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !l.is_finite() || !u.is_finite() || l > u) {
            return Err(Error::InvalidGeometry("box needs finite lower <= upper".into()));
        }
        Ok(Self::Box { lower, upper })
    }

    /// One-dimensional box.
    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::box_set(vec![lower], vec![upper])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidGeometry("ball needs a positive finite radius".into()));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn simplex(dim: usize, floor: f64) -> Result<Self> {
        if dim == 0 || floor < 0.0 || floor * dim as f64 > 1.0 {
            return Err(Error::InvalidGeometry("simplex needs dim >= 1 and floor*dim <= 1".into()));
        }
        Ok(Self::Simplex { dim, floor })
    }

    pub fn product(parts: Vec<FeasibleSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidGeometry("empty product set".into()));
        }
        Ok(Self::Product { parts })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::Ball { center, .. } => center.len(),
            Self::Simplex { dim, .. } => *dim,
            Self::Product { parts } => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    /// Radius bound κ = max_{x∈Ω} ‖x‖, exact per variant.
    pub fn radius(&self) -> f64 {
        match self {
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l.abs().max(u.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Self::Ball { center, radius } => norm(center) + radius,
            Self::Simplex { dim, floor } => {
                let peak = 1.0 - (*dim as f64 - 1.0) * floor;
                (peak * peak + (*dim as f64 - 1.0) * floor * floor).sqrt()
            }
            Self::Product { parts } => {
                parts.iter().map(|p| p.radius().powi(2)).sum::<f64>().sqrt()
            }
        }
    }

    /// Euclidean projection onto the set; exact for every variant.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&x, (&l, &u))| x.clamp(l, u))
                .collect(),
            Self::Ball { center, radius } => {
                let d: Vec<f64> = v.iter().zip(center).map(|(a, b)| a - b).collect();
                let nd = norm(&d);
                if nd <= *radius {
                    v.to_vec()
                } else {
                    center.iter().zip(&d).map(|(c, di)| c + di * radius / nd).collect()
                }
            }
            Self::Simplex { dim, floor } => project_floored_simplex(v, *dim, *floor),
            Self::Product { parts } => {
                let mut out = Vec::with_capacity(self.dim());
                let mut off = 0;
                for p in parts {
                    let d = p.dim();
                    out.extend(p.project(&v[off..off + d]));
                    off += d;
                }
                out
            }
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.dim() {
            return false;
        }
        let p = self.project(v);
        v.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= tol
    }

    /// A canonical interior point: box midpoint, ball center, uniform vertex
    /// mix for the simplex.
    pub fn center(&self) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect()
            }
            Self::Ball { center, .. } => center.clone(),
            Self::Simplex { dim, .. } => vec![1.0 / *dim as f64; *dim],
            Self::Product { parts } => parts.iter().flat_map(|p| p.center()).collect(),
        }
    }

    /// A uniform-ish random point of the set, for Monte-Carlo suprema and
    /// probe points.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| if l == u { l } else { rng.random_range(l..u) })
                .collect(),
            Self::Ball { center, radius } => {
                let m = center.len();
                let mut d: Vec<f64> = (0..m)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect();
                let nd = norm(&d).max(1e-300);
                let r = radius * rng.random_range(0.0..1.0f64).powf(1.0 / m as f64);
                for di in &mut d {
                    *di *= r / nd;
                }
                center.iter().zip(&d).map(|(c, di)| c + di).collect()
            }
            Self::Simplex { dim, floor } => {
                let mass = 1.0 - *dim as f64 * floor;
                let e: Vec<f64> = (0..*dim)
                    .map(|_| -rng.random_range(1e-300..1.0f64).ln())
                    .collect();
                let se: f64 = e.iter().sum();
                e.iter().map(|ei| floor + mass * ei / se).collect()
            }
            Self::Product { parts } => parts.iter().flat_map(|p| p.sample(rng)).collect(),
        }
    }
}

/// Projection onto {x : Σx = 1, x ≥ floor} by the sorting construction on the
/// shifted standard simplex.
fn project_floored_simplex(v: &[f64], dim: usize, floor: f64) -> Vec<f64> {
    let mass = 1.0 - dim as f64 * floor;
    if mass <= 0.0 {
        return vec![floor; dim];
    }
    let w: Vec<f64> = v.iter().map(|x| x - floor).collect();
    let mut sorted = w.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &wk) in sorted.iter().enumerate() {
        acc += wk;
        let cand = (acc - mass) / (k as f64 + 1.0);
        if wk - cand > 0.0 {
            tau = cand;
        }
    }
    w.iter().map(|wi| floor + (wi - tau).max(0.0)).collect()
}

// ── Bregman geometries ───────────────────────────────────────────────────────

/// Distance-generating kernel.
#[derive(Debug, Clone)]
pub enum Kernel {
    Euclidean,
    Mahalanobis { p_inv: Vec<Vec<f64>> },
    Kl { floor: f64 },
}

/// A Bregman geometry: kernel plus its certified curvature constants.
/// `mu` is the strong-convexity modulus (D ≥ (μ/2)‖x−y‖²) and `k_upper` the
/// quadratic upper constant (D ≤ K‖x−y‖²).
#[derive(Debug, Clone)]
pub struct BregmanGeometry {
    kernel: Kernel,
    mu: f64,
    k_upper: f64,
}

impl BregmanGeometry {
    /// Un-halved squared Euclidean distance: D(x,y) = ‖x−y‖².
    pub fn euclidean() -> Self {
        Self { kernel: Kernel::Euclidean, mu: 2.0, k_upper: 1.0 }
    }

    /// D(x,y) = (x−y)ᵀP⁻¹(x−y) for symmetric positive definite P.
    /// Rejected when P is not SPD or its condition number exceeds 1e12.
    pub fn mahalanobis(p: Vec<Vec<f64>>) -> Result<Self> {
        let m = p.len();
        if m == 0 || p.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidGeometry("P must be square".into()));
        }
        for i in 0..m {
            for j in 0..i {
                if (p[i][j] - p[j][i]).abs() > 1e-10 * (1.0 + p[i][j].abs()) {
                    return Err(Error::InvalidGeometry("P must be symmetric".into()));
                }
            }
        }
        let (emin, emax) = sym_eigen_range(&p)?;
        if emin <= 0.0 {
            return Err(Error::InvalidGeometry(format!("P not positive definite (min eigenvalue {emin:.3e})")));
        }
        if emax / emin > 1e12 {
            return Err(Error::InvalidGeometry(format!(
                "P condition number {:.3e} exceeds 1e12",
                emax / emin
            )));
        }
        let p_inv = spd_inverse(&p)?;
        Ok(Self { kernel: Kernel::Mahalanobis { p_inv }, mu: 2.0 / emax, k_upper: 1.0 / emin })
    }

    /// Negative entropy on the floored simplex: D(x,y) = Σ x_i ln(x_i/y_i).
    /// Pinsker gives μ = 1 on probability vectors; the χ² bound gives
    /// K = 1/floor.
    pub fn kl(floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor < 1.0) {
            return Err(Error::InvalidGeometry("KL floor must lie in (0,1)".into()));
        }
        Ok(Self { kernel: Kernel::Kl { floor }, mu: 1.0, k_upper: 1.0 / floor })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn k_upper(&self) -> f64 {
        self.k_upper
    }

    /// Generator value φ(x).
    pub fn phi(&self, x: &[f64]) -> Result<f64> {
        match &self.kernel {
            Kernel::Euclidean => Ok(x.iter().map(|v| v * v).sum()),
            Kernel::Mahalanobis { p_inv } => Ok(quad_form(p_inv, x)),
            Kernel::Kl { .. } => {
                if x.iter().any(|&v| v <= 0.0) {
                    return Err(Error::InvalidGeometry("KL generator needs positive coordinates".into()));
                }
                Ok(x.iter().map(|&v| v * v.ln()).sum())
            }
        }
    }

    /// ∇φ(x).
    pub fn grad_phi(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.kernel {
            Kernel::Euclidean => Ok(x.iter().map(|v| 2.0 * v).collect()),
            Kernel::Mahalanobis { p_inv } => Ok(mat_vec(p_inv, x).iter().map(|v| 2.0 * v).collect()),
            Kernel::Kl { .. } => {
                if x.iter().any(|&v| v <= 0.0) {
                    return Err(Error::InvalidGeometry("KL gradient needs positive coordinates".into()));
                }
                Ok(x.iter().map(|&v| v.ln() + 1.0).collect())
            }
        }
    }

    /// D_φ(x, y).
    pub fn divergence(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::Contract("divergence arguments disagree on dimension".into()));
        }
        match &self.kernel {
            Kernel::Euclidean => Ok(x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()),
            Kernel::Mahalanobis { p_inv } => {
                let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                Ok(quad_form(p_inv, &d))
            }
            Kernel::Kl { .. } => {
                if x.iter().any(|&v| v <= 0.0) || y.iter().any(|&v| v <= 0.0) {
                    return Err(Error::InvalidGeometry("KL divergence needs positive coordinates".into()));
                }
                // Generalized KL: the Bregman pairing of Σ x ln x. The extra
                // −Σx + Σy vanishes on the simplex, where both arguments live
                // in practice.
                Ok(x.iter().zip(y).map(|(&a, &b)| a * (a.ln() - b.ln()) - a + b).sum())
            }
        }
    }

    /// ∇_x D_φ(x, y) = ∇φ(x) − ∇φ(y); used by the inner solver and checked
    /// against finite differences.
    pub fn grad1_divergence(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let gx = self.grad_phi(x)?;
        let gy = self.grad_phi(y)?;
        Ok(gx.iter().zip(&gy).map(|(a, b)| a - b).collect())
    }

    /// Sampled estimate of the divergence's first-argument Lipschitz constant,
    /// ℓ = 2·sup_{x∈Ω} ‖∇φ(x)‖, inflated by 1.1. Recorded in certificate
    /// reports, never asserted.
    pub fn estimate_ell<R: Rng + ?Sized>(&self, set: &FeasibleSet, samples: usize, rng: &mut R) -> f64 {
        let mut sup: f64 = 0.0;
        for _ in 0..samples {
            let x = set.sample(rng);
            if let Ok(g) = self.grad_phi(&x) {
                sup = sup.max(norm(&g));
            }
        }
        2.0 * sup * 1.1
    }
}

// ── the argmin subproblem ────────────────────────────────────────────────────

/// Solves x̂ = argmin_{x∈Ω} { D_φ(x, z) + ⟨s, x⟩ }.
///
/// Euclidean kernels reduce to Proj_Ω(z − s/2); the KL kernel on a simplex is
/// solved exactly by exponentiated reweighting with an active floor set; every
/// other combination runs the projected-gradient inner solver.
pub fn mirror_argmin(
    geom: &BregmanGeometry,
    set: &FeasibleSet,
    z: &[f64],
    s: &[f64],
) -> Result<Vec<f64>> {
    if z.len() != set.dim() || s.len() != set.dim() {
        return Err(Error::Contract("mirror step dimensions disagree".into()));
    }
    if s.iter().chain(z.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Contract("mirror step needs finite inputs".into()));
    }
    match (&geom.kernel, set) {
        (Kernel::Euclidean, _) => {
            let target: Vec<f64> = z.iter().zip(s).map(|(zi, si)| zi - 0.5 * si).collect();
            Ok(set.project(&target))
        }
        (Kernel::Kl { floor }, FeasibleSet::Simplex { dim, floor: set_floor }) => {
            let eff = floor.max(*set_floor);
            if eff * *dim as f64 > 1.0 {
                return Err(Error::InvalidGeometry("effective simplex floor exceeds 1/dim".into()));
            }
            kl_simplex_argmin(*dim, eff, z, s)
        }
        (Kernel::Kl { .. }, _) => Err(Error::InvalidGeometry(
            "KL geometry requires a simplex feasible set".into(),
        )),
        (Kernel::Mahalanobis { .. }, _) => mirror_argmin_fallback(geom, set, z, s),
    }
}

/// Exponentiated-gradient solution on the floored simplex. Coordinates whose
/// reweighted mass falls below the floor are pinned there and the remaining
/// mass is redistributed; the loop is monotone and exact.
fn kl_simplex_argmin(dim: usize, floor: f64, z: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    if z.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidGeometry("KL mirror step needs a positive anchor".into()));
    }
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let u: Vec<f64> = z.iter().zip(s).map(|(&zi, &si)| zi * (-(si - smin)).exp()).collect();
    let mut pinned = vec![false; dim];
    for _ in 0..=dim {
        let free_mass = 1.0 - pinned.iter().filter(|&&p| p).count() as f64 * floor;
        let usum: f64 = u.iter().zip(&pinned).filter(|(_, &p)| !p).map(|(ui, _)| ui).sum();
        if usum <= 0.0 {
            // All free weights underflowed; split the free mass evenly.
            let free = pinned.iter().filter(|&&p| !p).count().max(1);
            let each = free_mass / free as f64;
            return Ok(pinned.iter().map(|&p| if p { floor } else { each }).collect());
        }
        let x: Vec<f64> = u
            .iter()
            .zip(&pinned)
            .map(|(&ui, &p)| if p { floor } else { free_mass * ui / usum })
            .collect();
        let mut changed = false;
        for i in 0..dim {
            if !pinned[i] && x[i] < floor {
                pinned[i] = true;
                changed = true;
            }
        }
        if !changed {
            return Ok(x);
        }
    }
    Ok(vec![floor.max(1.0 / dim as f64); dim])
}

/// Projected-gradient inner solver on h(x) = D_φ(x,z) + ⟨s,x⟩ with Armijo
/// backtracking from the curvature-safe step 1/(2K). Since ∇²h ⪯ 2K·I on the
/// domain, the base step already satisfies the prox-descent condition
/// h(x⁺) ≤ h(x) + ⟨∇h, Δ⟩ + ‖Δ‖²/(2α); backtracking only absorbs rounding.
/// Exposed separately so the Euclidean closed form can be cross-validated
/// against it.
pub fn mirror_argmin_fallback(
    geom: &BregmanGeometry,
    set: &FeasibleSet,
    z: &[f64],
    s: &[f64],
) -> Result<Vec<f64>> {
    let h = |x: &[f64]| -> Result<f64> {
        Ok(geom.divergence(x, z)? + dot(s, x))
    };
    let grad = |x: &[f64]| -> Result<Vec<f64>> {
        let mut g = geom.grad1_divergence(x, z)?;
        for (gi, si) in g.iter_mut().zip(s) {
            *gi += si;
        }
        Ok(g)
    };

    let base_alpha = 1.0 / (2.0 * geom.k_upper);
    let mut x = set.project(z);
    let mut hx = h(&x)?;
    let mut residual = f64::INFINITY;
    for it in 0..INNER_CAP {
        let g = grad(&x)?;
        // Unit-step projected-gradient residual is the convergence measure.
        let probe: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - gi).collect();
        let proj = set.project(&probe);
        residual = dist(&x, &proj);
        if residual <= INNER_TOL {
            return Ok(x);
        }
        let mut accepted = false;
        let mut alpha = base_alpha;
        for _ in 0..60 {
            let trial_pt: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
            let xt = set.project(&trial_pt);
            let step: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
            let ht = h(&xt)?;
            let quad = hx + dot(&g, &step) + dot(&step, &step) / (2.0 * alpha);
            if ht <= quad + 1e-14 * (1.0 + hx.abs()) {
                x = xt;
                hx = ht;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::SolverStalled { residual, iterations: it });
        }
    }
    Err(Error::SolverStalled { residual, iterations: INNER_CAP })
}

// ── small dense linear algebra ───────────────────────────────────────────────

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn quad_form(m: &[Vec<f64>], v: &[f64]) -> f64 {
    dot(&mat_vec(m, v), v)
}

/// Cholesky factor L with A = LLᵀ; errors when A is not positive definite.
fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = a.len();
    let mut l = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::InvalidGeometry("matrix not positive definite".into()));
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Inverse of an SPD matrix via its Cholesky factor.
fn spd_inverse(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = a.len();
    let l = cholesky(a)?;
    let mut inv = vec![vec![0.0; m]; m];
    for col in 0..m {
        // Forward solve L y = e_col.
        let mut y = vec![0.0; m];
        for i in 0..m {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                sum -= l[i][k] * y[k];
            }
            y[i] = sum / l[i][i];
        }
        // Back solve Lᵀ x = y.
        for i in (0..m).rev() {
            let mut sum = y[i];
            for k in i + 1..m {
                sum -= l[k][i] * inv[k][col];
            }
            inv[i][col] = sum / l[i][i];
        }
    }
    // Symmetrize against round-off.
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = v;
            inv[j][i] = v;
        }
    }
    Ok(inv)
}

/// Extreme eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
fn sym_eigen_range(a: &[Vec<f64>]) -> Result<(f64, f64)> {
    let m = a.len();
    if m == 1 {
        return Ok((a[0][0], a[0][0]));
    }
    let mut w: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                off += w[i][j] * w[i][j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frob(&w)) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if w[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (w[q][q] - w[p][p]) / (2.0 * w[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let wkp = w[k][p];
                    let wkq = w[k][q];
                    w[k][p] = c * wkp - s * wkq;
                    w[k][q] = s * wkp + c * wkq;
                }
                for k in 0..m {
                    let wpk = w[p][k];
                    let wqk = w[q][k];
                    w[p][k] = c * wpk - s * wqk;
                    w[q][k] = s * wpk + c * wqk;
                }
            }
        }
    }
    let eigs: Vec<f64> = (0..m).map(|i| w[i][i]).collect();
    let emin = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let emax = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((emin, emax))
}

fn frob(a: &[Vec<f64>]) -> f64 {
    a.iter().flat_map(|r| r.iter().map(|v| v * v)).sum::<f64>().sqrt()
}
