//! Time-varying digraph sequences with doubly stochastic weights.
//!
//! Communication at round t is described by an n×n weight matrix A(t): a
//! strictly positive entry a_ij means agent i receives from agent j, and every
//! A(t) is doubly stochastic with strictly positive diagonal. A sequence is
//! U-strongly connected when the union graph over every window
//! [kU, (k+1)U) is strongly connected. For such sequences the backward
//! products Φ(t,s) = A(t−1)⋯A(s) approach the exact averaging matrix
//! geometrically:
//!
//! ```text
//! |[Φ(t,s)]_ij − 1/n| ≤ C λ^(t−s),
//! λ = (1 − γ^((n−1)U))^(1/((n−1)U)),
//! C = 2 λ^(−1) (1 + γ^(−(n−1)U)) / (1 − γ^((n−1)U)),
//! ```
//!
//! where γ is the smallest positive weight appearing anywhere in the
//! sequence. The pair (C, λ) is the sequence's mixing certificate; it is loose
//! by design and every generated sequence must satisfy it outright.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Entries must match exact double stochasticity to this tolerance.
const WEIGHT_TOL: f64 = 1e-12;

/// A fixed communication round: doubly stochastic weights with positive
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    /// Row-major n×n weights; `w[i*n + j]` is a_ij (i receives from j).
    w: Vec<f64>,
}

impl WeightedDigraph {
    /// Validates and wraps an explicit weight matrix.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 agents, got {n}")));
        }
        let mut w = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGraph(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < -WEIGHT_TOL || v > 1.0 + WEIGHT_TOL {
                    return Err(Error::InvalidGraph(format!("weight ({i},{j}) = {v} outside [0,1]")));
                }
                w.push(v.max(0.0));
            }
        }
        let g = Self { n, w };
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| g.at(i, j)).sum();
            let col_sum: f64 = (0..n).map(|j| g.at(j, i)).sum();
            if (row_sum - 1.0).abs() > WEIGHT_TOL {
                return Err(Error::InvalidGraph(format!("row {i} sums to {row_sum}, not 1")));
            }
            if (col_sum - 1.0).abs() > WEIGHT_TOL {
                return Err(Error::InvalidGraph(format!("column {i} sums to {col_sum}, not 1")));
            }
            if g.at(i, i) <= 0.0 {
                return Err(Error::InvalidGraph(format!("diagonal entry {i} must be positive")));
            }
        }
        Ok(g)
    }

    /// (1−w)·I + w·P for a permutation P given as `perm[j] = receiver of j`.
    /// Doubly stochastic by construction; diagonal stays positive for w < 1.
    pub fn permutation_mix(perm: &[usize], move_weight: f64) -> Result<Self> {
        let n = perm.len();
        if !(0.0..1.0).contains(&move_weight) {
            return Err(Error::InvalidGraph(format!("move weight {move_weight} outside [0,1)")));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidGraph("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut rows = vec![vec![0.0; n]; n];
        for j in 0..n {
            rows[j][j] += 1.0 - move_weight;
            rows[perm[j]][j] += move_weight;
        }
        Self::new(rows)
    }

    /// The complete averaging graph: every entry 1/n.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(vec![vec![1.0 / n as f64; n]; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    /// Smallest strictly positive weight, or None for an all-zero matrix
    /// (impossible post-validation).
    fn min_positive(&self) -> Option<f64> {
        self.w.iter().copied().filter(|&v| v > 0.0).fold(None, |acc, v| {
            Some(match acc {
                None => v,
                Some(a) if v < a => v,
                Some(a) => a,
            })
        })
    }
}

/// Raw JSON form of a sequence: `{"period": U, "graphs": [{"weights": [[..]]}],
/// "schedule": [indices]?}`. `schedule` is optional; without it round t uses
/// `graphs[t mod graphs.len()]`.
#[derive(Debug, Serialize, Deserialize)]
struct RawSequence {
    period: u64,
    graphs: Vec<RawGraph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawGraph {
    weights: Vec<Vec<f64>>,
}

/// Certified geometric-mixing constants for a sequence.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MixingCertificate {
    pub c: f64,
    pub lambda: f64,
    pub gamma: f64,
}

/// A periodic schedule of weighted digraphs with a U-round connectivity
/// window.
#[derive(Debug, Clone)]
pub struct GraphSequence {
    graphs: Vec<WeightedDigraph>,
    period: u64,
    schedule: Option<Vec<usize>>,
    gamma: f64,
    n: usize,
}

impl GraphSequence {
    /// Cyclic schedule: round t uses `graphs[t mod graphs.len()]`; `period` is
    /// the connectivity window U.
    pub fn cyclic(graphs: Vec<WeightedDigraph>, period: u64) -> Result<Self> {
        Self::new(graphs, period, None)
    }

    /// Explicit schedule of graph indices, repeated cyclically; round t uses
    /// `graphs[schedule[t mod schedule.len()]]`.
    pub fn explicit(graphs: Vec<WeightedDigraph>, period: u64, schedule: Vec<usize>) -> Result<Self> {
        Self::new(graphs, period, Some(schedule))
    }

    fn new(graphs: Vec<WeightedDigraph>, period: u64, schedule: Option<Vec<usize>>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::InvalidGraph("empty graph list".into()));
        }
        if period == 0 {
            return Err(Error::InvalidGraph("period must be at least 1".into()));
        }
        let n = graphs[0].n();
        if graphs.iter().any(|g| g.n() != n) {
            return Err(Error::InvalidGraph("member graphs disagree on agent count".into()));
        }
        if let Some(s) = &schedule {
            if s.is_empty() {
                return Err(Error::InvalidGraph("empty explicit schedule".into()));
            }
            if s.iter().any(|&k| k >= graphs.len()) {
                return Err(Error::InvalidGraph("schedule index out of range".into()));
            }
        }
        let gamma = graphs
            .iter()
            .filter_map(|g| g.min_positive())
            .fold(f64::INFINITY, f64::min);
        Ok(Self { graphs, period, schedule, gamma, n })
    }

    /// Loads `{"period": U, "graphs": [...]}` and validates every matrix.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawSequence = serde_json::from_str(text)?;
        let graphs = raw
            .graphs
            .into_iter()
            .map(|g| WeightedDigraph::new(g.weights))
            .collect::<Result<Vec<_>>>()?;
        Self::new(graphs, raw.period, raw.schedule)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let raw = RawSequence {
            period: self.period,
            graphs: self
                .graphs
                .iter()
                .map(|g| RawGraph {
                    weights: (0..g.n()).map(|i| (0..g.n()).map(|j| g.at(i, j)).collect()).collect(),
                })
                .collect(),
            schedule: self.schedule.clone(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn cycle_len(&self) -> u64 {
        match &self.schedule {
            Some(s) => s.len() as u64,
            None => self.graphs.len() as u64,
        }
    }

    pub fn graph_at(&self, t: u64) -> &WeightedDigraph {
        let idx = match &self.schedule {
            Some(s) => s[(t % s.len() as u64) as usize],
            None => (t % self.graphs.len() as u64) as usize,
        };
        &self.graphs[idx]
    }

    /// First window start (in rounds) whose union graph is not strongly
    /// connected, if any. Only the finitely many distinct window patterns of
    /// the periodic schedule are examined.
    pub fn first_failing_window(&self) -> Option<u64> {
        let l = self.cycle_len();
        let u = self.period;
        let distinct_windows = l / gcd(l, u);
        for k in 0..distinct_windows {
            let start = k * u;
            let mut reach = vec![false; self.n * self.n];
            for i in 0..self.n {
                reach[i * self.n + i] = true;
            }
            for t in start..start + u {
                let g = self.graph_at(t);
                for i in 0..self.n {
                    for j in 0..self.n {
                        if g.at(i, j) > 0.0 {
                            reach[i * self.n + j] = true;
                        }
                    }
                }
            }
            // Warshall transitive closure on the union edge set.
            for k2 in 0..self.n {
                for i in 0..self.n {
                    if reach[i * self.n + k2] {
                        for j in 0..self.n {
                            if reach[k2 * self.n + j] {
                                reach[i * self.n + j] = true;
                            }
                        }
                    }
                }
            }
            if reach.iter().any(|&r| !r) {
                return Some(start);
            }
        }
        None
    }

    /// True iff the union graph over every U-round window is strongly
    /// connected.
    pub fn check_u_strong_connectivity(&self) -> bool {
        self.first_failing_window().is_none()
    }

    /// Backward transition product Φ(t,s) = A(t−1)⋯A(s); Φ(s,s) = I.
    pub fn transition_product(&self, t: u64, s: u64) -> Result<Vec<Vec<f64>>> {
        if t < s {
            return Err(Error::Contract(format!("transition product needs t >= s, got t={t}, s={s}")));
        }
        let n = self.n;
        let mut phi = vec![vec![0.0; n]; n];
        for (i, row) in phi.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for r in s..t {
            let a = self.graph_at(r);
            let mut next = vec![vec![0.0; n]; n];
            for i in 0..n {
                for k in 0..n {
                    let aik = a.at(i, k);
                    if aik != 0.0 {
                        for j in 0..n {
                            next[i][j] += aik * phi[k][j];
                        }
                    }
                }
            }
            phi = next;
        }
        Ok(phi)
    }

    /// The certified pair (C, λ). Errors when the sequence is not U-strongly
    /// connected, naming the first failing window.
    pub fn mixing_certificate(&self) -> Result<MixingCertificate> {
        if let Some(round) = self.first_failing_window() {
            return Err(Error::NotConnected { round });
        }
        let gamma = self.gamma;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidGraph(format!("weight floor {gamma} outside (0,1]")));
        }
        let e = ((self.n - 1) as f64) * self.period as f64;
        let ge = gamma.powf(e);
        let lambda = (1.0 - ge).powf(1.0 / e);
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidGraph(format!("mixing rate {lambda} outside (0,1)")));
        }
        let c = 2.0 / lambda * (1.0 + gamma.powf(-e)) / (1.0 - ge);
        Ok(MixingCertificate { c, lambda, gamma })
    }

    /// One synchronous gossip round: output_i = Σ_j a_ij(t)·vectors_j.
    /// Double stochasticity preserves the componentwise mean exactly.
    pub fn mix(&self, t: u64, vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if vectors.len() != self.n {
            return Err(Error::Contract(format!(
                "mix got {} vectors for {} agents",
                vectors.len(),
                self.n
            )));
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Contract("mix inputs disagree on dimension".into()));
        }
        let a = self.graph_at(t);
        let mut out = vec![vec![0.0; dim]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                let w = a.at(i, j);
                if w != 0.0 {
                    for d in 0..dim {
                        out[i][d] += w * vectors[j][d];
                    }
                }
            }
        }
        Ok(out)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Six agents, window U=4. Four equal-weight permutation mixes whose union
/// over a window contains the directed ring 0→1→2→3→4→5→0, so every window is
/// strongly connected while each individual round is not. This is the
/// documented stand-in for the six-agent example topology, which is defined
/// only as a picture; a doubly stochastic split of the bare ring across
/// disconnected rounds does not exist, so each round moves mass along a short
/// cycle instead.
pub fn six_agent_ring_sequence() -> GraphSequence {
    let cycle_012 = WeightedDigraph::permutation_mix(&[1, 2, 0, 3, 4, 5], 0.5).expect("valid");
    let swap_23 = WeightedDigraph::permutation_mix(&[0, 1, 3, 2, 4, 5], 0.5).expect("valid");
    let cycle_345 = WeightedDigraph::permutation_mix(&[0, 1, 2, 4, 5, 3], 0.5).expect("valid");
    let swap_50 = WeightedDigraph::permutation_mix(&[5, 1, 2, 3, 4, 0], 0.5).expect("valid");
    GraphSequence::cyclic(vec![cycle_012, swap_23, cycle_345, swap_50], 4).expect("valid")
}

/// Five agents, window U=2: two three-cycles overlapping at agent 2. Each
/// round is disconnected on its own; every window is strongly connected.
pub fn five_agent_sequence() -> GraphSequence {
    let cycle_012 = WeightedDigraph::permutation_mix(&[1, 2, 0, 3, 4], 0.5).expect("valid");
    let cycle_234 = WeightedDigraph::permutation_mix(&[0, 1, 3, 4, 2], 0.5).expect("valid");
    GraphSequence::cyclic(vec![cycle_012, cycle_234], 2).expect("valid")
}

/// Random U-strongly-connected sequence: U permutation mixes, one of which
/// carries a full n-cycle so every window's union is strongly connected.
pub fn random_connected_sequence<R: Rng>(n: usize, u: u64, rng: &mut R) -> GraphSequence {
    let cycle_slot = rng.random_range(0..u);
    let graphs = (0..u)
        .map(|slot| {
            let w = rng.random_range(0.2..0.8);
            let perm: Vec<usize> = if slot == cycle_slot {
                (0..n).map(|j| (j + 1) % n).collect()
            } else {
                let mut p: Vec<usize> = (0..n).collect();
                for j in (1..n).rev() {
                    let k = rng.random_range(0..=j);
                    p.swap(j, k);
                }
                p
            };
            WeightedDigraph::permutation_mix(&perm, w).expect("valid")
        })
        .collect();
    GraphSequence::cyclic(graphs, u).expect("valid")
}
