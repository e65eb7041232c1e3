#![forbid(unsafe_code)]
//! Online distributed algorithms for mixed equilibrium problems (MEPs) with
//! coupled inequality constraints, run over time-varying directed
//! communication graphs.
//!
//! An MEP asks for a point x* in a feasible set X with Σ_i f_i(x*, y) ≥ 0 for
//! every y ∈ X, where each bifunction f_i is private to agent i and X couples
//! the agents through Ω ∩ {x : Σ_i g_i(x) ≤ 0}. Convex optimization
//! (f_i(x,y) = ψ_i(y) − ψ_i(x)) and variational inequalities
//! (f_i(x,y) = ⟨φ_i(x), y − x⟩) are the two special cases shipped as built-in
//! problem families.
//!
//! Module map:
//! - [`graph`]: doubly stochastic weight sequences, U-strong connectivity,
//!   geometric mixing certificates.
//! - [`geometry`]: feasible sets, Bregman divergences, and the mirror-descent
//!   argmin subproblem.
//! - [`problem`]: MEP instance definitions, the two built-in examples, and
//!   bound-constant estimation.
//! - [`engine`]: the exact-gradient and stochastic-gradient online algorithms.
//! - [`metrics`]: dynamic regret, constraint violation, consensus errors, and
//!   the certificate checker over completed traces.
//! - [`oracle`]: centralized reference solutions and the sub-Gaussian gradient
//!   noise model.
//! - [`config`]: experiment configuration, artifact emission, and exponent
//!   sweeps.

pub mod cli;
pub mod engine;
pub mod geometry;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod problem;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph sequence is not U-strongly connected; first failing window starts at round {round}")]
    NotConnected { round: u64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("mirror-step inner solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverStalled { residual: f64, iterations: usize },
    #[error("invalid step schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("oracle returned a non-finite value for agent {agent} at round {round}")]
    NonFiniteOracle { agent: usize, round: u64 },
    #[error("reference solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    OracleStalled { residual: f64, iterations: usize },
    #[error("reference solution failed certification: probe gap {gap:.3e} below -10*tolerance")]
    OracleUncertified { gap: f64 },
    #[error("coupled feasible set is empty or was not reachable: {0}")]
    Infeasible(String),
    #[error("instance provides no closed-form solution path; use the reference oracle provider instead")]
    MissingSolutionPath,
    #[error("instance provides no bifunction values; regret evaluation needs them")]
    MissingValues,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
