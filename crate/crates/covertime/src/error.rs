//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("edge list parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    EigensolverFailure { iterations: usize, residual: f64 },

    #[error("mixing time exceeds cap {cap} (relative distance {distance:.3e} at cap)")]
    MixingTooSlow { cap: u64, distance: f64 },

    #[error("mixing-time hypothesis T*pi_v <= 1/omega violated: T={t_mix}, pi_v={pi_v:.6e}, omega={omega}")]
    TpiViolation { t_mix: u64, pi_v: f64, omega: f64 },

    #[error("truncated return mass {r_v:.6} exceeds the O(1) proxy bound 2")]
    ReturnMassTooLarge { r_v: f64 },

    #[error("partition depth {depth} exceeds bound {bound}; input violates the density regime or zeta is misconfigured")]
    PartitionDivergence { depth: u32, bound: u32 },

    #[error("degenerate split: child block {block:?} is empty or disconnected")]
    DegenerateSplit { block: Vec<u32> },

    #[error("escape system (I - Q) is numerically singular; block fails to intercept the walk")]
    AbsorbingEscape,

    #[error("t* bracket failure: F'(t)+1 has no sign change over [{lo:.3}, {hi:.3}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("tier hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("mixing too slow for the partitioned estimate: T_mix={t_mix} > C/ratio_floor = {threshold:.3}")]
    MixingRatio { t_mix: u64, threshold: f64 },

    #[error("simulation budget exhausted: all {trials} trials censored at {max_steps} steps")]
    Budget { trials: usize, max_steps: u64 },

    #[error("estimator precision target {target:.3} not met: achieved relative half-width {achieved:.3}")]
    Precision { target: f64, achieved: f64 },

    #[error("insufficient visits for empirical estimate: {0}")]
    InsufficientCoverage(String),
}
