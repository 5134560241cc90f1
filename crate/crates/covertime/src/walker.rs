//! Monte Carlo oracle: lazy and non-lazy walk simulation, cover times,
//! block-move stopping times, empirical collapsed-chain transitions, and an
//! exact small-instance cover-time reference.
//!
//! Trials draw from per-trial RNG substreams keyed by `(seed, trial index)`,
//! so parallel execution is reproducible independent of scheduling, and
//! aggregation is an ordered reduction by trial index.

use crate::error::{Error, Result};
use crate::exec;
use crate::graph::Graph;
use crate::rng::substream;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WalkConfig {
    pub seed: u64,
    pub lazy: bool,
    /// Per-trial step cap; trials that hit it are flagged censored, never
    /// dropped.
    pub max_steps: u64,
    pub trials: usize,
}

impl WalkConfig {
    /// Default step budget `50 n ln(n) / theta`, comfortably above desk-scale
    /// cover times.
    pub fn for_graph(g: &Graph, seed: u64, lazy: bool, trials: usize) -> WalkConfig {
        let n = g.n() as f64;
        let theta = g.min_degree_ratio().theta;
        WalkConfig {
            seed,
            lazy,
            max_steps: (50.0 * n * n.ln() / theta).ceil() as u64,
            trials,
        }
    }
}

/// Per-trial cover-time observations.
#[derive(Debug, Clone)]
pub struct CoverStats {
    /// Steps until full coverage, capped at `max_steps` for censored trials.
    pub steps: Vec<u64>,
    pub censored: Vec<bool>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub censored: usize,
    pub mean: f64,
    pub variance: f64,
    pub half_width95: f64,
}

fn summarize(values: &[u64], censored: &[bool]) -> Summary {
    let n = values.len();
    let mean = values.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
    let variance = if n > 1 {
        values
            .iter()
            .map(|&x| {
                let d = x as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / (n as f64 - 1.0)
    } else {
        0.0
    };
    Summary {
        trials: n,
        censored: censored.iter().filter(|&&c| c).count(),
        mean,
        variance,
        half_width95: 1.96 * (variance / n as f64).sqrt(),
    }
}

impl CoverStats {
    /// Censored trials enter at the cap, so the mean is a lower bound on the
    /// true expectation whenever `censored > 0`.
    pub fn summary(&self) -> Summary {
        summarize(&self.steps, &self.censored)
    }
}

#[inline]
fn walk_step(g: &Graph, rng: &mut ChaCha8Rng, current: u32, lazy: bool) -> u32 {
    if lazy && rng.random_bool(0.5) {
        return current;
    }
    let nb = g.neighbors(current);
    nb[rng.random_range(0..nb.len())]
}

/// Simulates cover times of walks started at `u`.
///
/// Fails with a budget error only when every trial censored.
pub fn simulate_cover(g: &Graph, u: u32, cfg: &WalkConfig) -> Result<CoverStats> {
    let n = g.n();
    let results = exec::map_indexed(cfg.trials, |trial| {
        let mut rng = substream(cfg.seed, trial as u64);
        let mut visited = vec![false; n];
        visited[u as usize] = true;
        let mut remaining = n - 1;
        let mut current = u;
        let mut steps = 0u64;
        while remaining > 0 && steps < cfg.max_steps {
            current = walk_step(g, &mut rng, current, cfg.lazy);
            steps += 1;
            if !visited[current as usize] {
                visited[current as usize] = true;
                remaining -= 1;
            }
        }
        (steps, remaining > 0)
    });
    let steps: Vec<u64> = results.iter().map(|r| r.0).collect();
    let censored: Vec<bool> = results.iter().map(|r| r.1).collect();
    if censored.iter().all(|&c| c) {
        return Err(Error::Budget { trials: cfg.trials, max_steps: cfg.max_steps });
    }
    Ok(CoverStats { steps, censored })
}

/// Block-move stopping times: per trial and block, the step index at which
/// the walk completes its `tau_i`-th move departing from block `i`.
#[derive(Debug, Clone)]
pub struct KappaStats {
    /// `[trial][block]` stopping times; censored entries hold the cap.
    pub per_block: Vec<Vec<u64>>,
    /// Per-trial `max_i kappa(u, tau_i, i)`.
    pub max_kappa: Vec<u64>,
    pub censored: Vec<bool>,
}

impl KappaStats {
    pub fn max_summary(&self) -> Summary {
        summarize(&self.max_kappa, &self.censored)
    }
}

/// Measures `kappa(u, tau_i, i)` on simulated walks.
///
/// A block-`i` move is any step departing from a vertex of block `i`; the
/// walk runs until every block has met its target or the step cap is hit.
/// `stream_offset` shifts the RNG substream indices so follow-up runs with
/// the same seed see fresh randomness.
pub fn measure_kappa(
    g: &Graph,
    u: u32,
    blocks: &[Vec<u32>],
    tau: &[u64],
    cfg: &WalkConfig,
    stream_offset: u64,
) -> Result<KappaStats> {
    assert_eq!(blocks.len(), tau.len());
    let n = g.n();
    let mut block_of = vec![usize::MAX; n];
    for (i, block) in blocks.iter().enumerate() {
        for &v in block {
            block_of[v as usize] = i;
        }
    }
    assert!(
        block_of.iter().all(|&b| b != usize::MAX),
        "blocks must cover the vertex set"
    );
    let s = blocks.len();

    let results = exec::map_indexed(cfg.trials, |trial| {
        let mut rng = substream(cfg.seed, stream_offset + trial as u64);
        let mut counts = vec![0u64; s];
        let mut kappa = vec![0u64; s];
        let mut open = (0..s).filter(|&i| tau[i] > 0).count();
        for i in 0..s {
            if tau[i] == 0 {
                kappa[i] = 0;
            }
        }
        let mut current = u;
        let mut steps = 0u64;
        while open > 0 && steps < cfg.max_steps {
            let b = block_of[current as usize];
            current = walk_step(g, &mut rng, current, cfg.lazy);
            steps += 1;
            counts[b] += 1;
            if counts[b] == tau[b] {
                kappa[b] = steps;
                open -= 1;
            }
        }
        let censored = open > 0;
        if censored {
            for i in 0..s {
                if counts[i] < tau[i] {
                    kappa[i] = cfg.max_steps;
                }
            }
        }
        let max = kappa.iter().copied().max().unwrap_or(0);
        (kappa, max, censored)
    });

    let stats = KappaStats {
        per_block: results.iter().map(|r| r.0.clone()).collect(),
        max_kappa: results.iter().map(|r| r.1).collect(),
        censored: results.iter().map(|r| r.2).collect(),
    };
    if stats.censored.iter().all(|&c| c) && cfg.trials > 0 {
        return Err(Error::Budget { trials: cfg.trials, max_steps: cfg.max_steps });
    }
    Ok(stats)
}

/// Empirical transition frequencies of the walk restricted to a block.
#[derive(Debug, Clone)]
pub struct EmpiricalCollapsed {
    /// Row-normalized transition estimate over the sorted block.
    pub matrix: DMatrix<f64>,
    /// Observations per row; thin rows mean a wide row estimate.
    pub row_counts: Vec<u64>,
    pub observed: u64,
}

/// Runs one long non-lazy walk, deletes the entries outside the block, and
/// tallies consecutive pairs of the remaining sequence until `observations`
/// in-block transitions have been seen (full-walk step cap: 200x).
pub fn empirical_collapsed(
    g: &Graph,
    block: &[u32],
    observations: u64,
    seed: u64,
) -> Result<EmpiricalCollapsed> {
    let mut ids = block.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let k = ids.len();
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in ids.iter().enumerate() {
        index[v as usize] = i;
    }
    let mut rng = substream(seed, 0);
    let mut counts = vec![vec![0u64; k]; k];
    let mut row_counts = vec![0u64; k];
    let mut current = ids[0];
    let mut prev: Option<usize> = Some(0);
    let mut observed = 0u64;
    let cap = observations.saturating_mul(200);
    let mut steps = 0u64;
    while observed < observations && steps < cap {
        current = walk_step(g, &mut rng, current, false);
        steps += 1;
        let idx = index[current as usize];
        if idx != usize::MAX {
            if let Some(p) = prev {
                counts[p][idx] += 1;
                row_counts[p] += 1;
                observed += 1;
            }
            prev = Some(idx);
        }
    }
    if let Some(empty) = row_counts.iter().position(|&c| c == 0) {
        return Err(Error::InsufficientCoverage(format!(
            "no observed departures from block vertex {} (row counts {:?})",
            ids[empty], row_counts
        )));
    }
    let matrix = DMatrix::from_fn(k, k, |r, c| counts[r][c] as f64 / row_counts[r] as f64);
    Ok(EmpiricalCollapsed { matrix, row_counts, observed })
}

/// Exact expected cover time by state-space enumeration over
/// `(visited set, current vertex)`, solving one linear system per visited
/// set from the full set downward. Exponential in `n`; intended as the
/// small-instance reference oracle.
pub fn exact_cover_expectation(g: &Graph, u: u32, lazy: bool) -> f64 {
    let n = g.n();
    assert!(n <= 16, "state-space enumeration is exponential in n");
    let full: u32 = (1 << n) - 1;
    // expected[mask] holds E[T | visited = mask, current = v] for v in mask.
    let mut expected: Vec<Vec<f64>> = vec![Vec::new(); 1 << n];
    let mut masks: Vec<u32> = (1..=full).collect();
    masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    for mask in masks {
        let members: Vec<u32> = (0..n as u32).filter(|&v| mask >> v & 1 == 1).collect();
        let k = members.len();
        if mask == full {
            expected[mask as usize] = vec![0.0; k];
            continue;
        }
        let pos = |v: u32| members.iter().position(|&w| w == v).expect("member");
        // E[mask, v] = 1 + sum_w p(v, w) * E[mask | w, w]
        let mut a = DMatrix::identity(k, k);
        let mut b = DVector::from_element(k, 1.0);
        for (i, &v) in members.iter().enumerate() {
            let deg = g.degree(v) as f64;
            let move_p = if lazy { 1.0 / (2.0 * deg) } else { 1.0 / deg };
            if lazy {
                a[(i, i)] -= 0.5;
            }
            for &w in g.neighbors(v) {
                let next = mask | 1 << w;
                if next == mask {
                    a[(i, pos(w))] -= move_p;
                } else {
                    let idx = (0..n as u32)
                        .filter(|&x| next >> x & 1 == 1)
                        .position(|x| x == w)
                        .expect("w in next");
                    b[i] += move_p * expected[next as usize][idx];
                }
            }
        }
        let solved = a.lu().solve(&b).expect("absorbing system is nonsingular");
        expected[mask as usize] = solved.iter().copied().collect();
    }
    expected[1 << u][0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    fn harmonic(n: usize) -> f64 {
        (1..=n).map(|k| 1.0 / k as f64).sum()
    }

    #[test]
    fn exact_cover_matches_closed_form_on_complete_graphs() {
        // Walks on K_n collect coupons uniformly among the other n-1
        // vertices, so E[T_cov] = (n-1) H_{n-1}.
        let k3 = exact_cover_expectation(&generate(&Family::Complete { n: 3 }).unwrap(), 0, false);
        assert!((k3 - 3.0).abs() < 1e-10);
        let k4 = exact_cover_expectation(&generate(&Family::Complete { n: 4 }).unwrap(), 0, false);
        assert!((k4 - 3.0 * harmonic(3)).abs() < 1e-10, "{k4}");
        let k5 = exact_cover_expectation(&generate(&Family::Complete { n: 5 }).unwrap(), 0, false);
        assert!((k5 - 4.0 * harmonic(4)).abs() < 1e-10, "{k5}");
    }

    #[test]
    fn exact_cover_two_path_lazy() {
        let g = crate::graph::Graph::from_edges(2, &[(0, 1)]).unwrap();
        let e = exact_cover_expectation(&g, 0, true);
        assert!((e - 2.0).abs() < 1e-12, "geometric(1/2) mean, got {e}");
    }

    #[test]
    fn simulated_cover_matches_exact_oracle() {
        // Closed form (n-1) H_{n-1} is itself pinned by exact_cover_expectation
        // at n = 4, 5 above; here simulation meets it at n = 20.
        let g = generate(&Family::Complete { n: 20 }).unwrap();
        let cfg = WalkConfig::for_graph(&g, 42, false, 4000);
        let s = simulate_cover(&g, 0, &cfg).unwrap().summary();
        assert_eq!(s.censored, 0);
        let expect = 19.0 * harmonic(19);
        let std_err = (s.variance / s.trials as f64).sqrt();
        assert!(
            (s.mean - expect).abs() < 3.0 * std_err,
            "mean {} vs {expect} (stderr {std_err})",
            s.mean
        );
    }

    #[test]
    fn lazy_doubles_the_cover_time() {
        let g = generate(&Family::Complete { n: 20 }).unwrap();
        let base = WalkConfig::for_graph(&g, 7, false, 4000);
        let lazy = WalkConfig { lazy: true, ..base };
        let m0 = simulate_cover(&g, 0, &base).unwrap().summary().mean;
        let m1 = simulate_cover(&g, 0, &lazy).unwrap().summary().mean;
        let ratio = m1 / m0;
        assert!((ratio - 2.0).abs() < 0.1, "lazy/non-lazy ratio {ratio}");
    }

    #[test]
    fn trajectories_are_reproducible() {
        let g = generate(&Family::Dumbbell { n: 20, bridges: 2 }).unwrap();
        let cfg = WalkConfig::for_graph(&g, 11, true, 50);
        let a = simulate_cover(&g, 3, &cfg).unwrap();
        let b = simulate_cover(&g, 3, &cfg).unwrap();
        assert_eq!(a.steps, b.steps);
    }

    #[test]
    fn budget_error_when_all_trials_censored() {
        let g = generate(&Family::Dumbbell { n: 40, bridges: 1 }).unwrap();
        let cfg = WalkConfig { seed: 1, lazy: false, max_steps: 5, trials: 8 };
        assert!(matches!(
            simulate_cover(&g, 0, &cfg),
            Err(Error::Budget { trials: 8, max_steps: 5 })
        ));
    }

    #[test]
    fn kappa_single_block_equals_tau() {
        let g = generate(&Family::Complete { n: 9 }).unwrap();
        let blocks = vec![(0..9u32).collect::<Vec<_>>()];
        let cfg = WalkConfig::for_graph(&g, 5, false, 20);
        let stats = measure_kappa(&g, 2, &blocks, &[17], &cfg, 0).unwrap();
        assert!(stats.max_kappa.iter().all(|&k| k == 17));
    }

    #[test]
    fn kappa_strictly_increasing_in_tau() {
        let g = generate(&Family::Dumbbell { n: 16, bridges: 2 }).unwrap();
        let blocks = vec![(0..8u32).collect::<Vec<_>>(), (8..16u32).collect::<Vec<_>>()];
        let cfg = WalkConfig::for_graph(&g, 9, false, 30);
        let small = measure_kappa(&g, 0, &blocks, &[5, 5], &cfg, 0).unwrap();
        let large = measure_kappa(&g, 0, &blocks, &[9, 9], &cfg, 0).unwrap();
        for t in 0..30 {
            for b in 0..2 {
                assert!(small.per_block[t][b] < large.per_block[t][b]);
            }
        }
    }

    #[test]
    fn kappa_stationary_rate() {
        // For tau much larger than the mixing time, E kappa(u, tau, i)
        // approaches tau / pi(V_i).
        let g = generate(&Family::Dumbbell { n: 20, bridges: 10 }).unwrap();
        let blocks = vec![(0..10u32).collect::<Vec<_>>(), (10..20u32).collect::<Vec<_>>()];
        let pi_mass = 0.5;
        let tau = 400u64;
        let cfg = WalkConfig { seed: 3, lazy: false, max_steps: 100_000, trials: 300 };
        let stats = measure_kappa(&g, 0, &blocks, &[tau, tau], &cfg, 0).unwrap();
        let mean_b: f64 = stats.per_block.iter().map(|k| k[1] as f64).sum::<f64>() / 300.0;
        let expect = tau as f64 / pi_mass;
        assert!(
            (mean_b - expect).abs() / expect < 0.05,
            "renewal rate off: {mean_b} vs {expect}"
        );
    }

    #[test]
    fn empirical_collapsed_identity_block_recovers_kernel() {
        let g = generate(&Family::Complete { n: 8 }).unwrap();
        let all: Vec<u32> = (0..8).collect();
        let emp = empirical_collapsed(&g, &all, 200_000, 13).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let expect = if r == c { 0.0 } else { 1.0 / 7.0 };
                assert!(
                    (emp.matrix[(r, c)] - expect).abs() < 0.01,
                    "({r},{c}): {}",
                    emp.matrix[(r, c)]
                );
            }
        }
    }

    #[test]
    fn empirical_collapsed_deterministic_under_seed() {
        let g = generate(&Family::Dumbbell { n: 12, bridges: 1 }).unwrap();
        let block: Vec<u32> = (0..6).collect();
        let a = empirical_collapsed(&g, &block, 20_000, 21).unwrap();
        let b = empirical_collapsed(&g, &block, 20_000, 21).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.row_counts, b.row_counts);
    }
}
