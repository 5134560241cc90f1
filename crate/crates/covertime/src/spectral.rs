//! Approximate minimum-conductance cuts: a spectral sweep over the second
//! eigenvector of the lazy walk, plus an exact brute-force oracle for small
//! instances.

use crate::error::{Error, Result};
use crate::exec;
use crate::graph::{Cut, Graph};
use serde::{Deserialize, Serialize};

const POWER_ITERATION_CAP: usize = 100_000;
const POWER_ITERATION_TOL: f64 = 1e-10;
/// `auto` switches from exhaustive enumeration to the sweep above this size.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutMethod {
    Sweep,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutMode {
    #[default]
    Auto,
    Sweep,
    BruteForce,
}

/// Result of a minimum-conductance cut search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutSearchResult {
    pub cut: Cut,
    pub method: CutMethod,
    /// Upper bound on `phi(found) / phi(G)` when known; `1.0` for brute force.
    pub certified_ratio: Option<f64>,
}

/// Second-largest eigenvalue of the lazy transition matrix and a
/// pi-orthogonal eigenvector (power iteration with pi-weighted deflation of
/// the constant top eigenvector).
pub fn second_eigenpair(g: &Graph) -> Result<(f64, Vec<f64>)> {
    let n = g.n();
    let pi = g.stationary();

    // v <- lazy P v, computed from adjacency without materializing P.
    let apply = |v: &[f64], out: &mut [f64]| {
        for u in 0..n {
            let d = g.degree(u as u32) as f64;
            let mut acc = 0.0;
            for &w in g.neighbors(u as u32) {
                acc += v[w as usize];
            }
            out[u] = 0.5 * v[u] + acc / (2.0 * d);
        }
    };
    let deflate = |v: &mut [f64]| {
        let mean: f64 = v.iter().zip(&pi).map(|(x, p)| x * p).sum();
        for x in v.iter_mut() {
            *x -= mean;
        }
    };

    let mut v: Vec<f64> = (0..n).map(|i| ((i % 7) as f64 + 1.0).sin() + 0.5).collect();
    deflate(&mut v);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(Error::EigensolverFailure { iterations: 0, residual: f64::INFINITY });
    }
    for x in v.iter_mut() {
        *x /= norm;
    }

    let mut out = vec![0.0; n];
    let mut lambda = 0.0;
    for iter in 0..POWER_ITERATION_CAP {
        apply(&v, &mut out);
        deflate(&mut out);
        // Rayleigh quotient in the pi-weighted inner product.
        let num: f64 = out.iter().zip(&v).zip(&pi).map(|((y, x), p)| y * x * p).sum();
        let den: f64 = v.iter().zip(&pi).map(|(x, p)| x * x * p).sum();
        lambda = num / den;
        let residual = out
            .iter()
            .zip(&v)
            .map(|(y, x)| (y - lambda * x).abs())
            .fold(0.0f64, f64::max);
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::EigensolverFailure { iterations: iter, residual });
        }
        for (x, y) in v.iter_mut().zip(&out) {
            *x = y / norm;
        }
        if residual <= POWER_ITERATION_TOL {
            // Sign convention: first coordinate of noticeable magnitude positive.
            let flip = v
                .iter()
                .find(|x| x.abs() > 1e-8)
                .map(|x| *x < 0.0)
                .unwrap_or(false);
            if flip {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            return Ok((lambda, v));
        }
    }
    let residual = {
        apply(&v, &mut out);
        deflate(&mut out);
        out.iter()
            .zip(&v)
            .map(|(y, x)| (y - lambda * x).abs())
            .fold(0.0f64, f64::max)
    };
    Err(Error::EigensolverFailure { iterations: POWER_ITERATION_CAP, residual })
}

/// Finds a low-conductance cut.
///
/// `auto` uses exhaustive enumeration up to [`BRUTE_FORCE_LIMIT`] vertices
/// and the spectral sweep beyond. Results are deterministic: ties in
/// conductance break toward the lexicographically smallest normalized side.
pub fn best_cut(g: &Graph, mode: CutMode) -> Result<CutSearchResult> {
    if g.n() < 2 {
        return Err(Error::InvalidGraph("cut search needs n >= 2".into()));
    }
    match mode {
        CutMode::BruteForce => brute_force_cut(g),
        CutMode::Sweep => sweep_cut(g),
        CutMode::Auto => {
            if g.n() <= BRUTE_FORCE_LIMIT {
                brute_force_cut(g)
            } else {
                sweep_cut(g)
            }
        }
    }
}

/// Exact key for ranking cuts: conductance compared by integer
/// cross-multiplication, ties broken by the normalized side's sorted vertex
/// list. A strict total order, so parallel reductions are deterministic.
fn cut_order(a: &Cut, b: &Cut) -> std::cmp::Ordering {
    a.cmp_conductance(b).then_with(|| a.s.cmp(&b.s))
}

fn brute_force_cut(g: &Graph) -> Result<CutSearchResult> {
    let n = g.n();
    assert!(n <= BRUTE_FORCE_LIMIT + 1, "brute force limited to small n");
    // Adjacency rows as bitmasks; enumerate subsets containing vertex 0 so
    // each complementary pair appears exactly once.
    let rows: Vec<u32> = (0..n as u32)
        .map(|u| g.neighbors(u).iter().fold(0u32, |acc, &v| acc | 1 << v))
        .collect();
    let degrees: Vec<usize> = (0..n as u32).map(|u| g.degree(u)).collect();
    let total = 2 * g.m();
    let m = g.m();

    let evaluate = |bits: u64| -> Option<Cut> {
        let mask = ((bits << 1) | 1) as u32; // vertex 0 always inside
        if mask.count_ones() as usize == n {
            return None;
        }
        let mut d_s = 0usize;
        let mut cross = 0usize;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            d_s += degrees[v];
            cross += (rows[v] & !mask).count_ones() as usize;
        }
        let (d_side, side_mask) = if d_s > m {
            (total - d_s, !mask & ((1u32 << n) - 1))
        } else {
            (d_s, mask)
        };
        let s: Vec<u32> = (0..n as u32).filter(|&v| side_mask >> v & 1 == 1).collect();
        let conductance = cross as f64 * total as f64 / (d_side as f64 * (total - d_side) as f64);
        Some(Cut {
            s,
            crossing_edges: cross,
            conductance,
            degree_s: d_side,
            degree_total: total,
        })
    };

    let best = exec::min_over_range(0, 1u64 << (n - 1), evaluate, cut_order)
        .expect("at least one proper cut");
    Ok(CutSearchResult { cut: best, method: CutMethod::BruteForce, certified_ratio: Some(1.0) })
}

fn sweep_cut(g: &Graph) -> Result<CutSearchResult> {
    let (_, vec2) = second_eigenpair(g)?;
    let n = g.n();
    let total = 2 * g.m();
    let m = g.m();

    let mut best: Option<Cut> = None;
    let mut consider = |cut: Cut| match &best {
        Some(b) if cut_order(&cut, b) == std::cmp::Ordering::Less => best = Some(cut),
        None => best = Some(cut),
        _ => {}
    };

    // Both coordinate orders, all n-1 prefixes each; ties in the coordinate
    // break by vertex id so the sweep is deterministic.
    for descending in [false, true] {
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| {
            let (xa, xb) = (vec2[a as usize], vec2[b as usize]);
            let primary = if descending {
                xb.partial_cmp(&xa).expect("finite eigenvector")
            } else {
                xa.partial_cmp(&xb).expect("finite eigenvector")
            };
            primary.then(a.cmp(&b))
        });
        let mut in_s = vec![false; n];
        let mut d_s = 0usize;
        let mut cross = 0i64;
        for (k, &v) in order.iter().enumerate().take(n - 1) {
            let internal = g.neighbors(v).iter().filter(|&&w| in_s[w as usize]).count();
            cross += g.degree(v) as i64 - 2 * internal as i64;
            d_s += g.degree(v);
            in_s[v as usize] = true;

            let (d_side, keep_prefix) = if d_s > m { (total - d_s, false) } else { (d_s, true) };
            let s: Vec<u32> = if keep_prefix {
                let mut s: Vec<u32> = order[..=k].to_vec();
                s.sort_unstable();
                s
            } else {
                let mut s: Vec<u32> = order[k + 1..].to_vec();
                s.sort_unstable();
                s
            };
            let crossing = cross as usize;
            let conductance =
                crossing as f64 * total as f64 / (d_side as f64 * (total - d_side) as f64);
            consider(Cut {
                s,
                crossing_edges: crossing,
                conductance,
                degree_s: d_side,
                degree_total: total,
            });
        }
    }
    Ok(CutSearchResult {
        cut: best.expect("n >= 2 yields at least one prefix"),
        method: CutMethod::Sweep,
        certified_ratio: None,
    })
}
