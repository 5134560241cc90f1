//! Induced chains on partition blocks: internal unit-weight edges plus
//! oriented return weights from excursions outside the block.
//!
//! Excursions are computed on the non-lazy kernel (laziness commutes with the
//! excursion structure and is reapplied when the block chain is fed back to
//! the mixing machinery). The geometric series over outside states is closed
//! in one symmetric positive-definite solve instead of summed power by
//! power: with `S(x,y) = A(x,y)/sqrt(d_x d_y)` on the outside states,
//! `(I - Q)^{-1} = D^{-1/2} (I - S)^{-1} D^{1/2}`, and forcing the computed
//! `(I - S)^{-1}` symmetric keeps `deg(v) rho_{v,w} = deg(w) rho_{w,v}` at
//! the rounding floor rather than at solver accuracy.

use crate::error::{Error, Result};
use crate::exec;
use crate::graph::Graph;
use crate::markov::ChainMatrices;
use crate::spectral::{best_cut, CutMode, BRUTE_FORCE_LIMIT};
use nalgebra::DMatrix;

/// Weighted chain observed by restricting the walk to a block.
#[derive(Debug, Clone)]
pub struct CollapsedChain {
    /// Sorted original vertex ids of the block.
    pub block: Vec<u32>,
    /// Row-stochastic non-lazy transition matrix over the block: internal
    /// moves plus excursion returns.
    pub p: DMatrix<f64>,
    /// Excursion-return weights `rho_{v,w}`.
    pub rho: DMatrix<f64>,
    /// Stationary vector `pi_{v,i} = deg(v) / deg(V_i)` (global degrees).
    pub pi: Vec<f64>,
    /// Global degrees of the block vertices, the weight measure of the chain.
    pub degrees: Vec<f64>,
}

impl CollapsedChain {
    /// Lazy/non-lazy chain matrices for the block chain, for mixing checks.
    pub fn chain(&self) -> ChainMatrices {
        ChainMatrices::from_kernel(self.p.clone(), self.degrees.clone())
    }

    /// Edge weight `w(v, w) = 1_{edge} + deg(v) rho_{v,w}` in block indices.
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.degrees[a] * self.p[(a, b)]
    }
}

/// Excursion-return weights `rho_{v,w}` for a block: the probability that a
/// walk at `v` leaves the block immediately and re-enters at `w`.
pub fn excursion_weights(c: &ChainMatrices, block: &[u32]) -> Result<DMatrix<f64>> {
    let (rho, _) = excursion_weights_impl(c, block)?;
    Ok(rho)
}

fn sorted_block(c: &ChainMatrices, block: &[u32]) -> Result<Vec<u32>> {
    if block.is_empty() {
        return Err(Error::InvalidCut("empty block".into()));
    }
    let mut ids = block.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.last().map(|&v| v as usize >= c.n()).unwrap_or(false) {
        return Err(Error::InvalidCut("block vertex out of range".into()));
    }
    Ok(ids)
}

fn excursion_weights_impl(c: &ChainMatrices, block: &[u32]) -> Result<(DMatrix<f64>, Vec<u32>)> {
    let ids = sorted_block(c, block)?;
    let k = ids.len();
    let n = c.n();
    let outside: Vec<usize> = {
        let mut member = vec![false; n];
        for &v in &ids {
            member[v as usize] = true;
        }
        (0..n).filter(|&v| !member[v]).collect()
    };
    if outside.is_empty() {
        return Ok((DMatrix::zeros(k, k), ids));
    }
    let o = outside.len();
    let p = c.transition_nonlazy();
    let deg = c.degrees();

    // Symmetrized outside-restricted kernel and its SPD complement.
    let mut m = DMatrix::zeros(o, o);
    for (a, &x) in outside.iter().enumerate() {
        for (b, &y) in outside.iter().enumerate() {
            let s = p[(x, y)] * (deg[x] / deg[y]).sqrt();
            m[(a, b)] = if a == b { 1.0 - s } else { -s };
        }
    }
    let chol = nalgebra::Cholesky::new(m).ok_or(Error::AbsorbingEscape)?;
    let mut s_inv = chol.inverse();
    // Exact symmetry of the inverse is what carries detailed balance through
    // the assembly below.
    for a in 0..o {
        for b in (a + 1)..o {
            let avg = 0.5 * (s_inv[(a, b)] + s_inv[(b, a)]);
            s_inv[(a, b)] = avg;
            s_inv[(b, a)] = avg;
        }
    }

    // rho_{v,w} = sum_{x,y outside} P(v,x) N(x,y) P(y,w) with
    // N = D^{-1/2} S^{-1} D^{1/2}.
    let mut rho = DMatrix::zeros(k, k);
    for (vi, &v) in ids.iter().enumerate() {
        for (wi, &w) in ids.iter().enumerate() {
            let mut acc = 0.0;
            for (a, &x) in outside.iter().enumerate() {
                let pv = p[(v as usize, x)];
                if pv == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for (b, &y) in outside.iter().enumerate() {
                    let pw = p[(y, w as usize)];
                    if pw == 0.0 {
                        continue;
                    }
                    inner += s_inv[(a, b)] * (deg[y] / deg[x]).sqrt() * pw;
                }
                acc += pv * inner;
            }
            rho[(vi, wi)] = acc;
        }
    }
    Ok((rho, ids))
}

/// Builds the collapsed chain on a block: `P_i(v,w) = 1_{edge}/deg(v) + rho_{v,w}`.
pub fn build_collapsed(c: &ChainMatrices, block: &[u32]) -> Result<CollapsedChain> {
    let (rho, ids) = excursion_weights_impl(c, block)?;
    let k = ids.len();
    let p_full = c.transition_nonlazy();
    let mut p = DMatrix::zeros(k, k);
    for (a, &v) in ids.iter().enumerate() {
        for (b, &w) in ids.iter().enumerate() {
            p[(a, b)] = p_full[(v as usize, w as usize)] + rho[(a, b)];
        }
    }
    let degrees: Vec<f64> = ids.iter().map(|&v| c.degrees()[v as usize]).collect();
    let total: f64 = degrees.iter().sum();
    let pi: Vec<f64> = degrees.iter().map(|d| d / total).collect();
    Ok(CollapsedChain { block: ids, p, rho, pi, degrees })
}

/// Conductance bound for the block chain.
#[derive(Debug, Clone, Copy)]
pub struct CollapsedBound {
    /// Best internal cut conductance found on the induced simple subgraph.
    pub phi_internal: f64,
    /// Numeric lower-bound transfer `phi_internal * theta^2 / 3`.
    pub lower: f64,
    /// Exact weighted conductance by brute force, for blocks of at most
    /// [`BRUTE_FORCE_LIMIT`] vertices.
    pub exact: Option<f64>,
}

/// Lower bound on the collapsed chain's conductance, with the exact weighted
/// value by enumeration on small blocks.
pub fn collapsed_conductance_bound(
    cc: &CollapsedChain,
    g: &Graph,
) -> Result<CollapsedBound> {
    let theta = g.min_degree_ratio().theta;
    let phi_internal = if cc.block.len() == g.n() {
        best_cut(g, CutMode::Auto)?.cut.conductance
    } else {
        let (sub, _) = g.induced(&cc.block)?;
        best_cut(&sub, CutMode::Auto)?.cut.conductance
    };
    let lower = phi_internal * theta * theta / 3.0;
    let exact = if cc.block.len() <= BRUTE_FORCE_LIMIT {
        Some(exact_weighted_conductance(cc))
    } else {
        None
    };
    Ok(CollapsedBound { phi_internal, lower, exact })
}

/// Minimum weighted conductance `w(S, S-bar) w(V_i) / (deg(S) deg(S-bar))`
/// over all proper subsets of the block.
fn exact_weighted_conductance(cc: &CollapsedChain) -> f64 {
    let k = cc.block.len();
    assert!(k <= BRUTE_FORCE_LIMIT, "weighted enumeration limited to small blocks");
    if k == 1 {
        return f64::INFINITY;
    }
    // Symmetric weights w(a,b) = deg(a) P(a,b); includes both the unit
    // internal edges and the excursion mass.
    let mut w = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            w[(a, b)] = cc.degrees[a] * cc.p[(a, b)];
        }
    }
    let w_total: f64 = cc.degrees.iter().sum();

    let phi_of = |bits: u64| -> Option<f64> {
        let mask = (bits << 1) | 1;
        if mask.count_ones() as usize == k {
            return None;
        }
        let mut deg_s = 0.0;
        let mut cross = 0.0;
        for a in 0..k {
            if mask >> a & 1 == 1 {
                deg_s += cc.degrees[a];
                for b in 0..k {
                    if mask >> b & 1 == 0 {
                        cross += w[(a, b)];
                    }
                }
            }
        }
        Some(cross * w_total / (deg_s * (w_total - deg_s)))
    };
    exec::min_over_range(0, 1u64 << (k - 1), phi_of, |a, b| {
        a.partial_cmp(b).expect("finite conductance")
    })
    .expect("at least one proper subset")
}
