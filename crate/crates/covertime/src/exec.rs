//! Parallel/sequential execution seam.
//!
//! With the `parallel` feature the helpers fan out on rayon; without it they
//! run plain sequential loops. Results are identical either way: maps are
//! index-ordered and reductions use total orders, so scheduling cannot leak
//! into outputs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `0..n` through `f`, preserving index order in the output.
pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Minimum of `f` over `lo..hi` under a strict total order on keys.
///
/// The comparator must never report equality for distinct items (tie-break
/// inside the key), which makes the parallel reduction deterministic.
pub(crate) fn min_over_range<K, F, C>(lo: u64, hi: u64, f: F, cmp: C) -> Option<K>
where
    K: Send,
    F: Fn(u64) -> Option<K> + Sync + Send,
    C: Fn(&K, &K) -> std::cmp::Ordering + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (lo..hi)
            .into_par_iter()
            .filter_map(f)
            .min_by(|a, b| cmp(a, b))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (lo..hi).filter_map(f).min_by(|a, b| cmp(a, b))
    }
}
