//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run sequentially. Outputs are collected in index order either way, so
//! results never depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the sequential path is used even when rayon is on.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_LEN: usize = 64;

/// Evaluate `f(i)` for `i in 0..n`, preserving order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= MIN_PARALLEL_LEN {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Evaluate `f` on every element of `items`, preserving order.
pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if items.len() >= MIN_PARALLEL_LEN {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Like [`map_slice`] but always parallel when the feature is on, for
/// workloads where each item is expensive (quadrature segments, pieces).
pub fn map_slice_coarse<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if items.len() > 1 {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Maximum of a sequence, ignoring NaN. Empty input gives `-inf`.
pub fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(f64::NEG_INFINITY, |acc, v| if v > acc { v } else { acc })
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
