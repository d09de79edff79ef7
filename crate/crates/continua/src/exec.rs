//! Batch execution helpers.
//!
//! Hot verification loops (sampled local-connectivity checks, pairwise chain
//! disjointness) run through these helpers.  With the default `parallel`
//! feature they fan out over rayon; without it they run sequentially.  The
//! explicit `_seq` variants always run sequentially so benchmarks can compare
//! both paths in a single build.  All reductions used here are
//! order-independent, so results are identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
pub fn map_batch<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential twin of [`map_batch`].
pub fn map_batch_seq<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Tests whether `f` holds for every item, in parallel when enabled.
pub fn all_batch<T: Sync>(items: &[T], f: impl Fn(&T) -> bool + Sync + Send) -> bool {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().all(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().all(f)
    }
}

/// Sequential twin of [`all_batch`].
pub fn all_batch_seq<T>(items: &[T], f: impl Fn(&T) -> bool) -> bool {
    items.iter().all(f)
}
