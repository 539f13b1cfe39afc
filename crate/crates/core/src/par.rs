//! Thin switch between rayon-backed and sequential execution.
//!
//! The heavy loops in this crate (curve segment generation, pairwise
//! intersection search, batches of trajectories) are independent jobs whose
//! outputs are merged in input order, so both backends produce identical
//! results. The `parallel` feature (on by default) selects rayon; without it
//! the same call sites run sequentially.

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Name of the active execution backend, for bench labels and run manifests.
pub fn backend_name() -> &'static str {
    if cfg!(feature = "parallel") {
        "rayon"
    } else {
        "sequential"
    }
}
