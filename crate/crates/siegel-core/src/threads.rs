//! Worker pool shared by the batch experiments.
//!
//! `SIEGEL_THETA_THREADS` caps parallelism. All parallel code in this crate
//! maps work items in a fixed order and combines them deterministically, so
//! results never depend on the thread count.

use std::sync::OnceLock;

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

/// The crate-wide thread pool, honoring `SIEGEL_THETA_THREADS`.
pub fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap() {
            builder = builder.num_threads(n);
        }
        builder.build().expect("failed to build worker pool")
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var("SIEGEL_THETA_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Maps `f` over `items` on the shared pool, preserving input order.
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    pool().install(|| items.into_par_iter().map(f).collect())
}
