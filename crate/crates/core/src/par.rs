//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the loops below run on rayon;
//! without it the same code paths run sequentially. Determinism never
//! depends on the schedule: all randomness flows through per-context
//! streams (see [`crate::rng`]).

use crate::error::Result;

/// Environment variable capping the rayon thread pool.
pub const THREADS_ENV: &str = "CONTEXT_TOOLKIT_THREADS";

/// Applies `f` to `0..n` and collects results, failing on the first error.
#[cfg(feature = "parallel")]
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Strictly sequential variant, kept available for benches comparing the
/// two paths and as the reference for determinism checks.
pub fn try_map_indexed_seq<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..n).map(f).collect()
}

/// Installs a global rayon pool sized from `CONTEXT_TOOLKIT_THREADS` if the
/// variable is set and the pool is not built yet. No-op without `parallel`.
pub fn configure_threads_from_env() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var(THREADS_ENV) {
        if let Ok(threads) = value.trim().parse::<usize>() {
            if threads >= 1 {
                // Ignore the error if a pool already exists.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}
