//! Trial fan-out. With the `parallel` feature trials run on a rayon pool;
//! without it they run in index order. Results are always returned in trial
//! order, so outputs do not depend on scheduling.

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "PHONECALL_WORKERS";

pub fn map_trials_sequential<T, F>(count: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_trials_parallel<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

/// Maps `f` over trial indices `0..count` with the crate's default strategy.
pub fn map_trials<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_trials_parallel(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_trials_sequential(count, f)
    }
}

/// Worker count from an explicit flag, else the environment, else `None`
/// (machine parallelism).
pub fn resolve_workers(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok()).filter(|&w| w > 0)
}

/// Runs `f` with a pool of `workers` threads when given. A no-op wrapper
/// without the `parallel` feature.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if let Some(w) = workers {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
