//! Thread-count control and order-preserving parallel maps.
//!
//! Results never depend on the number of worker threads: every unit of work
//! derives its own random stream from its index.

use rayon::prelude::*;

/// Environment variable capping replicate parallelism.
pub const THREADS_ENV: &str = "KMBOOT_THREADS";

/// Reads [`THREADS_ENV`]; unset, empty, zero or unparsable values mean "all cores".
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `op` inside a dedicated pool with `threads` workers, or on the
/// current pool when `threads` is `None`.
pub fn with_threads<R, F>(threads: Option<usize>, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("failed to build thread pool")
            .install(op),
        None => op(),
    }
}

/// `(0..count).map(work)` evaluated in parallel, returned in index order.
pub fn map_indexed<T, F>(count: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(work).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved_under_any_pool() {
        let one = with_threads(Some(1), || map_indexed(100, |i| i * i));
        let four = with_threads(Some(4), || map_indexed(100, |i| i * i));
        assert_eq!(one, four);
        assert_eq!(one[7], 49);
    }
}
