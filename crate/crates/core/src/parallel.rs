//! Worker pool sizing. `ISOMER_THREADS` caps the number of workers; unset or
//! unparsable values fall back to the available parallelism.

use std::sync::OnceLock;

use rayon::ThreadPool;

pub const THREADS_ENV: &str = "ISOMER_THREADS";

pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n >= 1 => n.min(available.max(1)),
        _ => available,
    }
}

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(worker_count())
            .thread_name(|i| format!("isomer-{i}"))
            .build()
            .expect("thread pool")
    })
}

/// Runs `f` inside the crate's worker pool.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}
