//! Sample-level parallelism on a rayon pool.

use pulseforge_core::scp::SampleMap;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{AppError, Result};

pub const THREADS_ENV: &str = "PULSEFORGE_THREADS";

/// Evaluates samples concurrently. Results stay in index order.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| AppError::Config(format!("cannot start worker threads: {e}")))?;
        Ok(Parallel { pool })
    }

    /// Honors `PULSEFORGE_THREADS`; otherwise one thread per core.
    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Parallel::new(n),
                _ => Err(AppError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
            },
            Err(_) => Parallel::new(0),
        }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl SampleMap for Parallel {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pulseforge_core::scp::Sequential;

    #[test]
    fn matches_sequential_order() {
        let par = Parallel::new(3).unwrap();
        assert_eq!(par.threads(), 3);
        let f = |i: usize| (i * i) as f64 / 7.0;
        assert_eq!(par.map(50, f), Sequential.map(50, f));
    }
}
