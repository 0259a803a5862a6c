use rayon::prelude::*;

use crate::error::{BiclusterError, Result};

/// Environment variable capping worker threads; 0 or unset means automatic.
pub const THREADS_ENV: &str = "BICLUSTER_THREADS";

/// Worker-count setting for independent chains and restarts. Results are
/// always collected in index order, so output does not depend on the count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Parallelism {
    threads: usize,
}

impl Parallelism {
    /// `threads == 0` lets rayon pick.
    pub fn new(threads: usize) -> Self {
        Self { threads }
    }

    pub fn sequential() -> Self {
        Self::new(1)
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => v
                .trim()
                .parse()
                .map(Self::new)
                .map_err(|_| BiclusterError::InvalidParameter(format!("{THREADS_ENV}={v} is not a thread count"))),
            _ => Ok(Self::default()),
        }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Evaluates `f(0..count)` and returns the results in index order.
    pub fn map<T, F>(&self, count: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Send + Sync,
    {
        if self.threads == 1 {
            return (0..count).map(f).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| BiclusterError::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| (0..count).into_par_iter().map(&f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        for threads in [0, 1, 4] {
            let out = Parallelism::new(threads).map(50, |i| Ok(i * i)).unwrap();
            assert_eq!(out, (0..50).map(|i| i * i).collect::<Vec<_>>());
        }
    }
}
