//! Thread-pool executor for the encrypted forward pass.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use spiketfhe_core::network::Executor;

use crate::error::{Error, Result};

/// Runs per-neuron work on a dedicated Rayon pool of `workers` threads.
pub struct RayonExecutor {
    pool: ThreadPool,
    workers: usize,
}

impl RayonExecutor {
    /// `workers = 0` uses one thread per available core.
    pub fn new(workers: usize) -> Result<Self> {
        let workers = if workers == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { workers };
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("spiketfhe-{i}"))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(RayonExecutor { pool, workers })
    }
}

impl Executor for RayonExecutor {
    fn workers(&self) -> usize {
        self.workers
    }

    fn map_init<T, R, S, I, F>(&self, items: &[T], init: I, f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &T) -> R + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map_init(&init, |s, t| f(s, t)).collect())
    }
}
