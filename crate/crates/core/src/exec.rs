//! Deterministic batch execution.
//!
//! Batch work (Monte Carlo sampling, randomized state batteries) is split
//! into independently seeded lanes indexed `0..n`. Lane results are merged in
//! lane order, so the outcome is bit-identical whether lanes run on one
//! thread or many. The `parallel` feature routes lanes through rayon;
//! without it everything runs sequentially and [`Execution::Parallel`]
//! silently degrades to the sequential path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a batch of independent lanes is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Generator for one lane of a batch: a fixed master seed fans out into
/// independent ChaCha streams, one per lane index. Reproducible across
/// platforms and thread counts.
pub fn stream_rng(seed: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(lane);
    rng
}

/// Evaluate `f(0), f(1), …, f(n-1)` and collect results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}
