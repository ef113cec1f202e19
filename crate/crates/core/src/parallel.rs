//! Sequential / data-parallel execution of independent indexed work items.
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] silently
//! runs sequentially. Output order is always the index order, so reductions
//! over the returned vector are deterministic.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Execution {
    Sequential,
    /// Rayon; `threads: None` uses the global pool.
    Parallel {
        threads: Option<usize>,
    },
    #[default]
    Auto,
}

impl Execution {
    /// Execution for a `--jobs N` style request: 1 is sequential, 0 is auto.
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            0 => Execution::Auto,
            1 => Execution::Sequential,
            n => Execution::Parallel { threads: Some(n) },
        }
    }

    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map_indexed<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Auto => par_map(n, f, None),
            Execution::Parallel { threads } => par_map(n, f, threads),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<R, F>(n: usize, f: F, threads: Option<usize>) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<R>>();
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<R, F>(n: usize, f: F, _threads: Option<usize>) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}
