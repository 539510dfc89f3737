//! Data-parallel map over index ranges, with a sequential fallback.
//!
//! Results always come back in index order, so any reduction over them is
//! independent of how the work was scheduled. Without the `parallel` feature
//! every [`Execution`] runs sequentially.

/// Environment variable read by the CLI for the default worker count.
pub const THREADS_ENV: &str = "BDTREE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..len).map(f)` collected in order.
pub fn map_indices<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Runs `f` inside a pool of `threads` workers (or the global pool when
/// `threads` is `None`). Sequential builds just call `f`.
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
        {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indices(Execution::Sequential, 1000, |i| i * i);
        let par = with_threads(Some(3), || {
            map_indices(Execution::Parallel, 1000, |i| i * i)
        });
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }
}
