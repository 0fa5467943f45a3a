//! Execution strategy for embarrassingly parallel jobs (trials, root vertices).

use alloc::vec::Vec;

/// Maps `f` over `0..len` and returns the results in index order.
///
/// Implementations may run the calls concurrently but must preserve the
/// output order, so every reduction downstream stays deterministic.
pub trait Executor: Sync {
    fn map_collect<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every job on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_collect<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}
