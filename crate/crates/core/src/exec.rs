//! Execution strategy for the exhaustive sweeps.
//!
//! Every sweep in the crate is a map over an index range followed by an
//! associative reduction, so the same closure runs either on the rayon pool or
//! in a plain loop. Without the `parallel` feature both variants are sequential.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when work is actually spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `reduce(map(0), reduce(map(1), ...))` over `0..n`. `reduce` must be
    /// associative and `identity` its neutral element.
    pub fn map_reduce<T, M, I, R>(self, n: usize, map: M, identity: I, reduce: R) -> T
    where
        T: Send,
        M: Fn(usize) -> T + Sync + Send,
        I: Fn() -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n)
                .into_par_iter()
                .with_min_len(64)
                .map(map)
                .reduce(identity, reduce);
        }
        (0..n).map(map).fold(identity(), reduce)
    }

    /// Smallest index for which `f` returns `Some`, independent of scheduling.
    pub fn find_first<T, F>(self, n: usize, f: F) -> Option<(usize, T)>
    where
        T: Send,
        F: Fn(usize) -> Option<T> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n)
                .into_par_iter()
                .with_min_len(16)
                .filter_map(|i| f(i).map(|t| (i, t)))
                .find_first(|_| true);
        }
        (0..n).find_map(|i| f(i).map(|t| (i, t)))
    }
}
