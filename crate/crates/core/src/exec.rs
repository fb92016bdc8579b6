//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these run on the rayon thread
//! pool; without it they run sequentially. Both paths produce results in
//! index order, and chunked folds merge partials in a fixed chunk order,
//! so outputs are identical regardless of feature flags or thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` and collects results in index order.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fold over fixed-size index chunks, then merge the partials
/// sequentially in chunk order. The chunk layout depends only on
/// (`n`, `chunk`), never on the thread count.
pub(crate) fn fold_chunked<T, F, M>(n: usize, chunk: usize, fold: F, merge: M, identity: T) -> T
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    M: FnMut(T, T) -> T,
{
    let chunk = chunk.max(1);
    let bounds: Vec<std::ops::Range<usize>> = (0..n)
        .step_by(chunk)
        .map(|lo| lo..(lo + chunk).min(n))
        .collect();
    let partials = {
        #[cfg(feature = "parallel")]
        {
            bounds.into_par_iter().map(fold).collect::<Vec<_>>()
        }
        #[cfg(not(feature = "parallel"))]
        {
            bounds.into_iter().map(fold).collect::<Vec<_>>()
        }
    };
    let mut merge = merge;
    partials.into_iter().fold(identity, |acc, p| merge(acc, p))
}
