//! Order-preserving data-parallel helpers.
//!
//! With the `parallel` feature, work is spread over the rayon pool unless
//! disabled at run time with [`set_parallel`]. Without the feature every
//! helper runs sequentially. Results are always returned in input order, so
//! callers observe identical output either way.

use std::sync::atomic::{AtomicBool, Ordering};

static ENABLED: AtomicBool = AtomicBool::new(true);

/// Toggle parallel execution for the whole process.
pub fn set_parallel(enabled: bool) {
    ENABLED.store(enabled, Ordering::Relaxed);
}

/// True when work will actually be spread over threads.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && ENABLED.load(Ordering::Relaxed)
}

/// Below this many items the sequential path is used regardless.
const MIN_PARALLEL_LEN: usize = 2;

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() && items.len() >= MIN_PARALLEL_LEN {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Like [`map`] for callers that only parallelize large batches.
pub fn map_if_large<T, R, F>(items: &[T], threshold: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if items.len() < threshold {
        items.iter().map(f).collect()
    } else {
        map(items, f)
    }
}
