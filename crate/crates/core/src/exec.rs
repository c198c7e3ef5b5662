//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the default mode is [`Exec::Parallel`] and work
//! runs on the rayon pool. Without it every mode runs sequentially.

use std::cell::Cell;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

thread_local! {
    static OVERRIDE: Cell<Option<Exec>> = const { Cell::new(None) };
}

/// Mode used by library calls made from the current thread.
pub fn current() -> Exec {
    OVERRIDE.with(|c| c.get()).unwrap_or_default()
}

/// Runs `f` with library calls on this thread forced into `mode`.
pub fn with_mode<R>(mode: Exec, f: impl FnOnce() -> R) -> R {
    let prev = OVERRIDE.with(|c| c.replace(Some(mode)));
    let out = f();
    OVERRIDE.with(|c| c.set(prev));
    out
}

/// Sizes the global worker pool. Returns false if it was already initialised
/// or the crate is built without `parallel`.
pub fn set_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

/// Order-preserving map over a slice in the current mode.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match current() {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Like [`map`] but stops at the first error (in input order).
pub fn try_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(items, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = with_mode(Exec::Sequential, || map(&xs, |x| x * x));
        let b = with_mode(Exec::Parallel, || map(&xs, |x| x * x));
        assert_eq!(a, b);
        assert_eq!(current(), Exec::default());
    }
}
