//! Work scheduling for embarrassingly parallel loops (shots, trials).
//!
//! Results are always collected in index order, and each unit derives its
//! randomness from its own index, so the two modes produce identical output.
//! With the `parallel` feature disabled, `Parallel` silently degrades to the
//! sequential loop.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Parallel,
    Sequential,
}

impl ExecMode {
    /// The mode actually in effect once feature flags are accounted for.
    pub fn effective(self) -> ExecMode {
        if cfg!(feature = "parallel") {
            self
        } else {
            ExecMode::Sequential
        }
    }
}

/// Runs `f(0..count)` and returns the results in index order.
pub fn run_indexed<T, F>(mode: ExecMode, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode.effective() {
        ExecMode::Sequential => (0..count).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..count).into_par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        ExecMode::Parallel => unreachable!("effective() folds Parallel away"),
    }
}

/// Caps the global thread pool. Call once, before any parallel work; later
/// calls are ignored (the pool is already built). No-op without the
/// `parallel` feature or when `threads` is 0.
pub fn set_global_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            // Ignore the error: the global pool may already exist, in which
            // case keeping it is the only consistent choice.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_come_back_in_index_order() {
        for mode in [ExecMode::Sequential, ExecMode::Parallel] {
            let out = run_indexed(mode, 100, |i| i * i);
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn modes_agree_on_rng_derived_work() {
        let work = |i: usize| {
            let mut rng = crate::rng::shot_rng(42, i as u64);
            crate::rng::uniform_f64(&mut rng)
        };
        let seq = run_indexed(ExecMode::Sequential, 64, work);
        let par = run_indexed(ExecMode::Parallel, 64, work);
        assert_eq!(seq, par);
    }

    #[test]
    fn empty_range_is_fine() {
        let out: Vec<u8> = run_indexed(ExecMode::Parallel, 0, |_| 0u8);
        assert!(out.is_empty());
    }
}
