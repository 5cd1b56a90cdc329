//! Data-parallel helpers. With the `parallel` feature the work runs on the
//! rayon pool; without it, or with [`Parallelism::Sequential`], it runs in a
//! plain loop. Output order never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Sizes the global worker pool. Only the first call has an effect; without
/// the `parallel` feature it is a no-op.
pub fn configure_workers(workers: usize) {
    #[cfg(feature = "parallel")]
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            log::debug!("worker pool already initialised: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
}

pub fn map_indexed<T, F>(len: usize, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode.is_parallel() {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..len).map(f).collect()
}

pub fn try_map_indexed<T, E, F>(len: usize, mode: Parallelism, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode.is_parallel() {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let seq = map_indexed(1000, Parallelism::Sequential, |i| i * i);
        let par = map_indexed(1000, Parallelism::Parallel, |i| i * i);
        assert_eq!(seq, par);
    }

    #[test]
    fn first_error_in_index_order_is_reported() {
        let r: Result<Vec<usize>, usize> = try_map_indexed(100, Parallelism::Sequential, |i| {
            if i >= 10 {
                Err(i)
            } else {
                Ok(i)
            }
        });
        assert_eq!(r, Err(10));
        let r: Result<Vec<usize>, usize> = try_map_indexed(100, Parallelism::Parallel, |i| {
            if i == 42 {
                Err(i)
            } else {
                Ok(i)
            }
        });
        assert_eq!(r, Err(42));
    }
}
