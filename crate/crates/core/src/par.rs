//! Data-parallel helpers. With the `parallel` feature the work runs on the
//! rayon pool; without it every helper degrades to a plain loop.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    /// Parallel when the crate is built with `parallel`.
    #[default]
    Auto,
    Sequential,
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self != Execution::Sequential
    }
}

/// Order-preserving map.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Split `[0, len)` into `parts` contiguous ranges of nearly equal size.
pub fn ranges(len: u128, parts: usize) -> Vec<(u128, u128)> {
    let parts = (parts.max(1) as u128).min(len.max(1));
    let step = len / parts;
    let extra = len % parts;
    let mut out = Vec::with_capacity(parts as usize);
    let mut start = 0;
    for i in 0..parts {
        let end = start + step + u128::from(i < extra);
        out.push((start, end));
        start = end;
    }
    out
}

/// Number of chunks worth creating for a job of `len` units.
pub fn chunk_count(exec: Execution, len: u128) -> usize {
    if !exec.is_parallel() {
        return 1;
    }
    let per = 1u128 << 16;
    ((len / per) as usize).clamp(1, 4 * threads())
}

pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Run `f` on a pool of `jobs` threads (the global pool if `None`).
pub fn install<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover() {
        for (len, parts) in [(0u128, 3usize), (10, 3), (10, 1), (7, 20), (1 << 20, 8)] {
            let r = ranges(len, parts);
            assert_eq!(r.first().unwrap().0, 0);
            assert_eq!(r.last().unwrap().1, len);
            assert!(r.windows(2).all(|w| w[0].1 == w[1].0));
        }
    }

    #[test]
    fn map_keeps_order() {
        let xs: Vec<u64> = (0..1000).collect();
        for exec in [Execution::Sequential, Execution::Parallel, Execution::Auto] {
            let ys = map(exec, &xs, |x| x * x);
            assert!(ys.iter().enumerate().all(|(i, &y)| y == (i * i) as u64));
        }
    }
}
