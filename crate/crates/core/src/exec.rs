//! Data-parallel maps and reductions with a sequential fallback.
//!
//! With the `parallel` feature (default) the `map`/`fill`/`sum` helpers run
//! on rayon; without it they compile to plain loops. Reductions use a fixed
//! chunk length and combine partial sums in index order, so the result is
//! bit-identical between the parallel and sequential paths and across runs
//! regardless of thread count. The `*_seq` twins stay available in all
//! builds for the benchmark suite.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic reductions and minimum parallel grain.
const CHUNK: usize = 4096;

pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential twin of [`map`].
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Fill `out[i] = f(i)`.
pub fn fill_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut()
            .enumerate()
            .with_min_len(CHUNK)
            .for_each(|(i, o)| *o = f(i));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }
}

/// Sequential twin of [`fill_indexed`].
pub fn fill_indexed_seq<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64,
{
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// Deterministic chunked sum of `f(i)` over `0..n`.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<f64>;
    #[cfg(feature = "parallel")]
    {
        partials = (0..chunks)
            .into_par_iter()
            .map(|c| chunk_sum(c, n, &f))
            .collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        partials = (0..chunks).map(|c| chunk_sum(c, n, &f)).collect();
    }
    partials.iter().sum()
}

/// Sequential twin of [`sum_indexed`]; uses the same chunking so the
/// floating-point result matches the parallel path exactly.
pub fn sum_indexed_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks).map(|c| chunk_sum(c, n, &f)).sum()
}

fn chunk_sum<F: Fn(usize) -> f64>(chunk: usize, n: usize, f: &F) -> f64 {
    let lo = chunk * CHUNK;
    let hi = (lo + CHUNK).min(n);
    let mut acc = 0.0;
    for i in lo..hi {
        acc += f(i);
    }
    acc
}
