//! Data-parallel kernels with a sequential fallback.
//!
//! All hot loops in the crate funnel through these helpers. With the
//! `parallel` feature (default) they fan out over rayon; without it, or when
//! the caller passes `parallel = false`, they run sequentially. Reductions
//! always sum in index order, so results are bitwise reproducible regardless
//! of the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` and collects the results in index order.
pub fn map_collect<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Sequential variant, kept separate so benchmarks can compare both paths.
pub fn map_collect_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Sums `f(i)` for `i` in `0..n`. Terms are evaluated in parallel but summed
/// sequentially in index order for determinism.
pub fn sum_over<F>(n: usize, parallel: bool, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_collect(n, parallel, f).into_iter().sum()
}

/// Sequential variant of [`sum_over`].
pub fn sum_over_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    map_collect_seq(n, f).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_sums_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.7).sin() / (i as f64 + 1.0);
        let a = sum_over(10_000, true, f);
        let b = sum_over_seq(10_000, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
