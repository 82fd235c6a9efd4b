//! Data-parallel execution helpers.
//!
//! With the `parallel` feature (default) indexed maps fan out over rayon;
//! without it they run sequentially with identical results. Outputs are
//! collected in index order and reductions fold that ordered vector
//! sequentially, so results are byte-identical regardless of thread count.

/// Sequential indexed map, always available (used by benches as the
/// baseline arm).
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Indexed map over `0..n`, parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Indexed map over `0..n`, parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Caps the global worker pool. Returns an error message if the pool was
/// already initialized. No-op without the `parallel` feature.
pub fn limit_threads(n: usize) -> std::result::Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}
