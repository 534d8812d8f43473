//! Data-parallel map helper with a sequential fallback.
//!
//! Built with the `parallel` feature (the default), [`map_slice`] fans work
//! out over rayon; without it, the same call runs sequentially. Output order
//! always matches input order, so callers stay deterministic either way.
//! [`map_slice_seq`] is always sequential and exists so benchmarks can
//! compare both paths in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Sequential reference path for benchmarking against [`map_slice`].
pub fn map_slice_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_input_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let squared = map_slice(&xs, |x| x * x);
        let expected = map_slice_seq(&xs, |x| x * x);
        assert_eq!(squared, expected);
    }
}
