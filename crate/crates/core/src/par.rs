//! Data-parallel helpers. With the `parallel` feature (default) batches of
//! independent runs go through rayon; without it they run in order.

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_seq(items, f)
}

/// Sequential reference path, always available.
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Number of workers the parallel path will use.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Run `f` inside a pool of `n` threads (no-op without the feature).
pub fn with_workers<R: Send>(n: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = n {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        f()
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn parallel_and_sequential_agree() {
        let xs: Vec<u64> = (0..100).collect();
        assert_eq!(super::map(&xs, |x| x * x), super::map_seq(&xs, |x| x * x));
    }
}
