//! Data-parallel map helpers.
//!
//! With the `parallel` feature (default) [`map_collect`] fans out over a
//! rayon pool; without it, it degrades to the sequential path. Output order
//! always matches input order, and every item owns its state, so results
//! are independent of execution order and identical across both builds.
//! [`map_collect_seq`] is always sequential, for benchmark comparisons.

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_collect_seq(items, f)
}

pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential_in_order() {
        let items: Vec<u64> = (0..257).collect();
        let f = |x: &u64| x.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17);
        assert_eq!(map_collect(&items, f), map_collect_seq(&items, f));
    }
}
