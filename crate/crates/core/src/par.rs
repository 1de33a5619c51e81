//! Data-parallel loop helpers.
//!
//! With the `parallel` feature the loops run on the rayon pool; without it
//! they fall back to plain iterators. Every helper produces results in index
//! order, so reductions done on the returned vectors are identical for any
//! thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f(row_index, row)` to consecutive chunks of `row_len` elements.
pub fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Applies `f` to blocks of `rows_per_block * row_len` elements; `f` receives
/// the index of the first row in the block.
pub fn for_each_block<T, F>(data: &mut [T], row_len: usize, rows_per_block: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    let block = row_len * rows_per_block.max(1);
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(block)
        .enumerate()
        .for_each(|(i, chunk)| f(i * rows_per_block, chunk));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(block)
        .enumerate()
        .for_each(|(i, chunk)| f(i * rows_per_block, chunk));
}

/// `(0..n).map(f).collect()`, possibly in parallel, always in index order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

/// Ordered parallel map over a slice.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return items.iter().map(f).collect();
}

/// Elementwise `out[i] = f(i, out[i])` over a flat buffer, chunked by rows.
pub fn update_indexed<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Send + Sync,
{
    for_each_row(data, row_len, |r, row| {
        let base = r * row_len;
        for (i, v) in row.iter_mut().enumerate() {
            f(base + i, v);
        }
    });
}

/// Sum of per-row partial results, combined sequentially in row order.
pub fn row_sum<F>(rows: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    map_range(rows, f).into_iter().sum()
}

/// Max of per-row partial results.
pub fn row_max<F>(rows: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    map_range(rows, f).into_iter().fold(0.0, f64::max)
}

/// Number of worker threads the data-parallel loops will use.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();
    #[cfg(not(feature = "parallel"))]
    return 1;
}
