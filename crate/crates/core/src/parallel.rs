//! Switch between rayon-backed and sequential execution of the data-parallel
//! inner loops.
//!
//! Every hot loop in the crate (per-channel FFTs, raster rows, frames in a
//! pipeline stage) funnels through these helpers, so the `parallel` feature
//! toggles exactly one place. Both builds produce results in index order,
//! which keeps every output byte-identical between the two modes — the only
//! difference is wall-clock time.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when this build runs the data-parallel paths.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `0..n` and collects the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Applies `f` to equally sized mutable chunks of `data` (the last chunk may
/// be shorter), passing each chunk its index.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    assert!(chunk_len > 0, "chunk length must be positive");
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Runs `f` inside a thread pool limited to `jobs` workers. `None` or `Some(0)`
/// uses the default pool; in a sequential build the limit is irrelevant and
/// `f` simply runs on the calling thread.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match jobs {
            Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            _ => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indexed_preserves_order() {
        let v = map_indexed(1000, |i| i * i);
        assert_eq!(v.len(), 1000);
        for (i, x) in v.iter().enumerate() {
            assert_eq!(*x, i * i);
        }
    }

    #[test]
    fn chunks_see_disjoint_slices() {
        let mut data = vec![0u32; 103];
        for_each_chunk(&mut data, 10, |i, c| {
            for x in c.iter_mut() {
                *x = i as u32;
            }
        });
        assert_eq!(data[0], 0);
        assert_eq!(data[99], 9);
        assert_eq!(data[102], 10);
    }

    #[test]
    fn with_jobs_runs_closure() {
        let out = with_jobs(Some(2), || map_indexed(64, |i| i + 1));
        assert_eq!(out[63], 64);
    }
}
