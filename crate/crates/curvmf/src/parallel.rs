//! Minimal deterministic parallel map over an index range.
//!
//! Results are written by sample index, so the merged output does not depend
//! on the thread count. `CURVMF_THREADS` caps the worker count.

/// Worker count: `CURVMF_THREADS` if set, else available parallelism capped
/// at 8.
pub fn thread_cap() -> usize {
    if let Ok(s) = std::env::var("CURVMF_THREADS") {
        if let Ok(n) = s.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get().min(8))
        .unwrap_or(1)
}

/// Apply `f` to every index in `0..n`, in parallel chunks, collecting results
/// in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = thread_cap().min(n.max(1));
    if threads <= 1 || n < 2 {
        return (0..n).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, slot) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (off, cell) in slot.iter_mut().enumerate() {
                    *cell = Some(f(t * chunk + off));
                }
            });
        }
    });
    out.into_iter().map(|x| x.expect("worker filled slot")).collect()
}
