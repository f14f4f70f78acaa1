//! Tiny scoped-thread helper for embarrassingly parallel batches.
//!
//! The worker count is capped by the `PENCIL_CURVATURE_THREADS` environment
//! variable. Batch seeds are fixed by the caller, so results do not depend
//! on the worker count.

/// Number of workers: available parallelism, capped by the env variable.
pub fn worker_count() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("PENCIL_CURVATURE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => avail.min(cap),
        _ => avail,
    }
}

/// Maps `f` over `0..batches` on the worker pool, preserving order.
pub fn parallel_map<T, F>(batches: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = worker_count().min(batches.max(1));
    if workers <= 1 {
        return (0..batches).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..batches).map(|_| None).collect();
    let chunks: Vec<(usize, &mut [Option<T>])> = {
        let mut v = Vec::new();
        let mut rest = out.as_mut_slice();
        let mut start = 0;
        let per = batches.div_ceil(workers);
        while !rest.is_empty() {
            let take = per.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            v.push((start, head));
            start += take;
            rest = tail;
        }
        v
    };
    std::thread::scope(|scope| {
        for (start, chunk) in chunks {
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(f(start + i));
                }
            });
        }
    });
    out.into_iter().map(|x| x.expect("worker filled every slot")).collect()
}
