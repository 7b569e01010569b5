//! Deterministic fan-out over indexed work.
//!
//! Forest trees, cross-validation folds, and per-link labeling are
//! independent jobs addressed by index. Each job derives anything random
//! from its own index, so the result vector is identical no matter how many
//! workers run — `--jobs` trades wall time, never output.

/// Run `f(0..count)` across up to `jobs` workers and return the results in
/// index order. `jobs == 1` (or a single item) runs inline.
pub fn run_indexed<T, F>(count: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1).min(count.max(1));
    if jobs <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = Vec::with_capacity(count);
    slots.resize_with(count, || None);
    let mut chunks: Vec<(usize, &mut [Option<T>])> = Vec::with_capacity(jobs);
    let mut rest = slots.as_mut_slice();
    let mut start = 0;
    // Contiguous chunks, as even as possible.
    for w in 0..jobs {
        let size = (count - start).div_ceil(jobs - w);
        let (head, tail) = rest.split_at_mut(size);
        chunks.push((start, head));
        rest = tail;
        start += size;
    }
    std::thread::scope(|scope| {
        for (offset, chunk) in chunks {
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(f(offset + i));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every index computed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_in_index_order_for_any_job_count() {
        let expect: Vec<usize> = (0..37).map(|i| i * i).collect();
        for jobs in [1, 2, 3, 8, 64] {
            let got = run_indexed(37, jobs, |i| i * i);
            assert_eq!(got, expect, "jobs={jobs}");
        }
        assert!(run_indexed(0, 4, |i| i).is_empty());
        assert_eq!(run_indexed(1, 4, |i| i + 10), vec![10]);
    }
}
