//! Deterministic data-parallel batch execution.
//!
//! Work is a flat stream of independent units. [`plan_work`] fixes how many
//! units each worker takes, results land in slots indexed by input position,
//! and no result depends on which worker produced it. Output is therefore
//! bitwise identical for every worker count.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Per-worker share of a flat unit stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkPlan {
    pub total_units: usize,
    pub workers: usize,
    /// Units per worker, `ceil(total_units / workers)` (at least 1).
    pub units_per_worker: usize,
}

impl WorkPlan {
    /// Units assigned to worker `w` under contiguous chunking.
    pub fn assigned(&self, w: usize) -> usize {
        let start = (w * self.units_per_worker).min(self.total_units);
        let end = ((w + 1) * self.units_per_worker).min(self.total_units);
        end - start
    }
}

/// `K = ceil(total_units / workers)`; `workers` is clamped to at least 1.
pub fn plan_work(total_units: usize, workers: usize) -> WorkPlan {
    let workers = workers.max(1);
    let k = total_units.div_ceil(workers).max(1);
    WorkPlan {
        total_units,
        workers,
        units_per_worker: k,
    }
}

/// A fixed-size worker pool.
pub struct Engine {
    pool: ThreadPool,
    workers: usize,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("workers", &self.workers)
            .finish()
    }
}

impl Engine {
    pub fn new(workers: usize) -> Self {
        let workers = workers.max(1);
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("splinemat-worker-{i}"))
            .build()
            .expect("failed to start worker pool");
        Self { pool, workers }
    }

    /// One worker per available hardware thread.
    pub fn with_default_workers() -> Self {
        Self::new(default_workers())
    }

    #[inline]
    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Map `f` over `items`, preserving order. Each item costs `unit_cost`
    /// units when planning chunk sizes.
    pub fn map<T, R, F>(&self, items: &[T], unit_cost: usize, f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync,
    {
        if items.is_empty() {
            return Vec::new();
        }
        if self.workers == 1 {
            return items.iter().map(f).collect();
        }
        let cost = unit_cost.max(1);
        let plan = plan_work(items.len() * cost, self.workers);
        let chunk = plan.units_per_worker.div_ceil(cost).max(1);
        self.pool.install(|| {
            items
                .par_chunks(chunk)
                .flat_map_iter(|c| c.iter().map(&f))
                .collect()
        })
    }

    /// Run `f` inside the pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plan_examples() {
        assert_eq!(plan_work(100, 7).units_per_worker, 15);
        assert_eq!(plan_work(3, 8).units_per_worker, 1);
        assert_eq!(plan_work(8, 8).units_per_worker, 1);
        assert_eq!(plan_work(0, 4).units_per_worker, 1);
    }

    proptest! {
        #[test]
        fn plan_balance(total in 0usize..100_000, workers in 1usize..256) {
            let plan = plan_work(total, workers);
            prop_assert!(plan.units_per_worker * workers >= total);
            let counts: Vec<usize> = (0..workers).map(|w| plan.assigned(w)).collect();
            prop_assert_eq!(counts.iter().sum::<usize>(), total);
            let max = *counts.iter().max().unwrap();
            let min = *counts.iter().min().unwrap();
            prop_assert!(max - min <= plan.units_per_worker);
        }
    }

    #[test]
    fn map_preserves_order_for_any_worker_count() {
        let items: Vec<u64> = (0..1000).collect();
        let expect: Vec<u64> = items.iter().map(|x| x * x + 1).collect();
        for w in [1, 2, 3, 8] {
            let e = Engine::new(w);
            assert_eq!(e.map(&items, 6, |x| x * x + 1), expect);
        }
    }
}
