//! Deterministic parallel trial runner.
//!
//! Trials are cut into fixed chunks of [`CHUNK_TRIALS`]; chunk `c` draws
//! from `RngStream::new(seed, c)`. Chunk results are merged in chunk
//! order, so the output depends only on `(seed, trials)` and not on the
//! number of workers.

use rayon::prelude::*;

use crate::rng::RngStream;

pub const CHUNK_TRIALS: u64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialPlan {
    pub seed: u64,
    pub trials: u64,
    pub workers: usize,
}

impl TrialPlan {
    pub fn new(seed: u64, trials: u64) -> Self {
        TrialPlan {
            seed,
            trials,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    fn chunks(&self) -> Vec<(u64, u64)> {
        let n = self.trials.div_ceil(CHUNK_TRIALS);
        (0..n)
            .map(|c| (c, CHUNK_TRIALS.min(self.trials - c * CHUNK_TRIALS)))
            .collect()
    }

    /// Runs `trial` once per trial, folding into per-chunk accumulators that are merged in order.
    pub fn run<A, I, T, M>(&self, init: I, trial: T, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync,
        T: Fn(&mut A, &mut RngStream) + Sync,
        M: Fn(&mut A, A),
    {
        let chunk = |&(c, len): &(u64, u64)| {
            let mut rng = RngStream::new(self.seed, c);
            let mut acc = init();
            for _ in 0..len {
                trial(&mut acc, &mut rng);
            }
            acc
        };
        let chunks = self.chunks();
        let parts: Vec<A> = if self.workers <= 1 {
            chunks.iter().map(chunk).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .expect("thread pool");
            pool.install(|| chunks.par_iter().map(chunk).collect())
        };
        let mut total = init();
        for part in parts {
            merge(&mut total, part);
        }
        total
    }

    /// Histogram of an integer-valued sampler.
    pub fn histogram<F>(&self, sample: F) -> Vec<u64>
    where
        F: Fn(&mut RngStream) -> usize + Sync,
    {
        self.run(
            Vec::new,
            |acc: &mut Vec<u64>, rng| {
                let d = sample(rng);
                if acc.len() <= d {
                    acc.resize(d + 1, 0);
                }
                acc[d] += 1;
            },
            add_counts,
        )
    }
}

pub fn add_counts(total: &mut Vec<u64>, part: Vec<u64>) {
    if total.len() < part.len() {
        total.resize(part.len(), 0);
    }
    for (t, x) in total.iter_mut().zip(part) {
        *t += x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_count_does_not_change_results() {
        let plan = TrialPlan::new(11, 50_000);
        let draw = |rng: &mut RngStream| rng.uniform_below(7) as usize;
        let one = plan.histogram(draw);
        let many = plan.with_workers(8).histogram(draw);
        assert_eq!(one, many);
        assert_eq!(one.iter().sum::<u64>(), 50_000);
    }
}
