//! Deterministic parallel Monte Carlo plumbing.
//!
//! Trials are grouped into fixed-size chunks. Each chunk is accumulated
//! sequentially and chunk results are merged in index order, so the floating
//! point result is identical for every thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::qubit::DensityMatrix2;
use crate::C64;

/// Trials per chunk. Part of the reproducibility contract: changing it
/// changes the rounding of merged means.
pub const CHUNK: u64 = 4096;

/// Runs `trials` trials in parallel and merges the per-chunk accumulators in
/// order. `body` receives the global trial index, which callers turn into a
/// random stream with [`crate::rng::derive_stream`].
pub fn par_trials<A, I, F, M>(trials: u64, init: I, body: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(u64, &mut A) + Sync,
    M: Fn(&mut A, A),
{
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let end = ((c + 1) * CHUNK).min(trials);
            for t in c * CHUNK..end {
                body(t, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

/// Welford running mean and variance with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: RunningMoments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Entrywise moments of sampled density matrices.
#[derive(Debug, Clone, Copy, Default)]
pub struct StateMoments {
    pub a: RunningMoments,
    pub b_re: RunningMoments,
    pub b_im: RunningMoments,
    pub c: RunningMoments,
}

impl StateMoments {
    pub fn push(&mut self, rho: &DensityMatrix2) {
        self.a.push(rho.a());
        self.b_re.push(rho.b().re);
        self.b_im.push(rho.b().im);
        self.c.push(rho.c());
    }

    pub fn merge(&mut self, other: StateMoments) {
        self.a.merge(other.a);
        self.b_re.merge(other.b_re);
        self.b_im.merge(other.b_im);
        self.c.merge(other.c);
    }

    pub fn into_estimate(self) -> StateEstimate {
        let b = C64::new(self.b_re.mean(), self.b_im.mean());
        StateEstimate {
            rho: DensityMatrix2::from_parts_unchecked(self.a.mean(), b, self.c.mean()),
            stderr: self.b_re.stderr().max(self.b_im.stderr()),
            stderr_population: self.a.stderr().max(self.c.stderr()),
            trials: self.a.count(),
        }
    }
}

/// Per-step variant of [`par_trials`] for state trajectories. `run(t, record)`
/// must call `record` once for the initial state and once after each of the
/// `steps` steps; entry `k` of the result averages the `k`-th records.
pub fn state_curve<F>(trials: u64, steps: usize, run: F) -> Vec<StateEstimate>
where
    F: Fn(u64, &mut dyn FnMut(&DensityMatrix2)) + Sync,
{
    let curve = par_trials(
        trials,
        || vec![StateMoments::default(); steps + 1],
        |t, acc| {
            let mut k = 0;
            run(t, &mut |rho| {
                acc[k].push(rho);
                k += 1;
            });
            debug_assert_eq!(k, steps + 1);
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y)),
    );
    curve.into_iter().map(StateMoments::into_estimate).collect()
}

/// Monte Carlo estimate of an averaged density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateEstimate {
    pub rho: DensityMatrix2,
    /// Larger of the standard errors of Re(b) and Im(b).
    pub stderr: f64,
    /// Larger of the standard errors of the two populations.
    pub stderr_population: f64,
    pub trials: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_samples_have_exact_mean_and_zero_error() {
        let mut m = RunningMoments::default();
        for _ in 0..100_000 {
            m.push(0.1);
        }
        assert_eq!(m.mean(), 0.1);
        assert_eq!(m.stderr(), 0.0);
    }

    #[test]
    fn chunked_sum_is_thread_count_invariant() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    par_trials(
                        50_000,
                        RunningMoments::default,
                        |t, acc| acc.push(((t * 7919) % 1013) as f64 / 1013.0),
                        |a, b| a.merge(b),
                    )
                })
        };
        let one = run(1);
        let eight = run(8);
        assert_eq!(one.mean().to_bits(), eight.mean().to_bits());
        assert_eq!(one.m2.to_bits(), eight.m2.to_bits());
    }

    proptest! {
        #[test]
        fn merge_matches_sequential(xs in prop::collection::vec(-10.0f64..10.0, 2..200), split in 0usize..200) {
            let split = split.min(xs.len());
            let mut whole = RunningMoments::default();
            xs.iter().for_each(|&x| whole.push(x));
            let (mut l, mut r) = (RunningMoments::default(), RunningMoments::default());
            xs[..split].iter().for_each(|&x| l.push(x));
            xs[split..].iter().for_each(|&x| r.push(x));
            l.merge(r);
            prop_assert!((l.mean() - whole.mean()).abs() < 1e-10);
            prop_assert!((l.variance() - whole.variance()).abs() < 1e-8);
        }
    }
}
