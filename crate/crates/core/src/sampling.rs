//! Reproducible Monte Carlo plumbing.
//!
//! Every random draw comes from a ChaCha8 stream selected by a [`Substream`]:
//! the user seed picks the key and a 64-bit path picks the stream. Sample
//! loops are cut into fixed-size batches, each batch owning the child stream
//! with its batch index, and batch results are merged in index order. The
//! result for a given `(seed, samples)` is therefore the same for any number
//! of worker threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub type SampleRng = ChaCha8Rng;

/// Samples per batch; part of the reproducibility contract.
pub const BATCH_SIZE: u64 = 4096;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A node in the tree of random streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Substream {
    seed: u64,
    path: u64,
}

impl Substream {
    pub fn new(seed: u64) -> Self {
        Substream { seed, path: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn child(&self, index: u64) -> Self {
        Substream {
            seed: self.seed,
            path: splitmix64(self.path ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }

    pub fn rng(&self) -> SampleRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.path);
        rng
    }
}

/// Result of a stochastic estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(samples)`; zero for exact values.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MCEstimate {
    pub fn exact(value: f64, seed: u64) -> Self {
        MCEstimate {
            value,
            stderr: 0.0,
            samples: 0,
            seed,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        MCEstimate {
            value: self.value * factor,
            stderr: self.stderr * factor.abs(),
            ..self
        }
    }

    /// `|self - other|` measured in combined standard errors of two
    /// independent estimates.
    pub fn z_distance(&self, other: &MCEstimate) -> f64 {
        let diff = (self.value - other.value).abs();
        let sigma = self.stderr.hypot(other.stderr);
        if sigma == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / sigma
        }
    }
}

/// Running mean and sum of squared deviations (Welford / Chan).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    pub fn estimate(&self, seed: u64) -> MCEstimate {
        MCEstimate {
            value: self.mean,
            stderr: self.stderr(),
            samples: self.count,
            seed,
        }
    }
}

/// Splits `samples` into batches of [`BATCH_SIZE`], runs `batch(len, rng)` on
/// each with its own child stream, and returns the results in batch order.
pub fn run_batches<T, F>(samples: u64, stream: Substream, batch: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut SampleRng) -> Result<T> + Sync,
{
    let batches = samples.div_ceil(BATCH_SIZE);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let len = BATCH_SIZE.min(samples - b * BATCH_SIZE);
            batch(len, &mut stream.child(b).rng())
        })
        .collect()
}

/// Calls `draw` until it has accepted `len` samples, passing each accepted
/// value to `sink`. More than ten proposals per requested sample is an
/// [`Error::ResampleCap`].
pub fn accept_loop<V, F, S>(len: u64, rng: &mut SampleRng, mut draw: F, mut sink: S) -> Result<()>
where
    F: FnMut(&mut SampleRng) -> Result<Option<V>>,
    S: FnMut(V),
{
    let mut proposals = 0u64;
    let mut accepted = 0u64;
    while accepted < len {
        proposals += 1;
        if proposals > 10 * len {
            return Err(Error::ResampleCap(format!(
                "{accepted} of {len} samples accepted after {} proposals",
                10 * len
            )));
        }
        if let Some(v) = draw(rng)? {
            sink(v);
            accepted += 1;
        }
    }
    Ok(())
}

/// Draws `samples` values of `K` jointly sampled quantities and returns their
/// moments. `draw` may reject a sample by returning `None`; a batch that needs
/// more than ten proposals per accepted sample fails with
/// [`Error::ResampleCap`].
pub fn sample_moments<const K: usize, F>(
    samples: u64,
    stream: Substream,
    draw: F,
) -> Result<[Moments; K]>
where
    F: Fn(&mut SampleRng) -> Result<Option<[f64; K]>> + Sync,
{
    let per_batch = run_batches(samples, stream, |len, rng| {
        let mut moments = [Moments::default(); K];
        accept_loop(len, rng, &draw, |values: [f64; K]| {
            for (m, v) in moments.iter_mut().zip(values) {
                m.push(v);
            }
        })?;
        Ok(moments)
    })?;
    let mut total = [Moments::default(); K];
    for batch in &per_batch {
        for (t, m) in total.iter_mut().zip(batch) {
            t.merge(m);
        }
    }
    Ok(total)
}

/// Uniform direction on the unit sphere `S^{m-1}` in `R^m`.
pub fn sample_sphere(m: usize, rng: &mut SampleRng) -> Vec<f64> {
    let mut u = vec![0.0; m];
    fill_sphere(&mut u, rng);
    u
}

/// In-place variant of [`sample_sphere`].
pub fn fill_sphere(u: &mut [f64], rng: &mut SampleRng) {
    assert!(!u.is_empty(), "sphere dimension must be at least 1");
    if u.len() == 1 {
        u[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut norm2 = 0.0;
        for x in u.iter_mut() {
            *x = rng.sample(StandardNormal);
            norm2 += *x * *x;
        }
        if norm2 > 1e-300 {
            let inv = 1.0 / norm2.sqrt();
            u.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let s = Substream::new(7);
        let a: Vec<u64> = (0..4)
            .map(|_| 0)
            .scan(s.child(1).rng(), |r, _| Some(r.random()))
            .collect();
        let b: Vec<u64> = (0..4)
            .map(|_| 0)
            .scan(s.child(1).rng(), |r, _| Some(r.random()))
            .collect();
        let c: Vec<u64> = (0..4)
            .map(|_| 0)
            .scan(s.child(2).rng(), |r, _| Some(r.random()))
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(s.child(1).child(2), s.child(2).child(1));
    }

    #[test]
    fn welford_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.5).collect();
        let mut direct = Moments::default();
        xs.iter().for_each(|&x| direct.push(x));
        let mut left = Moments::default();
        let mut right = Moments::default();
        xs[..333].iter().for_each(|&x| left.push(x));
        xs[333..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert_eq!(left.count, direct.count);
        assert!((left.mean - direct.mean).abs() < 1e-12);
        assert!((left.m2 - direct.m2).abs() < 1e-8 * direct.m2);
    }

    #[test]
    fn sphere_samples_are_unit_and_centered() {
        let mut rng = Substream::new(3).rng();
        for _ in 0..100 {
            assert!(matches!(sample_sphere(1, &mut rng)[..], [x] if x == 1.0 || x == -1.0));
        }
        let n = 100_000;
        let mut coords = [Moments::default(); 3];
        for _ in 0..n {
            let u = sample_sphere(3, &mut rng);
            let norm: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for (m, x) in coords.iter_mut().zip(&u) {
                m.push(*x);
            }
        }
        // each coordinate of a uniform point on S^2 has variance 1/3
        let sigma = (1.0f64 / 3.0 / n as f64).sqrt();
        for m in coords {
            assert!(m.mean.abs() < 5.0 * sigma, "mean {}", m.mean);
            assert!((m.variance() - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn pairwise_angles_match_uniform_moments() {
        // for independent uniform u, v on S^{m-1}: E<u,v> = 0, E<u,v>^2 = 1/m
        let mut rng = Substream::new(11).rng();
        let n = 100_000;
        for m in [2usize, 3, 5] {
            let mut dot = Moments::default();
            let mut dot2 = Moments::default();
            for _ in 0..n {
                let u = sample_sphere(m, &mut rng);
                let v = sample_sphere(m, &mut rng);
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                dot.push(d);
                dot2.push(d * d);
            }
            assert!(dot.mean.abs() < 5.0 * dot.stderr());
            assert!((dot2.mean - 1.0 / m as f64).abs() < 5.0 * dot2.stderr());
        }
    }

    #[test]
    fn batched_sampling_is_thread_count_independent() {
        let run = || {
            sample_moments::<1, _>(50_000, Substream::new(5).child(9), |rng| {
                Ok(Some([rng.random::<f64>()]))
            })
            .unwrap()
        };
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
        assert_eq!(a[0].count, 50_000);
        assert!((a[0].mean - 0.5).abs() < 5.0 * a[0].stderr());
    }

    #[test]
    fn resample_cap_is_enforced() {
        let r = sample_moments::<1, _>(100, Substream::new(1), |_| Ok(None));
        assert!(matches!(r, Err(Error::ResampleCap(_))));
    }
}
