//! Reproducible random streams.
//!
//! Every run owns one [`RngStream`]. The stream is a ChaCha8 generator; the
//! derived quantities use fixed transforms so that a seed pins every draw:
//!
//! * uniform reals take the top 53 bits of a `u64`: `(u >> 11) * 2^-53`, giving
//!   values in `[0, 1)`;
//! * standard normals use the Box–Muller transform on two uniforms, returning
//!   the cosine branch first and caching the sine branch for the next call.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. A bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for run `run_index` under `master_seed`.
///
/// Injective in `run_index` for a fixed master seed: the index is multiplied
/// by an odd constant (a bijection mod 2^64), xor-ed with the master seed and
/// passed through the SplitMix64 finalizer, each step being a bijection.
pub fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    mix64(master_seed ^ run_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))
}

/// A single-owner, reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A child stream whose seed is drawn from this one.
    pub fn fork(&mut self) -> Self {
        Self::new(self.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform real in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform real in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal_with(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.normal()
    }

    /// Cauchy variate by inversion.
    pub fn cauchy(&mut self, location: f64, scale: f64) -> f64 {
        location + scale * (std::f64::consts::PI * (self.uniform() - 0.5)).tan()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Fisher–Yates shuffle driven by [`RngStream::below`].
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// A random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}
