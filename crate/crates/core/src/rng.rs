//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit `seed` and
//! positioned on ChaCha stream `stream_id`, so `(seed, stream_id)` pins the
//! draw sequence on every platform. Parallel work derives substreams with
//! [`RandomStream::substream`] instead of sharing a generator.
//!
//! The discrete draw primitives only use integer arithmetic and 53-bit
//! uniforms, so their outputs are bit-identical everywhere. Laplace noise
//! goes through `ln_1p` and inherits the platform's libm.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dist::{CountVector, Letter};

/// A seeded, reproducible source of randomness owned by one worker.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream for work item `index`, independent of this stream's
    /// current position.
    pub fn substream(&self, index: u64) -> Self {
        let id = mix64(self.stream_id ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        Self::new(self.seed, id)
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn next_open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Uniform integer in `0..bound`, by inverse CDF of a 53-bit uniform.
    fn next_index(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let idx = (self.next_unit() * bound as f64) as u64;
        idx.min(bound - 1)
    }

    pub fn draw_uniform_letter(&mut self, k: usize) -> Letter {
        Letter::from_index(self.next_index(k as u64) as usize)
    }

    /// `true` with probability `p`. `p <= 0` never fires, `p >= 1` always does.
    pub fn draw_bernoulli(&mut self, p: f64) -> bool {
        self.next_unit() < p
    }

    /// Letter `x` with probability `counts[x] / n`: a uniform index into the
    /// dataset, resolved against cumulative counts in letter order.
    pub fn draw_from_counts(&mut self, d: &CountVector) -> Letter {
        let target = self.next_index(d.n());
        let mut cum = 0u64;
        for (i, &c) in d.counts().iter().enumerate() {
            cum += c;
            if target < cum {
                return Letter::from_index(i);
            }
        }
        unreachable!("counts sum to n")
    }

    /// Inverse-CDF draw from a probability vector. Rounding slack at the top
    /// of the CDF goes to the last letter with positive mass.
    pub fn draw_from_probs(&mut self, probs: &[f64]) -> Letter {
        let u = self.next_unit();
        let mut cum = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            cum += p;
            if u < cum {
                return Letter::from_index(i);
            }
        }
        let last = probs
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(probs.len() - 1);
        Letter::from_index(last)
    }

    /// Zero-mean Laplace variate with the given scale.
    pub fn draw_laplace(&mut self, scale: f64) -> f64 {
        let v = self.next_open_unit() - 0.5;
        -scale * v.signum() * (-2.0 * v.abs()).ln_1p()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
