//! Reveal-or-obscure with a fixed obscuring probability.
//!
//! With probability `q` the release is a uniform letter; otherwise it is a
//! uniformly chosen entry of the dataset. The output law is
//! `q/k + (1 − q)·P̂(y)`, and the worst-case likelihood ratio between
//! neighbouring datasets is `1 + k(1 − q)/(nq)`, reached when the smaller
//! side has a zero count.

use serde::Serialize;

use crate::dist::{CategoricalDistribution, CountVector, Letter};
use crate::error::{invalid, Error, Result};
use crate::mechanism::{obscured_empirical, reveal_or_obscure, OutputLaw, Sampler};
use crate::rng::RandomStream;

/// Parameters of a fixed-`q` reveal-or-obscure mechanism.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RooParams {
    q: f64,
    k: usize,
    n: u64,
}

impl RooParams {
    pub fn new(q: f64, k: usize, n: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid(format!("q must lie in [0, 1], got {q}")));
        }
        if k < 2 {
            return Err(invalid(format!("k must be at least 2, got {k}")));
        }
        if n < 1 {
            return Err(invalid("n must be at least 1"));
        }
        Ok(Self { q, k, n })
    }

    /// Parameters achieving exactly `epsilon`.
    pub fn for_epsilon(epsilon: f64, n: u64, k: usize) -> Result<Self> {
        Self::new(roo_q_for_epsilon(epsilon, n, k)?, k, n)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn epsilon(&self) -> Result<f64> {
        roo_epsilon(self.q, self.n, self.k)
    }

    pub fn accuracy(&self) -> f64 {
        roo_accuracy(self.q, self.k)
    }

    fn check(&self, d: &CountVector) -> Result<()> {
        if d.k() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: d.k(),
            });
        }
        if d.n() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: d.n(),
            });
        }
        Ok(())
    }
}

/// The fixed-`q` mechanism as an analysable object. Works for any `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Roo {
    pub q: f64,
}

impl OutputLaw for Roo {
    fn name(&self) -> &str {
        "roo"
    }

    fn output_law(&self, d: &CountVector) -> CategoricalDistribution {
        obscured_empirical(d, self.q)
    }
}

impl Sampler for RooParams {
    fn sample(&self, d: &CountVector, rng: &mut RandomStream) -> Result<Letter> {
        self.check(d)?;
        Ok(reveal_or_obscure(d, self.q, rng))
    }
}

/// Releases one letter from `d`.
pub fn roo_sample(d: &CountVector, q: f64, rng: &mut RandomStream) -> Result<Letter> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("q must lie in [0, 1], got {q}")));
    }
    Ok(reveal_or_obscure(d, q, rng))
}

/// Exact law `q/k + (1 − q)·P̂`.
pub fn roo_conditional_output(d: &CountVector, q: f64) -> Result<CategoricalDistribution> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("q must lie in [0, 1], got {q}")));
    }
    Ok(obscured_empirical(d, q))
}

/// `ε = ln(1 + k(1 − q)/(nq))`.
pub fn roo_epsilon(q: f64, n: u64, k: usize) -> Result<f64> {
    if q == 0.0 {
        return Err(Error::NoFinitePrivacy);
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("q must lie in (0, 1], got {q}")));
    }
    Ok((k as f64 * (1.0 - q) / (n as f64 * q)).ln_1p())
}

/// Inverse of [`roo_epsilon`]: `q = 1/(1 + (n/k)(e^ε − 1))`, rounded up by
/// as many ulps as it takes for the largest likelihood ratio of the
/// released law, evaluated in `f64`, to stay within `e^ε`.
pub fn roo_q_for_epsilon(epsilon: f64, n: u64, k: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let bound = epsilon.exp();
    let mut q = 1.0 / (1.0 + (n as f64 / k as f64) * epsilon.exp_m1());
    while q < 1.0 && worst_ratio(q, n, k) > bound {
        q = q.next_up();
    }
    Ok(q)
}

/// `P(y | one copy of y) / P(y | no copy of y)` computed the way
/// [`roo_conditional_output`] evaluates each entry.
fn worst_ratio(q: f64, n: u64, k: usize) -> f64 {
    let floor = q / k as f64;
    (floor + (1.0 - q) * (1.0 / n as f64)) / floor
}

/// Worst-case accuracy `α = q(1 − 1/k)`.
pub fn roo_accuracy(q: f64, k: usize) -> f64 {
    q * (1.0 - 1.0 / k as f64)
}

pub(crate) fn check_alpha_range(k: usize, alpha: f64) -> Result<()> {
    if k < 2 {
        return Err(invalid(format!("k must be at least 2, got {k}")));
    }
    let hi = 1.0 - 1.0 / k as f64;
    if !(alpha > 0.0 && alpha < hi) {
        return Err(invalid(format!(
            "alpha must lie in (0, {hi}) for k={k}, got {alpha}"
        )));
    }
    Ok(())
}

/// Real-valued dataset size `n = (k(1 − α) − 1)/(α(e^ε − 1))` at which the
/// mechanism is both ε-DP and α-accurate.
pub fn roo_sampling_complexity(k: usize, alpha: f64, epsilon: f64) -> Result<f64> {
    check_alpha_range(k, alpha)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let k = k as f64;
    Ok((k * (1.0 - alpha) - 1.0) / (alpha * epsilon.exp_m1()))
}

/// Smallest integer dataset size meeting (k, α, ε).
pub fn roo_required_samples(k: usize, alpha: f64, epsilon: f64) -> Result<u64> {
    Ok(roo_sampling_complexity(k, alpha, epsilon)?.ceil() as u64)
}

/// Marginal output law over datasets drawn i.i.d. from `p`:
/// `Q(y) = q/k + (1 − q)·p(y)`.
pub fn roo_marginal_output(p: &CategoricalDistribution, q: f64) -> Result<CategoricalDistribution> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("q must lie in [0, 1], got {q}")));
    }
    let floor = q / p.k() as f64;
    Ok(CategoricalDistribution::from_mixture(
        p.probs().iter().map(|&x| floor + (1.0 - q) * x).collect(),
    ))
}
