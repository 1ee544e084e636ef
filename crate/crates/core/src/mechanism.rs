//! What the analysis tools need from a mechanism.

use crate::dist::{CategoricalDistribution, CountVector, Letter};
use crate::rng::RandomStream;

/// A mechanism whose output law given a dataset is known exactly.
///
/// This is what the privacy auditor and exact marginal computation consume.
/// Implementations must be pure.
pub trait OutputLaw: Sync {
    /// Short tag used in reports (`"roo"`, `"dsroo"`, ...).
    fn name(&self) -> &str;

    /// `P(Y = · | x^n)`.
    fn output_law(&self, d: &CountVector) -> CategoricalDistribution;
}

/// A mechanism whose output law given a dataset is itself random.
///
/// Monte Carlo estimators average `randomized_output_law` over datasets and
/// internal coins; for exact mechanisms it ignores the stream.
pub trait RandomizedOutputLaw: Sync {
    fn name(&self) -> &str;

    /// One draw of the conditional output vector.
    fn randomized_output_law(
        &self,
        d: &CountVector,
        rng: &mut RandomStream,
    ) -> CategoricalDistribution;
}

impl<T: OutputLaw> RandomizedOutputLaw for T {
    fn name(&self) -> &str {
        OutputLaw::name(self)
    }

    fn randomized_output_law(
        &self,
        d: &CountVector,
        _rng: &mut RandomStream,
    ) -> CategoricalDistribution {
        self.output_law(d)
    }
}

/// Releases a single letter.
pub trait Sampler {
    fn sample(&self, d: &CountVector, rng: &mut RandomStream) -> crate::Result<Letter>;
}

/// Mixture `q/k + (1 − q)·P̂`, the output law of both reveal-or-obscure
/// variants.
pub(crate) fn obscured_empirical(d: &CountVector, q: f64) -> CategoricalDistribution {
    let k = d.k() as f64;
    let n = d.n() as f64;
    let floor = q / k;
    let reveal = 1.0 - q;
    CategoricalDistribution::from_mixture(
        d.counts()
            .iter()
            .map(|&c| floor + reveal * (c as f64 / n))
            .collect(),
    )
}

/// Obscure with probability `q`, otherwise reveal a uniformly chosen entry.
pub(crate) fn reveal_or_obscure(d: &CountVector, q: f64, rng: &mut RandomStream) -> Letter {
    if rng.draw_bernoulli(q) {
        rng.draw_uniform_letter(d.k())
    } else {
        rng.draw_from_counts(d)
    }
}
