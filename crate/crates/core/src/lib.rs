//! Differentially private release of a single sample from a discrete
//! dataset.
//!
//! A dataset of `n` observations over the alphabet `[1..k]` is summarised by
//! its per-letter [`CountVector`]. The crate provides:
//!
//! * [`roo`]: reveal-or-obscure. With probability `q` release a uniform
//!   letter, otherwise a uniformly chosen entry of the dataset. Closed forms
//!   for its privacy level, accuracy and sampling complexity.
//! * [`dsroo`]: the data-specific variant whose obscuring probability
//!   depends on the smallest letter count, with a constraint checker for
//!   its schedule.
//! * [`baseline`]: a Laplace-noise sampler and analytic comparators.
//! * [`analysis`]: an exhaustive likelihood-ratio auditor over all
//!   neighbouring datasets, exact and Monte Carlo marginal output laws, and
//!   accuracy sweeps.
//!
//! ```
//! use dpsampler::{roo, CountVector, RandomStream};
//!
//! let data = CountVector::new(vec![12, 3, 0, 5])?;
//! let q = roo::roo_q_for_epsilon(1.0, data.n(), data.k())?;
//! let mut rng = RandomStream::new(7, 0);
//! let letter = roo::roo_sample(&data, q, &mut rng)?;
//! assert!((1..=4).contains(&letter.get()));
//! # Ok::<(), dpsampler::Error>(())
//! ```
//!
//! All randomness flows through [`RandomStream`] (ChaCha8 keyed by a seed and
//! a stream id), so every run is reproducible.

pub mod analysis;
pub mod baseline;
pub mod dist;
pub mod dsroo;
mod error;
pub mod io;
pub mod mechanism;
pub mod parallel;
pub mod rng;
pub mod roo;

pub use dist::{
    empirical_distribution, min_count, tv_distance, CategoricalDistribution, CountVector, Letter,
    PrivacyBudget,
};
pub use error::{Error, Result};
pub use mechanism::{OutputLaw, RandomizedOutputLaw, Sampler};
pub use rng::RandomStream;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The guide under `book/`, compiled so its snippets stay in sync.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/data-model.md")]
    pub mod data_model {}
    #[doc = include_str!("../../../book/src/reveal-or-obscure.md")]
    pub mod reveal_or_obscure {}
    #[doc = include_str!("../../../book/src/data-specific.md")]
    pub mod data_specific {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    pub mod baselines {}
    #[doc = include_str!("../../../book/src/auditing.md")]
    pub mod auditing {}
    #[doc = include_str!("../../../book/src/utility.md")]
    pub mod utility {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
