//! Alphabets, datasets and distributions.
//!
//! Letters are `1..=k`. Datasets are stored as per-letter counts, which are
//! a sufficient statistic for every mechanism in this crate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on the total mass of a [`CategoricalDistribution`].
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A letter of the alphabet `[1..k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(usize);

impl Letter {
    /// Wraps a 1-based letter. Panics on 0.
    pub fn new(letter: usize) -> Self {
        assert!(letter >= 1, "letters are 1-based");
        Letter(letter)
    }

    pub fn from_index(index: usize) -> Self {
        Letter(index + 1)
    }

    /// 1-based value.
    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based position.
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn check_alphabet(k: usize) -> Result<()> {
    if k < 2 {
        return Err(invalid(format!(
            "alphabet size k must be at least 2, got {k}"
        )));
    }
    Ok(())
}

/// A probability vector over `[1..k]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoricalDistribution {
    probs: Vec<f64>,
}

impl CategoricalDistribution {
    /// Validates `probs`: at least two entries, each in `[0, 1]`, summing to
    /// one within [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_alphabet(probs.len())?;
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidDistribution(format!(
                "entry {p} outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Uniform distribution on `[1..k]`.
    pub fn uniform(k: usize) -> Result<Self> {
        check_alphabet(k)?;
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
        })
    }

    /// All mass on `letter`.
    pub fn point_mass(k: usize, letter: Letter) -> Result<Self> {
        check_alphabet(k)?;
        if letter.get() > k {
            return Err(invalid(format!("letter {letter} outside [1..{k}]")));
        }
        let mut probs = vec![0.0; k];
        probs[letter.index()] = 1.0;
        Ok(Self { probs })
    }

    /// Binomial(k - 1, 1/2) shape on `[1..k]`, symmetric and peaked in the
    /// middle. This is the reference input of the accuracy experiments.
    pub fn binomial_shape(k: usize) -> Result<Self> {
        check_alphabet(k)?;
        let trials = (k - 1) as i32;
        let mut coeff = 1.0f64;
        let mut probs = Vec::with_capacity(k);
        for i in 0..k {
            probs.push(coeff / 2f64.powi(trials));
            coeff = coeff * (trials - i as i32) as f64 / (i + 1) as f64;
        }
        Self::new(probs)
    }

    /// Builder for vectors known to be valid up to rounding (mixtures of
    /// valid distributions).
    pub(crate) fn from_mixture(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self {
            probs: probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, letter: Letter) -> f64 {
        self.probs[letter.index()]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// A dataset of `n` observations over `[1..k]`, kept as per-letter counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CountVector {
    counts: Vec<u64>,
    #[serde(skip)]
    n: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "alphabet size k must be at least 2, got {}",
                counts.len()
            )));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidDataset("dataset is empty".into()));
        }
        Ok(Self { counts, n })
    }

    /// Tallies raw observations (1-based letters) into counts.
    pub fn from_observations(k: usize, observations: &[usize]) -> Result<Self> {
        check_alphabet(k)?;
        let mut counts = vec![0u64; k];
        for &x in observations {
            if x == 0 || x > k {
                return Err(Error::InvalidDataset(format!(
                    "observation {x} outside [1..{k}]"
                )));
            }
            counts[x - 1] += 1;
        }
        Self::new(counts)
    }

    pub(crate) fn from_parts_unchecked(counts: Vec<u64>, n: u64) -> Self {
        debug_assert_eq!(counts.iter().sum::<u64>(), n);
        Self { counts, n }
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, letter: Letter) -> u64 {
        self.counts[letter.index()]
    }

    /// Smallest per-letter count, `m = n * min_x P̂(x)`. Always `<= n / k`.
    pub fn min_count(&self) -> u64 {
        *self.counts.iter().min().expect("k >= 2")
    }

    /// Empirical distribution `counts[x] / n`.
    pub fn empirical_distribution(&self) -> CategoricalDistribution {
        empirical_distribution(self)
    }
}

impl fmt::Display for CountVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `P̂(x) = counts[x] / n`.
pub fn empirical_distribution(d: &CountVector) -> CategoricalDistribution {
    let n = d.n() as f64;
    CategoricalDistribution {
        probs: d.counts().iter().map(|&c| c as f64 / n).collect(),
    }
}

/// Smallest per-letter count of `d`.
pub fn min_count(d: &CountVector) -> u64 {
    d.min_count()
}

/// Total variation distance `½ Σ |p(x) − q(x)|`.
pub fn tv_distance(p: &CategoricalDistribution, q: &CategoricalDistribution) -> Result<f64> {
    if p.k() != q.k() {
        return Err(Error::DimensionMismatch {
            expected: p.k(),
            found: q.k(),
        });
    }
    Ok(tv_slices(p.probs(), q.probs()))
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    (0.5 * s).min(1.0)
}

/// Privacy parameter plus the relative slack used when comparing likelihood
/// ratios against `e^ε` in floating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    ratio_tolerance: f64,
}

impl PrivacyBudget {
    pub const DEFAULT_RATIO_TOLERANCE: f64 = 1e-9;

    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_tolerance(epsilon, Self::DEFAULT_RATIO_TOLERANCE)
    }

    pub fn with_tolerance(epsilon: f64, ratio_tolerance: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if !(ratio_tolerance >= 0.0 && ratio_tolerance.is_finite()) {
            return Err(invalid(format!(
                "ratio tolerance must be non-negative, got {ratio_tolerance}"
            )));
        }
        Ok(Self {
            epsilon,
            ratio_tolerance,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn ratio_tolerance(&self) -> f64 {
        self.ratio_tolerance
    }

    /// `e^ε`.
    pub fn ratio_bound(&self) -> f64 {
        self.epsilon.exp()
    }
}
