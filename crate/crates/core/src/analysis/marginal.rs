//! Marginal output law of a mechanism fed with datasets drawn i.i.d. from a
//! distribution: `Q(y) = Σ_d P(d)·P(y | d)`.
//!
//! [`exact_marginal_output`] sums over every count vector. For larger `n`,
//! [`mc_marginal_output`] averages the conditional output vector (not single
//! releases) over sampled datasets. Trials are split into fixed chunks; chunk
//! `i` runs on substream `i` and partial sums are combined in chunk order,
//! so results do not depend on the thread count.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::{enumerate_count_vectors_capped, DEFAULT_ENUMERATION_CAP};
use crate::dist::{tv_slices, CategoricalDistribution, CountVector};
use crate::error::{invalid, Error, Result};
use crate::mechanism::{OutputLaw, RandomizedOutputLaw};
use crate::rng::RandomStream;

/// Trials per Monte Carlo chunk.
pub const MC_CHUNK: u64 = 1024;

/// `ln 0!, ln 1!, …, ln n!`.
fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

fn multinomial_pmf(d: &CountVector, p: &[f64], ln_fact: &[f64]) -> f64 {
    let mut log = ln_fact[d.n() as usize];
    for (&c, &px) in d.counts().iter().zip(p) {
        if c == 0 {
            continue;
        }
        if px == 0.0 {
            return 0.0;
        }
        log += c as f64 * px.ln() - ln_fact[c as usize];
    }
    log.exp()
}

/// Probability of observing count vector `d` when drawing `n` times from `p`.
pub fn multinomial_probability(d: &CountVector, p: &CategoricalDistribution) -> Result<f64> {
    if d.k() != p.k() {
        return Err(Error::DimensionMismatch {
            expected: p.k(),
            found: d.k(),
        });
    }
    Ok(multinomial_pmf(d, p.probs(), &ln_factorials(d.n())))
}

/// Exact marginal output law by enumerating all datasets.
pub fn exact_marginal_output<M: OutputLaw + ?Sized>(
    p: &CategoricalDistribution,
    n: u64,
    mechanism: &M,
) -> Result<CategoricalDistribution> {
    exact_marginal_output_capped(p, n, mechanism, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_marginal_output_capped<M: OutputLaw + ?Sized>(
    p: &CategoricalDistribution,
    n: u64,
    mechanism: &M,
    cap: u128,
) -> Result<CategoricalDistribution> {
    let k = p.k();
    let datasets: Vec<CountVector> = enumerate_count_vectors_capped(n, k, cap)?.collect();
    let ln_fact = ln_factorials(n);
    let terms: Vec<Vec<f64>> = datasets
        .par_iter()
        .map(|d| {
            let w = multinomial_pmf(d, p.probs(), &ln_fact);
            if w == 0.0 {
                return vec![0.0; k];
            }
            mechanism
                .output_law(d)
                .probs()
                .iter()
                .map(|x| w * x)
                .collect()
        })
        .collect();
    let mut q = vec![0.0; k];
    for t in &terms {
        for (acc, x) in q.iter_mut().zip(t) {
            *acc += x;
        }
    }
    Ok(CategoricalDistribution::from_mixture(q))
}

/// Draws a dataset of size `n` from `p` by sequential conditional binomials.
pub fn draw_dataset(p: &CategoricalDistribution, n: u64, rng: &mut RandomStream) -> CountVector {
    let k = p.k();
    let mut counts = vec![0u64; k];
    let mut left = n;
    let mut mass = 1.0f64;
    for (i, &px) in p.probs().iter().enumerate().take(k - 1) {
        if left == 0 {
            break;
        }
        let share = if mass > 0.0 {
            (px / mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let c = if share >= 1.0 {
            left
        } else if share <= 0.0 {
            0
        } else {
            Binomial::new(left, share)
                .expect("valid binomial")
                .sample(rng)
        };
        counts[i] = c;
        left -= c;
        mass -= px;
    }
    counts[k - 1] += left;
    CountVector::from_parts_unchecked(counts, n)
}

/// Monte Carlo estimate of a marginal output law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub distribution: CategoricalDistribution,
    /// Per-letter standard error of the mean.
    pub stderr: Vec<f64>,
    /// `TV(Q̂, p)`.
    pub tv: f64,
    /// Delta-method standard error of `tv`.
    pub tv_stderr: f64,
    pub trials: u64,
}

struct Partial {
    /// Σ (o − p)
    sum: Vec<f64>,
    /// Σ (o − p)(o − p)ᵀ, row-major.
    outer: Vec<f64>,
}

impl Partial {
    fn zeros(k: usize) -> Self {
        Self {
            sum: vec![0.0; k],
            outer: vec![0.0; k * k],
        }
    }

    fn absorb(&mut self, other: &Partial) {
        self.sum
            .iter_mut()
            .zip(&other.sum)
            .for_each(|(a, b)| *a += b);
        self.outer
            .iter_mut()
            .zip(&other.outer)
            .for_each(|(a, b)| *a += b);
    }
}

/// Rao-Blackwellized Monte Carlo estimate of the marginal output law over
/// `trials` datasets drawn from `p`.
pub fn mc_marginal_output<M: RandomizedOutputLaw + ?Sized>(
    p: &CategoricalDistribution,
    n: u64,
    mechanism: &M,
    trials: u64,
    rng: &RandomStream,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let k = p.k();
    let chunks = trials.div_ceil(MC_CHUNK);
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = rng.substream(c);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut part = Partial::zeros(k);
            let mut dev = vec![0.0; k];
            for _ in 0..len {
                let d = draw_dataset(p, n, &mut stream);
                let law = mechanism.randomized_output_law(&d, &mut stream);
                for (y, (o, px)) in law.probs().iter().zip(p.probs()).enumerate() {
                    dev[y] = o - px;
                    part.sum[y] += dev[y];
                }
                for a in 0..k {
                    for b in 0..k {
                        part.outer[a * k + b] += dev[a] * dev[b];
                    }
                }
            }
            part
        })
        .collect();

    let mut total = Partial::zeros(k);
    for part in &partials {
        total.absorb(part);
    }

    let t = trials as f64;
    let mean_dev: Vec<f64> = total.sum.iter().map(|s| s / t).collect();
    let q: Vec<f64> = p
        .probs()
        .iter()
        .zip(&mean_dev)
        .map(|(px, d)| px + d)
        .collect();
    let cov = |a: usize, b: usize| -> f64 {
        if trials < 2 {
            return 0.0;
        }
        (total.outer[a * k + b] - t * mean_dev[a] * mean_dev[b]) / (t - 1.0)
    };
    let stderr: Vec<f64> = (0..k).map(|y| (cov(y, y).max(0.0) / t).sqrt()).collect();
    let grad: Vec<f64> = mean_dev.iter().map(|d| 0.5 * sign(*d)).collect();
    let mut tv_var = 0.0;
    for a in 0..k {
        for b in 0..k {
            tv_var += grad[a] * grad[b] * cov(a, b);
        }
    }
    let distribution = CategoricalDistribution::from_mixture(q);
    let tv = tv_slices(distribution.probs(), p.probs());
    Ok(McEstimate {
        distribution,
        stderr,
        tv,
        tv_stderr: (tv_var.max(0.0) / t).sqrt(),
        trials,
    })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{LaplaceMechanism, LaplaceParams};
    use crate::dist::tv_distance;
    use crate::dsroo::{build_schedule, DsRoo};
    use crate::roo::{roo_marginal_output, roo_q_for_epsilon, Roo};
    use std::sync::Arc;

    #[test]
    fn pmf_sums_to_one() {
        let p = CategoricalDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let ln_fact = ln_factorials(7);
        let total: f64 = enumerate_count_vectors_capped(7, 3, 1000)
            .unwrap()
            .map(|d| multinomial_pmf(&d, p.probs(), &ln_fact))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        let d = CountVector::new(vec![2, 1]).unwrap();
        let p2 = CategoricalDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!((multinomial_probability(&d, &p2).unwrap() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn exact_matches_closed_form_for_fixed_q() {
        let p = CategoricalDistribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        for q in [0.0, 0.3, 1.0] {
            let exact = exact_marginal_output(&p, 6, &Roo { q }).unwrap();
            let closed = roo_marginal_output(&p, q).unwrap();
            for (a, b) in exact.probs().iter().zip(closed.probs()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn uniform_input_gives_uniform_output() {
        let p = CategoricalDistribution::uniform(3).unwrap();
        let s = Arc::new(build_schedule(1.0, 6, 3).unwrap());
        let q = exact_marginal_output(&p, 6, &DsRoo::new(s)).unwrap();
        for x in q.probs() {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn data_specific_beats_fixed_on_small_instance() {
        let p = CategoricalDistribution::new(vec![0.7, 0.3]).unwrap();
        let (eps, n) = (1.0, 6);
        let s = Arc::new(build_schedule(eps, n, 2).unwrap());
        let ds = exact_marginal_output(&p, n, &DsRoo::new(s)).unwrap();
        let fixed = exact_marginal_output(
            &p,
            n,
            &Roo {
                q: roo_q_for_epsilon(eps, n, 2).unwrap(),
            },
        )
        .unwrap();
        let tv_ds = tv_distance(&ds, &p).unwrap();
        let tv_fixed = tv_distance(&fixed, &p).unwrap();
        assert!(tv_ds <= tv_fixed + 1e-12, "{tv_ds} vs {tv_fixed}");
    }

    #[test]
    fn draw_dataset_has_right_size_and_mean() {
        let p = CategoricalDistribution::new(vec![0.25, 0.0, 0.75]).unwrap();
        let mut rng = RandomStream::new(4, 0);
        let mut first = 0u64;
        for _ in 0..2000 {
            let d = draw_dataset(&p, 40, &mut rng);
            assert_eq!(d.n(), 40);
            assert_eq!(d.counts()[1], 0);
            first += d.counts()[0];
        }
        let mean = first as f64 / 2000.0;
        // sd of one count = sqrt(40 * 0.25 * 0.75) ≈ 2.74
        assert!((mean - 10.0).abs() < 4.0 * 2.74 / 2000f64.sqrt());
    }

    #[test]
    fn mc_agrees_with_exact() {
        let p = CategoricalDistribution::new(vec![0.5, 0.2, 0.3]).unwrap();
        let s = Arc::new(build_schedule(0.5, 8, 3).unwrap());
        let mech = DsRoo::new(s);
        let exact = exact_marginal_output(&p, 8, &mech).unwrap();
        let est = mc_marginal_output(&p, 8, &mech, 40_000, &RandomStream::new(10, 0)).unwrap();
        for y in 0..3 {
            let diff = (est.distribution.probs()[y] - exact.probs()[y]).abs();
            assert!(
                diff < 4.0 * est.stderr[y],
                "letter {y}: {diff} vs {}",
                est.stderr[y]
            );
        }
    }

    #[test]
    fn mc_is_reproducible_and_thread_independent() {
        let p = CategoricalDistribution::binomial_shape(5).unwrap();
        let mech = LaplaceMechanism {
            params: LaplaceParams::calibrated(0.5, 50).unwrap(),
        };
        let rng = RandomStream::new(99, 0);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_marginal_output(&p, 50, &mech, 5000, &rng).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn mc_rejects_zero_trials() {
        let p = CategoricalDistribution::uniform(2).unwrap();
        assert!(mc_marginal_output(&p, 5, &Roo { q: 0.5 }, 0, &RandomStream::new(0, 0)).is_err());
    }
}
