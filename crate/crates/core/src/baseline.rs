//! Comparators: the Laplace-noise sampler and the analytic sampling
//! complexities of the noise-based and subsampled-randomized-response
//! approaches.

use serde::Serialize;

use crate::dist::{CategoricalDistribution, CountVector, Letter};
use crate::error::{invalid, Result};
use crate::mechanism::{RandomizedOutputLaw, Sampler};
use crate::rng::RandomStream;
use crate::roo::{check_alpha_range, roo_sampling_complexity};

/// Noise scale applied to each coordinate of the empirical distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaplaceParams {
    scale: f64,
    epsilon: f64,
}

impl LaplaceParams {
    pub fn new(scale: f64, epsilon: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!(
                "Laplace scale must be positive, got {scale}"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { scale, epsilon })
    }

    /// `scale = 2/(nε)`: the empirical distribution moves by at most `2/n`
    /// in L1 between neighbours.
    pub fn calibrated(epsilon: f64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        Self::new(2.0 / (n as f64 * epsilon), epsilon)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Clips negative entries to zero, then returns the Euclidean projection of
/// the result onto the probability simplex (water-filling: a common shift
/// over the surviving coordinates). An all-zero input maps to uniform.
pub fn project_to_simplex(values: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let k = clipped.len();
    let mut sorted = clipped.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut shift = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cum += v;
        let candidate = (cum - 1.0) / (i + 1) as f64;
        if v - candidate > 0.0 {
            shift = candidate;
        } else {
            break;
        }
    }
    let mut out: Vec<f64> = clipped.iter().map(|&v| (v - shift).max(0.0)).collect();
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|v| *v /= total);
    } else {
        out = vec![1.0 / k as f64; k];
    }
    out
}

/// One draw of the noised-and-projected distribution `P̃`.
pub fn laplace_noisy_distribution(
    d: &CountVector,
    params: &LaplaceParams,
    rng: &mut RandomStream,
) -> CategoricalDistribution {
    let n = d.n() as f64;
    let noisy: Vec<f64> = d
        .counts()
        .iter()
        .map(|&c| c as f64 / n + rng.draw_laplace(params.scale))
        .collect();
    CategoricalDistribution::from_mixture(project_to_simplex(&noisy))
}

/// Noise the empirical distribution, project, and sample from the result.
pub fn laplace_sample(d: &CountVector, params: &LaplaceParams, rng: &mut RandomStream) -> Letter {
    let p = laplace_noisy_distribution(d, params, rng);
    rng.draw_from_probs(p.probs())
}

/// The Laplace sampler as a mechanism. Its output law given a dataset is
/// random (it depends on the noise), so it only supports Monte Carlo.
#[derive(Clone, Copy, Debug)]
pub struct LaplaceMechanism {
    pub params: LaplaceParams,
}

impl RandomizedOutputLaw for LaplaceMechanism {
    fn name(&self) -> &str {
        "laplace"
    }

    fn randomized_output_law(
        &self,
        d: &CountVector,
        rng: &mut RandomStream,
    ) -> CategoricalDistribution {
        laplace_noisy_distribution(d, &self.params, rng)
    }
}

impl Sampler for LaplaceMechanism {
    fn sample(&self, d: &CountVector, rng: &mut RandomStream) -> Result<Letter> {
        Ok(laplace_sample(d, &self.params, rng))
    }
}

/// Analytic accuracy of the Laplace sampler. Values above one carry no
/// information but are kept for plotting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BaselineAccuracy {
    pub alpha: f64,
    pub vacuous: bool,
}

/// `α = 2k/(nε)`.
pub fn baseline_accuracy(k: usize, n: u64, epsilon: f64) -> Result<BaselineAccuracy> {
    if k == 0 || n == 0 || epsilon.is_nan() || epsilon <= 0.0 {
        return Err(invalid("k, n and epsilon must be positive"));
    }
    let alpha = 2.0 * k as f64 / (n as f64 * epsilon);
    Ok(BaselineAccuracy {
        alpha,
        vacuous: alpha > 1.0,
    })
}

/// `n′ = 2k/(αε)`.
pub fn baseline_sampling_complexity(k: usize, alpha: f64, epsilon: f64) -> Result<f64> {
    if k == 0 || alpha.is_nan() || alpha <= 0.0 || epsilon.is_nan() || epsilon <= 0.0 {
        return Err(invalid("k, alpha and epsilon must be positive"));
    }
    Ok(2.0 * k as f64 / (alpha * epsilon))
}

/// `(k − 1)(1 − α)/(αε)`, never more than `k/(αε)`.
pub fn subrr_sampling_complexity(k: usize, alpha: f64, epsilon: f64) -> Result<f64> {
    if k < 2 {
        return Err(invalid(format!("k must be at least 2, got {k}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(invalid("epsilon must be positive"));
    }
    Ok((k - 1) as f64 * (1.0 - alpha) / (alpha * epsilon))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexityComparison {
    pub k: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub n_roo: f64,
    pub n_subrr: f64,
    pub n_baseline: f64,
    /// `n_roo < n_subrr <= n_baseline`.
    pub ordering_ok: bool,
}

/// Dataset sizes each approach needs for the same `(k, α, ε)`.
pub fn complexity_comparison(k: usize, alpha: f64, epsilon: f64) -> Result<ComplexityComparison> {
    check_alpha_range(k, alpha)?;
    let n_roo = roo_sampling_complexity(k, alpha, epsilon)?;
    let n_subrr = subrr_sampling_complexity(k, alpha, epsilon)?;
    let n_baseline = baseline_sampling_complexity(k, alpha, epsilon)?;
    Ok(ComplexityComparison {
        k,
        alpha,
        epsilon,
        n_roo,
        n_subrr,
        n_baseline,
        ordering_ok: n_roo < n_subrr && n_subrr <= n_baseline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn accuracy_examples() {
        let a = baseline_accuracy(10, 200, 1.0).unwrap();
        assert_abs_diff_eq!(a.alpha, 0.1, epsilon = 1e-15);
        assert!(!a.vacuous);
        let half = baseline_accuracy(10, 400, 1.0).unwrap();
        assert_abs_diff_eq!(half.alpha, a.alpha / 2.0, epsilon = 1e-15);
        let a = baseline_accuracy(9, 1000, 0.1).unwrap();
        assert_abs_diff_eq!(a.alpha, 0.18, epsilon = 1e-15);
        let v = baseline_accuracy(9, 100, 0.1).unwrap();
        assert_abs_diff_eq!(v.alpha, 1.8, epsilon = 1e-15);
        assert!(v.vacuous);
    }

    #[test]
    fn complexity_examples() {
        assert_abs_diff_eq!(
            baseline_sampling_complexity(10, 0.1, 1.0).unwrap(),
            200.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            baseline_sampling_complexity(10, 0.1, 2.0).unwrap(),
            100.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            baseline_sampling_complexity(9, 0.05, 0.5).unwrap(),
            720.0,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            subrr_sampling_complexity(10, 0.1, 1.0).unwrap(),
            81.0,
            epsilon = 1e-12
        );
        assert!(subrr_sampling_complexity(10, 1.0 - 1e-12, 1.0).unwrap() < 1e-10);
    }

    #[test]
    fn comparison_examples() {
        let c = complexity_comparison(10, 0.1, 1.0).unwrap();
        assert_relative_eq!(
            c.n_roo,
            8.0 / (0.1 * (1f64.exp() - 1.0)),
            max_relative = 1e-12
        );
        assert_relative_eq!(c.n_subrr, 81.0, max_relative = 1e-12);
        assert_relative_eq!(c.n_baseline, 200.0, max_relative = 1e-12);
        assert!(c.ordering_ok);

        let c = complexity_comparison(10, 0.1, 10.0).unwrap();
        assert_relative_eq!(c.n_roo, 8.0 / (0.1 * 10f64.exp_m1()), max_relative = 1e-12);
        assert_abs_diff_eq!(c.n_roo, 0.00363, epsilon = 1e-5);
        assert_relative_eq!(c.n_baseline, 20.0, max_relative = 1e-12);

        let c = complexity_comparison(2, 0.4, 0.5).unwrap();
        assert_abs_diff_eq!(c.n_roo, 0.2 / (0.4 * 0.5f64.exp_m1()), epsilon = 1e-12);
        assert_abs_diff_eq!(c.n_roo, 0.7707, epsilon = 1e-4);
        assert_abs_diff_eq!(c.n_subrr, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.n_baseline, 20.0, epsilon = 1e-12);

        assert!(complexity_comparison(10, 0.95, 1.0).is_err());
    }

    #[test]
    fn projection_basics() {
        assert_eq!(project_to_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        let p = project_to_simplex(&[-0.5, 0.8, 0.9]);
        assert_abs_diff_eq!(p[0], 0.0);
        assert_abs_diff_eq!(p[1], 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.55, epsilon = 1e-15);
        // deficit: clipped coordinates share the missing mass
        let p = project_to_simplex(&[-0.5, 0.2, 0.3]);
        assert_abs_diff_eq!(p[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.2 + 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(project_to_simplex(&[-1.0, -2.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn vanishing_noise_reveals_degenerate_data() {
        let d = CountVector::new(vec![4, 0]).unwrap();
        let params = LaplaceParams::new(1e-9, 1.0).unwrap();
        let mut rng = RandomStream::new(8, 0);
        for _ in 0..10_000 {
            assert_eq!(laplace_sample(&d, &params, &mut rng).get(), 1);
        }
    }

    #[test]
    fn balanced_data_is_fair() {
        let d = CountVector::new(vec![2, 2]).unwrap();
        let params = LaplaceParams::calibrated(0.5, 4).unwrap();
        let mut rng = RandomStream::new(13, 0);
        let trials = 200_000;
        let ones = (0..trials)
            .filter(|_| laplace_sample(&d, &params, &mut rng).get() == 1)
            .count();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 4.0 * (0.25f64 / trials as f64).sqrt());
    }
}
