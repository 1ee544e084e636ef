//! Accuracy-versus-privacy sweeps.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::enumerate::composition_count;
use super::marginal::{exact_marginal_output, mc_marginal_output};
use crate::baseline::{baseline_accuracy, LaplaceMechanism, LaplaceParams};
use crate::dist::{tv_distance, CategoricalDistribution};
use crate::dsroo::{DsRoo, ScheduleCache};
use crate::error::{invalid, Error, Result};
use crate::io::fmt_lossless;
use crate::rng::RandomStream;
use crate::roo::{roo_accuracy, roo_q_for_epsilon, Roo};

/// Largest number of datasets for which sweeps enumerate exactly.
pub const EXACT_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Roo,
    Dsroo,
    Laplace,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 3] = [Self::Roo, Self::Dsroo, Self::Laplace];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Roo => "roo",
            Self::Dsroo => "dsroo",
            Self::Laplace => "laplace",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "roo" => Ok(Self::Roo),
            "dsroo" | "ds-roo" => Ok(Self::Dsroo),
            "laplace" => Ok(Self::Laplace),
            other => Err(invalid(format!(
                "unknown mechanism `{other}` (expected roo, dsroo or laplace)"
            ))),
        }
    }
}

/// Measured utility of one mechanism at one privacy level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyPoint {
    pub epsilon: f64,
    pub mechanism: MechanismKind,
    /// `TV(Q, p)`.
    pub tv: f64,
    /// Zero for exact computation.
    pub tv_stderr: f64,
    /// Worst-case analytic accuracy where one exists.
    pub analytic_alpha: Option<f64>,
    /// Monte Carlo datasets; zero for exact computation.
    pub trials: u64,
}

/// Measures `TV(Q, p)` for every `(ε, mechanism)` pair.
///
/// Exact enumeration is used when there are at most [`EXACT_LIMIT`]
/// datasets and the mechanism's conditional law is deterministic;
/// otherwise `trials` Monte Carlo datasets are drawn on substream
/// `i·|mechanisms| + j` of `rng`.
pub fn accuracy_sweep(
    p: &CategoricalDistribution,
    n: u64,
    epsilons: &[f64],
    mechanisms: &[MechanismKind],
    trials: u64,
    rng: &RandomStream,
) -> Result<Vec<AccuracyPoint>> {
    let k = p.k();
    let exact_ok = composition_count(n, k) <= EXACT_LIMIT;
    let cache = ScheduleCache::new();
    let mut points = Vec::with_capacity(epsilons.len() * mechanisms.len());
    for (i, &eps) in epsilons.iter().enumerate() {
        for (j, &kind) in mechanisms.iter().enumerate() {
            let stream = rng.substream((i * mechanisms.len() + j) as u64);
            let (measured, analytic) = match kind {
                MechanismKind::Roo => {
                    let q = roo_q_for_epsilon(eps, n, k)?;
                    let mech = Roo { q };
                    let m = if exact_ok {
                        exact(p, n, &mech)?
                    } else {
                        monte_carlo(p, n, &mech, trials, &stream)?
                    };
                    (m, Some(roo_accuracy(q, k)))
                }
                MechanismKind::Dsroo => {
                    let mech = DsRoo::new(Arc::clone(&cache.get(eps, n, k)?));
                    let m = if exact_ok {
                        exact(p, n, &mech)?
                    } else {
                        monte_carlo(p, n, &mech, trials, &stream)?
                    };
                    (m, None)
                }
                MechanismKind::Laplace => {
                    let mech = LaplaceMechanism {
                        params: LaplaceParams::calibrated(eps, n)?,
                    };
                    let m = monte_carlo(p, n, &mech, trials, &stream)?;
                    (m, Some(baseline_accuracy(k, n, eps)?.alpha))
                }
            };
            points.push(AccuracyPoint {
                epsilon: eps,
                mechanism: kind,
                tv: measured.0,
                tv_stderr: measured.1,
                analytic_alpha: analytic,
                trials: measured.2,
            });
        }
    }
    Ok(points)
}

fn exact<M: crate::mechanism::OutputLaw>(
    p: &CategoricalDistribution,
    n: u64,
    mech: &M,
) -> Result<(f64, f64, u64)> {
    let q = exact_marginal_output(p, n, mech)?;
    Ok((tv_distance(&q, p)?, 0.0, 0))
}

fn monte_carlo<M: crate::mechanism::RandomizedOutputLaw>(
    p: &CategoricalDistribution,
    n: u64,
    mech: &M,
    trials: u64,
    rng: &RandomStream,
) -> Result<(f64, f64, u64)> {
    let est = mc_marginal_output(p, n, mech, trials, rng)?;
    Ok((est.tv, est.tv_stderr, est.trials))
}

/// CSV with columns `epsilon,mechanism,tv,stderr,analytic_alpha,trials`.
/// A missing analytic value is an empty field.
pub fn sweep_to_csv(points: &[AccuracyPoint]) -> String {
    let mut out = String::from("epsilon,mechanism,tv,stderr,analytic_alpha,trials\n");
    for pt in points {
        let alpha = pt.analytic_alpha.map(fmt_lossless).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_lossless(pt.epsilon),
            pt.mechanism,
            fmt_lossless(pt.tv),
            fmt_lossless(pt.tv_stderr),
            alpha,
            pt.trials
        )
        .unwrap();
    }
    out
}
