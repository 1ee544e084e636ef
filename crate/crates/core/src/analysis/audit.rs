//! Exhaustive privacy audit over every neighbouring pair of datasets.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::enumerate::{enumerate_count_vectors_capped, neighbors, DEFAULT_ENUMERATION_CAP};
use crate::dist::{CountVector, PrivacyBudget};
use crate::error::{Error, Result};
use crate::mechanism::OutputLaw;

/// Serializes non-finite floats as strings, which JSON numbers cannot hold.
pub(crate) fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&crate::io::fmt_lossless(*x))
    }
}

/// `num / den` with `0/0 = 1` and `x/0 = ∞`.
pub fn likelihood_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// The pair and output letter that realise the largest ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub dataset: Vec<u64>,
    pub neighbor: Vec<u64>,
    pub letter: usize,
    #[serde(serialize_with = "ser_f64")]
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub mechanism: String,
    pub epsilon: f64,
    pub n: u64,
    pub k: usize,
    #[serde(serialize_with = "ser_f64")]
    pub max_ratio: f64,
    /// `e^ε`.
    pub bound: f64,
    pub ratio_tolerance: f64,
    pub pass: bool,
    pub witness: Witness,
    /// Ordered (dataset, neighbour) pairs examined.
    pub pairs_checked: u64,
    pub datasets_checked: u64,
}

impl AuditReport {
    /// `max_ratio / e^ε`.
    pub fn tightness(&self) -> f64 {
        self.max_ratio / self.bound
    }
}

/// Audits `mechanism` on all datasets of size `n` over `k` letters against
/// the budget's `e^ε` bound.
pub fn audit_mechanism<M: OutputLaw + ?Sized>(
    mechanism: &M,
    n: u64,
    k: usize,
    budget: &PrivacyBudget,
) -> Result<AuditReport> {
    audit_mechanism_capped(mechanism, n, k, budget, DEFAULT_ENUMERATION_CAP)
}

pub fn audit_mechanism_capped<M: OutputLaw + ?Sized>(
    mechanism: &M,
    n: u64,
    k: usize,
    budget: &PrivacyBudget,
    cap: u128,
) -> Result<AuditReport> {
    let datasets: Vec<CountVector> = enumerate_count_vectors_capped(n, k, cap)?.collect();
    let laws: Vec<Vec<f64>> = datasets
        .par_iter()
        .map(|d| {
            let law = mechanism.output_law(d);
            if law.k() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: law.k(),
                });
            }
            Ok(law.into_vec())
        })
        .collect::<Result<_>>()?;
    let index: HashMap<&[u64], usize> = datasets
        .iter()
        .enumerate()
        .map(|(i, d)| (d.counts(), i))
        .collect();

    // Per dataset: (best ratio, neighbour index, letter, pairs seen).
    let per_dataset: Vec<(f64, usize, usize, u64)> = datasets
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let mut best = (f64::NEG_INFINITY, i, 0usize, 0u64);
            for nb in neighbors(d) {
                let j = index[nb.counts()];
                best.3 += 1;
                for (y, (&num, &den)) in laws[i].iter().zip(&laws[j]).enumerate() {
                    let r = likelihood_ratio(num, den);
                    if r > best.0 {
                        best = (r, j, y, best.3);
                    }
                }
            }
            best
        })
        .collect();

    let mut max_ratio = f64::NEG_INFINITY;
    let mut witness = (0usize, 0usize, 0usize);
    let mut pairs = 0u64;
    for (i, &(r, j, y, seen)) in per_dataset.iter().enumerate() {
        pairs += seen;
        if r > max_ratio {
            max_ratio = r;
            witness = (i, j, y);
        }
    }
    let bound = budget.ratio_bound();
    let (i, j, y) = witness;
    Ok(AuditReport {
        mechanism: mechanism.name().to_string(),
        epsilon: budget.epsilon(),
        n,
        k,
        max_ratio,
        bound,
        ratio_tolerance: budget.ratio_tolerance(),
        pass: max_ratio <= bound * (1.0 + budget.ratio_tolerance()),
        witness: Witness {
            dataset: datasets[i].counts().to_vec(),
            neighbor: datasets[j].counts().to_vec(),
            letter: y + 1,
            ratio: max_ratio,
        },
        pairs_checked: pairs,
        datasets_checked: datasets.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::enumerate::neighbor_pair_count;
    use crate::dsroo::{build_schedule, DsRoo};
    use crate::roo::{roo_q_for_epsilon, Roo};
    use std::sync::Arc;

    #[test]
    fn ratio_conventions() {
        assert_eq!(likelihood_ratio(0.0, 0.0), 1.0);
        assert_eq!(likelihood_ratio(0.3, 0.0), f64::INFINITY);
        assert_eq!(likelihood_ratio(0.5, 0.25), 2.0);
    }

    #[test]
    fn fixed_q_two_by_two_is_tight() {
        let eps = 2f64.ln();
        let q = roo_q_for_epsilon(eps, 2, 2).unwrap();
        assert_eq!(q, 0.5);
        let report = audit_mechanism(&Roo { q }, 2, 2, &PrivacyBudget::new(eps).unwrap()).unwrap();
        assert_eq!(report.max_ratio, 2.0);
        assert!(report.pass);
        let w = &report.witness;
        assert!(w.dataset.contains(&0) || w.neighbor.contains(&0));
        assert_eq!(report.pairs_checked, 4);
    }

    #[test]
    fn reveal_only_fails_with_infinite_ratio() {
        let report =
            audit_mechanism(&Roo { q: 0.0 }, 2, 2, &PrivacyBudget::new(1.0).unwrap()).unwrap();
        assert_eq!(report.max_ratio, f64::INFINITY);
        assert!(!report.pass);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"max_ratio\":\"inf\""));
    }

    #[test]
    fn data_specific_small_instance_passes() {
        let s = Arc::new(build_schedule(0.5, 9, 3).unwrap());
        let report =
            audit_mechanism(&DsRoo::new(s), 9, 3, &PrivacyBudget::new(0.5).unwrap()).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn pair_count_and_witness_recompute() {
        let eps = 0.7;
        let q = roo_q_for_epsilon(eps, 7, 3).unwrap();
        let mech = Roo { q };
        let report = audit_mechanism(&mech, 7, 3, &PrivacyBudget::new(eps).unwrap()).unwrap();
        assert_eq!(report.pairs_checked as u128, neighbor_pair_count(7, 3));
        let d = CountVector::new(report.witness.dataset.clone()).unwrap();
        let e = CountVector::new(report.witness.neighbor.clone()).unwrap();
        let y = report.witness.letter - 1;
        let r = mech.output_law(&d).probs()[y] / mech.output_law(&e).probs()[y];
        assert!((r - report.max_ratio).abs() <= 1e-12 * report.max_ratio);
    }

    #[test]
    fn cap_error_propagates() {
        let err = audit_mechanism_capped(
            &Roo { q: 0.5 },
            50,
            5,
            &PrivacyBudget::new(1.0).unwrap(),
            1000,
        );
        assert!(matches!(err, Err(Error::EnumerationCap { .. })));
    }
}
