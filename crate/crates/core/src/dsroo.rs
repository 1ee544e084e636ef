//! Data-specific reveal-or-obscure.
//!
//! The obscuring probability depends on the dataset through its smallest
//! per-letter count `m`. The schedule `q_0, …, q_⌊n/k⌋` starts at the
//! fixed-`q` value for `ε` and follows
//!
//! ```text
//! q_m = max{0, (u_m / v_m)·q_{m−1} − w_m / v_m}
//! u_m = 1/k − (m + 1)/n
//! v_m = e^ε (1/k − m/n)
//! w_m = (m (e^ε − 1) − 1)/n
//! ```
//!
//! which makes the "minimum count drops by one" neighbour constraint
//! `u_m q_{m−1} ≤ v_m q_m + w_m` tight. When `k | n` the last index has
//! `v_m = 0`; there the schedule is set to 0. Once the schedule reaches 0 it
//! stays there.
//!
//! [`check_feasibility`] verifies the full set of neighbour constraints on a
//! schedule. Note that the recursion does not guarantee the same-minimum
//! constraint at the last index when `u_m < 0` there; the checker and the
//! exhaustive auditor both report such cases.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::dist::{CategoricalDistribution, CountVector, Letter};
use crate::error::{invalid, Error, Result};
use crate::io::fmt_lossless;
use crate::mechanism::{obscured_empirical, reveal_or_obscure, OutputLaw, Sampler};
use crate::rng::RandomStream;
use crate::roo::roo_q_for_epsilon;

/// The per-index coefficients of the schedule recursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleCoefficients {
    pub m: u64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

fn check_params(epsilon: f64, n: u64, k: usize) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if k < 2 {
        return Err(invalid(format!("k must be at least 2, got {k}")));
    }
    if n < 1 {
        return Err(invalid("n must be at least 1"));
    }
    Ok(())
}

/// `u_m`, `v_m`, `w_m` for index `m`.
///
/// Differences of fractions are formed over the common denominator `nk`, so
/// `v_m` is exactly zero when `m = n/k`.
pub fn coefficients(m: u64, n: u64, k: usize, epsilon: f64) -> ScheduleCoefficients {
    let nk = n as f64 * k as f64;
    let kk = k as i128;
    let u = (n as i128 - kk * (m as i128 + 1)) as f64 / nk;
    let v = epsilon.exp() * ((n as i128 - kk * m as i128) as f64 / nk);
    let w = (m as f64 * epsilon.exp_m1() - 1.0) / n as f64;
    ScheduleCoefficients { m, u, v, w }
}

/// Largest index covered by the same-minimum constraint,
/// `min(⌊1/(e^ε − 1)⌋, ⌊n/k⌋)`.
pub fn same_min_range_end(epsilon: f64, n: u64, k: usize) -> u64 {
    let last = n / k as u64;
    let bound = (1.0 / epsilon.exp_m1()).floor();
    if bound >= last as f64 {
        last
    } else {
        bound as u64
    }
}

/// `t_m = 1 − (e^ε − 1)/k / ((1/k − m/n)(e^ε − 1) + 1/n)`, the smallest
/// `q_m` that keeps two datasets with the same minimum count `m` within
/// `e^ε` of each other. `t_0` equals `q_0`.
pub fn t_lower_bound(m: u64, n: u64, k: usize, epsilon: f64) -> f64 {
    let em1 = epsilon.exp_m1();
    let gap = (n as i128 - k as i128 * m as i128) as f64 / (n as f64 * k as f64);
    1.0 - (em1 / k as f64) / (gap * em1 + 1.0 / n as f64)
}

/// Obscuring probabilities indexed by the dataset's minimum count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QSchedule {
    epsilon: f64,
    n: u64,
    k: usize,
    q: Vec<f64>,
}

impl QSchedule {
    /// Wraps an arbitrary vector, e.g. one read back from disk or a
    /// hand-built alternative to audit. Only the length is checked; use
    /// [`check_feasibility`] for the rest.
    pub fn from_values(epsilon: f64, n: u64, k: usize, q: Vec<f64>) -> Result<Self> {
        check_params(epsilon, n, k)?;
        let len = (n / k as u64 + 1) as usize;
        if q.len() != len {
            return Err(invalid(format!(
                "schedule for n={n}, k={k} needs {len} entries, got {}",
                q.len()
            )));
        }
        Ok(Self { epsilon, n, k, q })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    /// `⌊n/k⌋`.
    pub fn last_index(&self) -> u64 {
        (self.q.len() - 1) as u64
    }

    /// Obscuring probability for a dataset with minimum count `m`.
    pub fn q(&self, m: u64) -> f64 {
        self.q[m as usize]
    }

    /// First index where the schedule is exactly zero.
    pub fn first_zero(&self) -> Option<u64> {
        self.q.iter().position(|&q| q == 0.0).map(|i| i as u64)
    }

    /// `m,q_m` CSV with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,q_m\n");
        for (m, q) in self.q.iter().enumerate() {
            writeln!(out, "{m},{}", fmt_lossless(*q)).unwrap();
        }
        out
    }

    /// Parses [`QSchedule::to_csv`] output for the given parameters.
    pub fn from_csv(text: &str, epsilon: f64, n: u64, k: usize) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("m,q_m") {
            return Err(invalid("schedule CSV must start with `m,q_m`"));
        }
        let mut q = Vec::new();
        for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let (m, value) = line
                .split_once(',')
                .ok_or_else(|| invalid(format!("row {row}: expected `m,q_m`")))?;
            let m: usize = m
                .trim()
                .parse()
                .map_err(|e| invalid(format!("row {row}: {e}")))?;
            if m != row {
                return Err(invalid(format!("row {row}: index {m} out of order")));
            }
            q.push(
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("row {row}: {e}")))?,
            );
        }
        Self::from_values(epsilon, n, k, q)
    }

    fn check_dataset(&self, d: &CountVector) -> Result<()> {
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

/// Builds the schedule for `(ε, n, k)`. For `n < k` it is `[q_0]`.
pub fn build_schedule(epsilon: f64, n: u64, k: usize) -> Result<QSchedule> {
    check_params(epsilon, n, k)?;
    let last = n / k as u64;
    let mut q = Vec::with_capacity(last as usize + 1);
    q.push(roo_q_for_epsilon(epsilon, n, k)?);
    for m in 1..=last {
        let prev = q[m as usize - 1];
        let c = coefficients(m, n, k, epsilon);
        let next = if prev == 0.0 || c.v == 0.0 {
            0.0
        } else {
            ((c.u / c.v) * prev - c.w / c.v).max(0.0)
        };
        q.push(next);
    }
    Ok(QSchedule { epsilon, n, k, q })
}

/// Memoizes schedules by their exact `(ε, n, k)`.
#[derive(Debug, Default)]
pub struct ScheduleCache {
    map: Mutex<HashMap<(u64, u64, usize), Arc<QSchedule>>>,
}

impl ScheduleCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, epsilon: f64, n: u64, k: usize) -> Result<Arc<QSchedule>> {
        let key = (epsilon.to_bits(), n, k);
        if let Some(s) = self.map.lock().unwrap().get(&key) {
            return Ok(Arc::clone(s));
        }
        let built = Arc::new(build_schedule(epsilon, n, k)?);
        Ok(Arc::clone(
            self.map.lock().unwrap().entry(key).or_insert(built),
        ))
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Which constraint a schedule entry breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `q_m ≥ w_m/(u_m − v_m)`: neighbours share the minimum count.
    SameMinimum,
    /// `u_m q_{m+1} ≤ v_m q_m + w_m`: the neighbour's minimum is one higher.
    MinimumUp,
    /// `u_m q_{m−1} ≤ v_m q_m + w_m`: the neighbour's minimum is one lower.
    MinimumDown,
    /// `q_m ≤ q_{m−1}`.
    NonIncreasing,
    /// `0 ≤ q_m ≤ 1`.
    Probability,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub m: u64,
    /// Amount by which the constraint is exceeded (before tolerance).
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub epsilon: f64,
    pub n: u64,
    pub k: usize,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, constraint: Constraint) -> usize {
        self.violations
            .iter()
            .filter(|v| v.constraint == constraint)
            .count()
    }
}

/// Checks every neighbour constraint, monotonicity and range on `s`.
/// Violations are collected, never raised.
pub fn check_feasibility(s: &QSchedule, tol: f64) -> FeasibilityReport {
    let (eps, n, k) = (s.epsilon, s.n, s.k);
    let last = s.last_index();
    let q = |m: u64| s.q(m);
    let mut violations = Vec::new();
    let mut flag = |constraint, m, excess: f64| {
        if excess > tol {
            violations.push(Violation {
                constraint,
                m,
                excess,
            });
        }
    };

    for m in 0..=same_min_range_end(eps, n, k) {
        let c = coefficients(m, n, k, eps);
        flag(Constraint::SameMinimum, m, c.w / (c.u - c.v) - q(m));
    }
    for m in 0..last {
        let c = coefficients(m, n, k, eps);
        flag(
            Constraint::MinimumUp,
            m,
            c.u * q(m + 1) - (c.v * q(m) + c.w),
        );
    }
    for m in 1..=last {
        let c = coefficients(m, n, k, eps);
        flag(
            Constraint::MinimumDown,
            m,
            c.u * q(m - 1) - (c.v * q(m) + c.w),
        );
        flag(Constraint::NonIncreasing, m, q(m) - q(m - 1));
    }
    for m in 0..=last {
        let v = q(m);
        let excess = if v.is_nan() {
            f64::INFINITY
        } else {
            (-v).max(v - 1.0)
        };
        flag(Constraint::Probability, m, excess);
    }

    FeasibilityReport {
        epsilon: eps,
        n,
        k,
        tolerance: tol,
        violations,
    }
}

/// The data-specific mechanism bound to one schedule.
#[derive(Clone, Debug)]
pub struct DsRoo {
    schedule: Arc<QSchedule>,
}

impl DsRoo {
    pub fn new(schedule: Arc<QSchedule>) -> Self {
        Self { schedule }
    }

    pub fn schedule(&self) -> &QSchedule {
        &self.schedule
    }

    /// Obscuring probability this mechanism uses on `d`.
    pub fn q_for(&self, d: &CountVector) -> f64 {
        self.schedule.q(d.min_count())
    }
}

impl OutputLaw for DsRoo {
    fn name(&self) -> &str {
        "dsroo"
    }

    /// `d` must have the schedule's `n` and `k`.
    fn output_law(&self, d: &CountVector) -> CategoricalDistribution {
        debug_assert!(self.schedule.check_dataset(d).is_ok());
        obscured_empirical(d, self.q_for(d))
    }
}

impl Sampler for DsRoo {
    fn sample(&self, d: &CountVector, rng: &mut RandomStream) -> Result<Letter> {
        dsroo_sample(d, &self.schedule, rng)
    }
}

/// Releases one letter from `d` using `q_m` with `m = min_count(d)`.
pub fn dsroo_sample(d: &CountVector, s: &QSchedule, rng: &mut RandomStream) -> Result<Letter> {
    s.check_dataset(d)?;
    Ok(reveal_or_obscure(d, s.q(d.min_count()), rng))
}

/// Exact law `q_m/k + (1 − q_m)·P̂`.
pub fn dsroo_conditional_output(d: &CountVector, s: &QSchedule) -> Result<CategoricalDistribution> {
    s.check_dataset(d)?;
    Ok(obscured_empirical(d, s.q(d.min_count())))
}
