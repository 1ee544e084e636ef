//! Dataset and distribution files.
//!
//! * Observations CSV: one letter per line, optionally preceded by a
//!   `# k=<K>` header line. Blank lines are ignored.
//! * Counts JSON: `{"k": K, "counts": [c1, ..., cK]}`.
//! * Distribution JSON: `{"k": K, "probs": [p1, ..., pK]}`. Totals within
//!   `1e-9` of one are renormalized; a warning is logged past `1e-12`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{CategoricalDistribution, CountVector, SUM_TOLERANCE};
use crate::error::{Error, Result};

/// Largest deviation from unit mass a distribution file may carry.
pub const FILE_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Serialize, Deserialize)]
struct CountsFile {
    k: usize,
    counts: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DistributionFile {
    k: usize,
    probs: Vec<f64>,
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn check_k(expected: Option<usize>, found: usize) -> Result<()> {
    match expected {
        Some(e) if e != found => Err(Error::DimensionMismatch { expected: e, found }),
        _ => Ok(()),
    }
}

/// Loads a dataset from either supported format. JSON is recognised by a
/// `.json` extension or a leading `{`. `k` must agree with the file when
/// both are present; an observations file without a header needs `k`.
pub fn load_dataset(path: &Path, k: Option<usize>) -> Result<CountVector> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    if is_json {
        parse_counts_json(path, &text, k)
    } else {
        parse_observations(path, &text, k)
    }
}

fn parse_counts_json(path: &Path, text: &str, k: Option<usize>) -> Result<CountVector> {
    let file: CountsFile =
        serde_json::from_str(text).map_err(|e| parse_err(path, e.to_string()))?;
    if file.counts.len() != file.k {
        return Err(parse_err(
            path,
            format!("k={} but {} counts given", file.k, file.counts.len()),
        ));
    }
    check_k(k, file.k)?;
    CountVector::new(file.counts)
}

fn parse_observations(path: &Path, text: &str, k: Option<usize>) -> Result<CountVector> {
    let mut header_k = None;
    let mut observations = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if !observations.is_empty() || header_k.is_some() {
                return Err(parse_err(
                    path,
                    format!("line {}: unexpected header", lineno + 1),
                ));
            }
            let value = rest.trim().strip_prefix("k=").ok_or_else(|| {
                parse_err(path, format!("line {}: expected `# k=<K>`", lineno + 1))
            })?;
            header_k = Some(
                value
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(path, format!("line {}: bad k: {e}", lineno + 1)))?,
            );
            continue;
        }
        let x = line
            .parse::<usize>()
            .map_err(|e| parse_err(path, format!("line {}: {e}", lineno + 1)))?;
        observations.push(x);
    }
    let k = match (header_k, k) {
        (Some(h), Some(given)) => {
            check_k(Some(given), h)?;
            h
        }
        (Some(h), None) => h,
        (None, Some(given)) => given,
        (None, None) => {
            return Err(parse_err(
                path,
                "alphabet size unknown: add a `# k=<K>` header or pass k",
            ))
        }
    };
    CountVector::from_observations(k, &observations)
}

/// Loads a distribution file, renormalizing small rounding in the total.
pub fn load_distribution(path: &Path, k: Option<usize>) -> Result<CategoricalDistribution> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: DistributionFile =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    if file.probs.len() != file.k {
        return Err(parse_err(
            path,
            format!("k={} but {} probabilities given", file.k, file.probs.len()),
        ));
    }
    check_k(k, file.k)?;
    if file.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(parse_err(
            path,
            "probabilities must be finite and non-negative",
        ));
    }
    let total: f64 = file.probs.iter().sum();
    let drift = (total - 1.0).abs();
    if drift > FILE_SUM_TOLERANCE {
        return Err(parse_err(
            path,
            format!("probabilities sum to {total}, not 1"),
        ));
    }
    if drift > SUM_TOLERANCE {
        log::warn!(
            "{}: probabilities sum to {total}; renormalizing",
            path.display()
        );
    }
    CategoricalDistribution::new(file.probs.iter().map(|p| p / total).collect())
}

pub fn write_counts(path: &Path, d: &CountVector) -> Result<()> {
    let file = CountsFile {
        k: d.k(),
        counts: d.counts().to_vec(),
    };
    write_json(path, &file)
}

pub fn write_distribution(path: &Path, p: &CategoricalDistribution) -> Result<()> {
    let file = DistributionFile {
        k: p.k(),
        probs: p.probs().to_vec(),
    };
    write_json(path, &file)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Formats with 17 significant digits, enough for a lossless `f64`
/// round-trip.
pub fn fmt_lossless(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn observations_with_header() {
        let f = temp("# k=4\n1\n2\n2\n\n4\n", ".csv");
        let d = load_dataset(f.path(), None).unwrap();
        assert_eq!(d.counts(), &[1, 2, 0, 1]);
    }

    #[test]
    fn observations_need_k() {
        let f = temp("1\n2\n", ".csv");
        assert!(matches!(
            load_dataset(f.path(), None),
            Err(Error::Parse { .. })
        ));
        assert_eq!(
            load_dataset(f.path(), Some(3)).unwrap().counts(),
            &[1, 1, 0]
        );
    }

    #[test]
    fn header_and_flag_must_agree() {
        let f = temp("# k=4\n1\n", ".csv");
        assert!(matches!(
            load_dataset(f.path(), Some(3)),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 4
            })
        ));
    }

    #[test]
    fn observations_out_of_range() {
        let f = temp("# k=2\n1\n3\n", ".csv");
        assert!(load_dataset(f.path(), None).is_err());
        let f = temp("# k=2\n1\nx\n", ".csv");
        assert!(matches!(
            load_dataset(f.path(), None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn counts_json() {
        let f = temp(r#"{"k": 3, "counts": [1, 0, 5]}"#, ".json");
        assert_eq!(
            load_dataset(f.path(), Some(3)).unwrap().counts(),
            &[1, 0, 5]
        );
        let bad = temp(r#"{"k": 2, "counts": [1, 0, 5]}"#, ".json");
        assert!(load_dataset(bad.path(), None).is_err());
    }

    #[test]
    fn distribution_renormalizes_small_drift() {
        let f = temp(r#"{"k": 2, "probs": [0.5, 0.5000000001]}"#, ".json");
        let p = load_distribution(f.path(), None).unwrap();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        let bad = temp(r#"{"k": 2, "probs": [0.5, 0.6]}"#, ".json");
        assert!(load_distribution(bad.path(), None).is_err());
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let d = CountVector::new(vec![3, 1, 4]).unwrap();
        write_counts(&path, &d).unwrap();
        assert_eq!(load_dataset(&path, None).unwrap(), d);
        let p = CategoricalDistribution::binomial_shape(5).unwrap();
        let path = dir.path().join("p.json");
        write_distribution(&path, &p).unwrap();
        assert_eq!(load_distribution(&path, Some(5)).unwrap(), p);
    }

    #[test]
    fn lossless_format_round_trips() {
        for x in [0.078829181298487_58, 1.0 / 3.0, 0.0, 1e-300, 0.1 + 0.2] {
            assert_eq!(fmt_lossless(x).parse::<f64>().unwrap(), x);
        }
    }
}
