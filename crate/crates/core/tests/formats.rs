use std::fs;

use dpsampler::dsroo::{build_schedule, QSchedule};
use dpsampler::io::{load_dataset, load_distribution, write_counts, write_distribution};
use dpsampler::{CategoricalDistribution, CountVector, Error};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedule_csv_round_trips_bit_exactly(eps in 0.01f64..8.0, n in 1u64..2000, k in 2usize..12) {
        let s = build_schedule(eps, n, k).unwrap();
        let back = QSchedule::from_csv(&s.to_csv(), eps, n, k).unwrap();
        let a: Vec<u64> = s.values().iter().map(|x| x.to_bits()).collect();
        let b: Vec<u64> = back.values().iter().map(|x| x.to_bits()).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn counts_file_round_trips(c in prop::collection::vec(0u64..1000, 2..10)) {
        prop_assume!(c.iter().sum::<u64>() > 0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let d = CountVector::new(c).unwrap();
        write_counts(&path, &d).unwrap();
        prop_assert_eq!(load_dataset(&path, None).unwrap(), d);
    }
}

#[test]
fn observations_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obs.csv");
    fs::write(&path, "# k=4\n1\n4\n4\n\n2\n").unwrap();
    let d = load_dataset(&path, None).unwrap();
    assert_eq!(d.counts(), &[1, 1, 0, 2]);
    assert!(matches!(
        load_dataset(&path, Some(3)),
        Err(Error::DimensionMismatch {
            expected: 3,
            found: 4
        })
    ));
}

#[test]
fn observations_outside_the_alphabet_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obs.csv");
    fs::write(&path, "1\n5\n").unwrap();
    assert!(load_dataset(&path, Some(4)).is_err());
    assert!(load_dataset(&path, None).is_err());
}

#[test]
fn distribution_round_trip_and_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let p = CategoricalDistribution::binomial_shape(9).unwrap();
    write_distribution(&path, &p).unwrap();
    assert_eq!(load_distribution(&path, Some(9)).unwrap(), p);

    fs::write(&path, r#"{"k": 2, "probs": [0.5, 0.5000000001]}"#).unwrap();
    let q = load_distribution(&path, None).unwrap();
    assert!((q.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);

    fs::write(&path, r#"{"k": 2, "probs": [0.5, 0.6]}"#).unwrap();
    assert!(matches!(
        load_distribution(&path, None),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn shipped_reference_distribution_is_the_binomial_shape() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/binomial9.json");
    let p = load_distribution(std::path::Path::new(path), Some(9)).unwrap();
    assert_eq!(p, CategoricalDistribution::binomial_shape(9).unwrap());
}
