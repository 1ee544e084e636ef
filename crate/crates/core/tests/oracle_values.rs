//! Values computed by an independent implementation and frozen here.

use std::sync::Arc;

use dpsampler::analysis::{audit_mechanism, composition_count, neighbor_pair_count};
use dpsampler::baseline::complexity_comparison;
use dpsampler::dsroo::{build_schedule, DsRoo};
use dpsampler::PrivacyBudget;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn schedules() {
    let cases: &[(f64, u64, usize, &[f64])] = &[
        (0.1, 3, 2, &[0.8637395740312904, 0.8378057861218858]),
        (
            0.5,
            9,
            3,
            &[0.33942443929724264, 0.20946632425740702, 0.0, 0.0],
        ),
        (
            1.0,
            12,
            2,
            &[0.0884197457371647, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ),
        (0.5, 5, 3, &[0.4804915348831964, 0.17387555531837967]),
    ];
    for &(eps, n, k, want) in cases {
        let s = build_schedule(eps, n, k).unwrap();
        assert_eq!(s.values().len(), want.len());
        for (got, w) in s.values().iter().zip(want) {
            assert!(
                close(*got, *w, 1e-12) || (*w == 0.0 && *got == 0.0),
                "{eps} {n} {k}: {got} vs {w}"
            );
        }
    }
}

#[test]
fn reference_schedule_heads() {
    let q0 = [
        (0.1, 0.0788292),
        (0.5, 0.0136836),
        (1.0, 0.0052105),
        (2.0, 0.0014067),
    ];
    let first_zero = [17, 3, 1, 1];
    for ((eps, want), fz) in q0.iter().zip(first_zero) {
        let s = build_schedule(*eps, 1000, 9).unwrap();
        assert!((s.q(0) - want).abs() < 5e-8);
        assert_eq!(s.first_zero(), Some(fz));
        assert_eq!(s.values().len(), 112);
    }
}

#[test]
fn dsroo_audit_maxima() {
    // (eps, n, k, max ratio, pairs)
    let cases = [
        (0.1, 3u64, 2usize, 1.1143095941740022, 6u64),
        (0.5, 9, 3, 1.6487212707001282, 270),
        (1.0, 12, 2, 2.0, 24),
        (0.5, 5, 3, 1.7403099131743582, 90),
    ];
    for (eps, n, k, max_ratio, pairs) in cases {
        let mech = DsRoo::new(Arc::new(build_schedule(eps, n, k).unwrap()));
        let r = audit_mechanism(&mech, n, k, &PrivacyBudget::new(eps).unwrap()).unwrap();
        assert!(
            close(r.max_ratio, max_ratio, 1e-12),
            "{eps} {n} {k}: {}",
            r.max_ratio
        );
        assert_eq!(r.pairs_checked, pairs);
        assert_eq!(r.pass, max_ratio <= eps.exp() * (1.0 + 1e-9));
    }
}

#[test]
fn known_dsroo_violation() {
    // Two letters, three records: both datasets share minimum count 1, which
    // is also the last schedule index, and the schedule cannot cover it.
    let eps = 0.1;
    let mech = DsRoo::new(Arc::new(build_schedule(eps, 3, 2).unwrap()));
    let r = audit_mechanism(&mech, 3, 2, &PrivacyBudget::new(eps).unwrap()).unwrap();
    assert!(!r.pass);
    assert!(close(r.tightness(), 1.008269016085102, 1e-12));
    assert_eq!(r.witness.dataset, vec![2, 1]);
    assert_eq!(r.witness.neighbor, vec![1, 2]);
    assert_eq!(r.witness.letter, 1);
}

#[test]
fn counts() {
    assert_eq!(composition_count(1000, 9), 25_708_099_169_553_626_826);
    assert_eq!(composition_count(12, 3), 91);
    assert_eq!(neighbor_pair_count(9, 3), 270);
}

#[test]
fn complexity_spot_value() {
    let c = complexity_comparison(10, 0.1, 1.0).unwrap();
    assert!(close(c.n_roo, 46.55813654954612, 1e-12));
    assert!(close(c.n_subrr, 81.0, 1e-12));
    assert!(close(c.n_baseline, 200.0, 1e-12));
}
