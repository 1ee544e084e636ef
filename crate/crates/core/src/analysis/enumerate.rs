//! Exhaustive enumeration of datasets as count vectors.

use crate::dist::CountVector;
use crate::error::{Error, Result};

/// Default upper bound on how many count vectors an exhaustive pass visits.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// `C(n + k − 1, k − 1)`, saturating at `u128::MAX`.
pub fn composition_count(n: u64, k: usize) -> u128 {
    let r = (k as u128).saturating_sub(1);
    let top = n as u128 + r;
    let mut acc: u128 = 1;
    for i in 1..=r {
        // acc * (top - r + i) / i stays integral at every step
        acc = match acc.checked_mul(top - r + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Every way to split `n` observations over `k` letters, first letter's
/// count descending: `(n,0,…,0), (n−1,1,0,…), …, (0,…,0,n)`.
pub fn enumerate_count_vectors(n: u64, k: usize) -> Result<Compositions> {
    enumerate_count_vectors_capped(n, k, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_count_vectors_capped(n: u64, k: usize, cap: u128) -> Result<Compositions> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let count = composition_count(n, k);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let mut first = vec![0u64; k];
    first[0] = n;
    Ok(Compositions {
        next: Some(first),
        n,
        remaining: count,
    })
}

/// Iterator returned by [`enumerate_count_vectors`].
#[derive(Clone, Debug)]
pub struct Compositions {
    next: Option<Vec<u64>>,
    n: u64,
    remaining: u128,
}

impl Iterator for Compositions {
    type Item = CountVector;

    fn next(&mut self) -> Option<CountVector> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let k = succ.len();
        let tail = std::mem::take(&mut succ[k - 1]);
        if let Some(i) = succ[..k - 1].iter().rposition(|&c| c > 0) {
            succ[i] -= 1;
            succ[i + 1] = tail + 1;
            self.next = Some(succ);
        }
        self.remaining -= 1;
        Some(CountVector::from_parts_unchecked(current, self.n))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, usize::try_from(self.remaining).ok())
    }
}

/// Datasets one replacement away from `d`: a unit of count moves from a
/// letter with positive count to a different letter. Ordered by source
/// letter, then destination.
pub fn neighbors(d: &CountVector) -> impl Iterator<Item = CountVector> + '_ {
    let k = d.k();
    (0..k)
        .filter(move |&i| d.counts()[i] > 0)
        .flat_map(move |i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(move |(i, j)| {
            let mut c = d.counts().to_vec();
            c[i] -= 1;
            c[j] += 1;
            CountVector::from_parts_unchecked(c, d.n())
        })
}

/// Number of ordered neighbour pairs among all datasets of size `n` over
/// `k` letters: `k(k − 1)·C(n + k − 2, k − 1)`.
pub fn neighbor_pair_count(n: u64, k: usize) -> u128 {
    (k as u128) * (k as u128 - 1) * composition_count(n - 1, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(n: u64, k: usize) -> Vec<Vec<u64>> {
        enumerate_count_vectors(n, k)
            .unwrap()
            .map(|d| d.counts().to_vec())
            .collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(all(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(all(4, 3).len(), 15);
        let units = all(1, 5);
        assert_eq!(units.len(), 5);
        for (i, u) in units.iter().enumerate() {
            assert_eq!(u.iter().sum::<u64>(), 1);
            assert_eq!(u[i], 1);
        }
    }

    #[test]
    fn matches_brute_force() {
        // Brute force over the full grid {0..=n}^k.
        for (n, k) in [(5u64, 3usize), (3, 4), (6, 2)] {
            let mut expected = Vec::new();
            let total = (n + 1).pow(k as u32);
            for code in 0..total {
                let mut c = Vec::with_capacity(k);
                let mut x = code;
                for _ in 0..k {
                    c.push(x % (n + 1));
                    x /= n + 1;
                }
                if c.iter().sum::<u64>() == n {
                    expected.push(c);
                }
            }
            expected.sort();
            expected.reverse();
            let got = all(n, k);
            assert_eq!(got, expected);
            assert_eq!(got.len() as u128, composition_count(n, k));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_count_vectors_capped(1000, 9, 1_000_000).unwrap_err();
        match err {
            Error::EnumerationCap { count, cap } => {
                assert_eq!(cap, 1_000_000);
                assert!(count > cap);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn neighbor_examples() {
        let nb = |c: &[u64]| -> Vec<Vec<u64>> {
            let d = CountVector::new(c.to_vec()).unwrap();
            neighbors(&d).map(|x| x.counts().to_vec()).collect()
        };
        assert_eq!(nb(&[2, 0]), vec![vec![1, 1]]);
        assert_eq!(nb(&[1, 1]), vec![vec![0, 2], vec![2, 0]]);
        let six = nb(&[1, 1, 1]);
        assert_eq!(six.len(), 6);
        assert!(six
            .iter()
            .all(|c| c != &vec![1, 1, 1] && c.iter().sum::<u64>() == 3));
    }

    #[test]
    fn pair_count_closed_form() {
        for (n, k) in [(2u64, 2usize), (7, 3), (12, 3), (5, 4)] {
            let brute: u128 = enumerate_count_vectors(n, k)
                .unwrap()
                .map(|d| neighbors(&d).count() as u128)
                .sum();
            assert_eq!(brute, neighbor_pair_count(n, k));
        }
    }

    #[test]
    fn composition_count_values() {
        assert_eq!(composition_count(2, 2), 3);
        assert_eq!(composition_count(4, 3), 15);
        assert_eq!(composition_count(1000, 9), 25_708_099_169_553_626_826);
        assert_eq!(composition_count(0, 3), 1);
    }
}
