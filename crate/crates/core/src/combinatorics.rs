//! Colexicographic combinatorial number system over k-subsets of `{0..total}`.
//!
//! `rank({a_0 < a_1 < ... < a_{k-1}}) = sum_j C(a_j, j + 1)`.

use crate::error::{Error, Result};

/// `C(n, k)` with overflow-free intermediate steps for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial overflows usize")
}

/// Rank of a strictly increasing subset.
pub fn rank(indices: &[usize], total: usize) -> Result<usize> {
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::UnsortedIndices);
        }
    }
    if let Some(&last) = indices.last() {
        if last >= total {
            return Err(Error::MajoranaOutOfRange {
                index: last,
                n: total / 2,
            });
        }
    }
    Ok(rank_unchecked(indices))
}

#[inline]
pub(crate) fn rank_unchecked(indices: &[usize]) -> usize {
    indices
        .iter()
        .enumerate()
        .map(|(j, &a)| binomial(a, j + 1))
        .sum()
}

/// Inverse of [`rank`].
pub fn unrank(mut r: usize, kappa: usize, total: usize) -> Result<Vec<usize>> {
    let dim = binomial(total, kappa);
    if r >= dim {
        return Err(Error::RankOutOfRange {
            rank: r,
            total,
            kappa,
        });
    }
    let mut out = vec![0; kappa];
    let mut hi = total;
    for j in (1..=kappa).rev() {
        // largest a < hi with C(a, j) <= r
        let mut a = hi - 1;
        while binomial(a, j) > r {
            a -= 1;
        }
        out[j - 1] = a;
        r -= binomial(a, j);
        hi = a;
    }
    Ok(out)
}

/// Calls `f` on every `k`-subset of `{0..total}` in lexicographic order.
pub fn for_each_subset(total: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > total {
        return;
    }
    let mut s: Vec<usize> = (0..k).collect();
    loop {
        f(&s);
        // advance the rightmost index that still has room
        let mut j = k;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if s[j] < total - k + j {
                break;
            }
            if j == 0 {
                return;
            }
        }
        s[j] += 1;
        for t in j + 1..k {
            s[t] = s[t - 1] + 1;
        }
    }
}

/// Rank lookup for small grades (at most 4) backed by precomputed binomial rows.
#[derive(Clone, Debug)]
pub struct ColexRanker {
    total: usize,
    rows: [Vec<usize>; 5],
}

impl ColexRanker {
    pub fn new(total: usize) -> Self {
        let row = |j: usize| {
            (0..total.max(1))
                .map(|a| binomial(a, j))
                .collect::<Vec<_>>()
        };
        Self {
            total,
            rows: [row(0), row(1), row(2), row(3), row(4)],
        }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    #[inline]
    pub fn rank(&self, sorted: &[usize]) -> usize {
        debug_assert!(sorted.len() <= 4);
        sorted
            .iter()
            .enumerate()
            .map(|(j, &a)| self.rows[j + 1][a])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// All k-subsets of {0..total} in colex order, by brute force.
    fn colex_enumeration(total: usize, k: usize) -> Vec<Vec<usize>> {
        let mut subsets: Vec<Vec<usize>> = (0u32..(1 << total))
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..total).filter(|i| m >> i & 1 == 1).collect())
            .collect();
        subsets.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
        subsets
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&[0, 1, 2, 3], 4).unwrap(), 0);
        assert_eq!(rank(&[0, 1, 2, 4], 6).unwrap(), 1);
        assert_eq!(unrank(0, 2, 4).unwrap(), vec![0, 1]);
        assert!(rank(&[1, 0], 4).is_err());
        assert!(rank(&[0, 4], 4).is_err());
        assert!(unrank(15, 4, 6).is_err());
    }

    #[test]
    fn rank_matches_enumeration() {
        for total in 0..=8 {
            for k in 0..=total {
                for (r, s) in colex_enumeration(total, k).iter().enumerate() {
                    assert_eq!(rank(s, total).unwrap(), r);
                    assert_eq!(&unrank(r, k, total).unwrap(), s);
                }
            }
        }
        assert_eq!(colex_enumeration(6, 4).len(), 15);
    }

    #[test]
    fn subset_iteration_counts() {
        for total in 0..9 {
            for k in 0..=total + 1 {
                let mut count = 0;
                let mut prev: Option<Vec<usize>> = None;
                for_each_subset(total, k, |s| {
                    count += 1;
                    if let Some(p) = &prev {
                        assert!(p.as_slice() < s);
                    }
                    prev = Some(s.to_vec());
                });
                assert_eq!(count, binomial(total, k), "C({total},{k})");
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 4), 1);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(120, 2), 7140);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(120, 4), 8_214_570);
    }

    proptest! {
        #[test]
        fn unrank_inverts_rank(total in 4usize..200, k in 0usize..5, seed in any::<u64>()) {
            let dim = binomial(total, k);
            let r = (seed % dim as u64) as usize;
            let s = unrank(r, k, total).unwrap();
            prop_assert_eq!(rank(&s, total).unwrap(), r);
            prop_assert_eq!(ColexRanker::new(total).rank(&s), r);
        }
    }
}
