//! Integer partitions, used both as cycle types and as irreducible labels.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Weakly decreasing positive parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidPartition(format!("{parts:?} has a zero part")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not weakly decreasing")));
        }
        Ok(Partition { parts })
    }

    /// Sorts the parts and drops zeros.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// The partition `(n)`.
    pub fn row(n: usize) -> Self {
        Partition::from_unsorted(vec![n as u32])
    }

    /// The partition `(1^n)`.
    pub fn column(n: usize) -> Self {
        Partition {
            parts: vec![1; n],
        }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Sum of the parts.
    pub fn size(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum()
    }

    /// Number of parts.
    pub fn length(&self) -> usize {
        self.parts.len()
    }

    /// How many parts equal `k`.
    pub fn multiplicity(&self, k: u32) -> usize {
        self.parts.iter().filter(|&&p| p == k).count()
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.parts.first().copied().unwrap_or(0);
        let parts = (1..=first)
            .map(|i| self.parts.iter().filter(|&&p| p >= i).count() as u32)
            .collect();
        Partition { parts }
    }

    /// Sign of any permutation with this cycle type.
    pub fn sign(&self) -> i32 {
        let even_parts = self.parts.iter().filter(|&&p| p % 2 == 0).count();
        if even_parts % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Hook lengths of every cell, row by row.
    pub fn hook_lengths(&self) -> Vec<u32> {
        let conj = self.conjugate();
        let mut hooks = Vec::with_capacity(self.size());
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row as usize {
                let arm = row - j as u32 - 1;
                let leg = conj.parts[j] - i as u32 - 1;
                hooks.push(arm + leg + 1);
            }
        }
        hooks
    }

    /// Order of the centralizer of an element of this cycle type:
    /// `Π_k k^{m_k} m_k!`.
    pub fn centralizer_size(&self) -> BigUint {
        let mut z = BigUint::one();
        let mut i = 0;
        while i < self.parts.len() {
            let k = self.parts[i];
            let mut m = 0u32;
            while i < self.parts.len() && self.parts[i] == k {
                m += 1;
                i += 1;
                z *= k;
                z *= m;
            }
        }
        z
    }

    /// Number of permutations with this cycle type.
    pub fn class_size(&self) -> BigUint {
        factorial(self.size()) / self.centralizer_size()
    }

    /// Removes a rim hook of length `k` in every possible way, returning the
    /// remaining partitions with the sign `(-1)^{height}`.
    pub(crate) fn remove_rim_hooks(&self, k: u32) -> Vec<(Partition, i32)> {
        // beta-set: positions of beads on an abacus
        let len = self.parts.len() as u32;
        let beta: Vec<u32> = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, &p)| p + len - 1 - i as u32)
            .collect();
        let mut out = Vec::new();
        for (idx, &b) in beta.iter().enumerate() {
            if b < k {
                continue;
            }
            let target = b - k;
            if beta.contains(&target) {
                continue;
            }
            let crossed = beta.iter().filter(|&&x| x > target && x < b).count();
            let mut next: Vec<u32> = beta.clone();
            next[idx] = target;
            next.sort_unstable_by(|a, b| b.cmp(a));
            let parts: Vec<u32> = next
                .iter()
                .enumerate()
                .map(|(i, &x)| x - (len - 1 - i as u32))
                .filter(|&p| p > 0)
                .collect();
            let sign = if crossed % 2 == 0 { 1 } else { -1 };
            out.push((Partition { parts }, sign));
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `(3,2,1)`, `3,2,1` or `3 2 1`; parts may be in any order.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::InvalidPartition(s.to_string()))
            })
            .collect::<Result<Vec<u32>>>()?;
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidPartition(s.to_string()));
        }
        Ok(Partition::from_unsorted(parts))
    }
}

/// All partitions of `n` in reverse-lexicographic order, starting at `(n)`.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn rec(remaining: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition {
                parts: prefix.clone(),
            });
            return;
        }
        for k in (1..=remaining.min(max)).rev() {
            prefix.push(k);
            rec(remaining - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n as u32, n as u32, &mut Vec::new(), &mut out);
    out
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u32).fold(BigUint::one(), |acc, k| acc * k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_partitions(n: u32, max: u32) -> usize {
        if n == 0 {
            return 1;
        }
        (1..=n.min(max)).map(|k| count_partitions(n - k, k)).sum()
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partitions(0), vec![Partition::empty()]);
        assert_eq!(partitions(1), vec![Partition::row(1)]);
        assert_eq!(partitions(4).len(), 5);
        for n in 0..15 {
            assert_eq!(partitions(n).len(), count_partitions(n as u32, n as u32));
        }
    }

    #[test]
    fn reverse_lexicographic_order() {
        let p: Vec<String> = partitions(4).iter().map(|p| p.to_string()).collect();
        assert_eq!(p, ["(4)", "(3,1)", "(2,2)", "(2,1,1)", "(1,1,1,1)"]);
    }

    #[test]
    fn validation() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert_eq!("1 3 2".parse::<Partition>().unwrap().parts(), &[3, 2, 1]);
        assert_eq!("(2,2,1)".parse::<Partition>().unwrap().size(), 5);
        assert!("(2,x)".parse::<Partition>().is_err());
    }

    #[test]
    fn class_and_centralizer_sizes() {
        let id4 = Partition::column(4);
        assert_eq!(id4.class_size(), BigUint::from(1u32));
        assert_eq!(id4.centralizer_size(), BigUint::from(24u32));
        let transposition = Partition::new(vec![2, 1, 1]).unwrap();
        assert_eq!(transposition.class_size(), BigUint::from(6u32));
        let double = Partition::new(vec![2, 2]).unwrap();
        assert_eq!(double.class_size(), BigUint::from(3u32));
        for n in 1..9 {
            let total: BigUint = partitions(n).iter().map(|p| p.class_size()).sum();
            assert_eq!(total, factorial(n));
        }
    }

    #[test]
    fn hooks_of_small_shapes() {
        let mut h = Partition::new(vec![2, 1]).unwrap().hook_lengths();
        h.sort();
        assert_eq!(h, vec![1, 1, 3]);
        assert_eq!(Partition::new(vec![3, 2]).unwrap().hook_lengths(), vec![4, 3, 1, 2, 1]);
    }

    #[test]
    fn conjugate_is_involution() {
        for n in 0..10 {
            for p in partitions(n) {
                assert_eq!(p.conjugate().conjugate(), p);
                assert_eq!(p.conjugate().size(), n);
            }
        }
    }

    #[test]
    fn rim_hook_removal() {
        // (2,1) has a single 3-hook (the whole shape), of height 1
        let hooks = Partition::new(vec![2, 1]).unwrap().remove_rim_hooks(3);
        assert_eq!(hooks, vec![(Partition::empty(), -1)]);
        // (3,1): the 2-hooks are the end of row one (height 0) and the
        // vertical domino in the first column is not a rim hook
        let hooks = Partition::new(vec![3, 1]).unwrap().remove_rim_hooks(2);
        assert_eq!(hooks, vec![(Partition::new(vec![1, 1]).unwrap(), 1)]);
    }
}
