use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{Budget, BUCKET_COUNT_LIMIT};
use crate::characters::CharacterTable;
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// All of `S_n` in lexicographic order, so an element's index is its Lehmer
/// rank.
#[derive(Debug)]
pub struct SymmetricGroup {
    n: usize,
    elements: Vec<Permutation>,
}

impl SymmetricGroup {
    pub fn new(n: usize) -> Self {
        let order: usize = (1..=n).product();
        let elements = (0..order).map(|r| unrank(n, r)).collect();
        SymmetricGroup { n, elements }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, rank: usize) -> &Permutation {
        &self.elements[rank]
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn rank(&self, p: &Permutation) -> usize {
        rank_of(p.images())
    }
}

fn rank_of(images: &[u32]) -> usize {
    let n = images.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = images[i + 1..].iter().filter(|&&x| x < images[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

fn unrank(n: usize, mut rank: usize) -> Permutation {
    let mut digits = vec![0usize; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<u32> = (0..n as u32).collect();
    let images = digits.into_iter().map(|d| pool.remove(d)).collect();
    Permutation::from_images_unchecked(images)
}

#[derive(Debug)]
enum Storage {
    /// `pairs[σ]` lists `a * n! + b` for every `(a, b)` with `[a, b] = σ`.
    Pairs(Vec<Vec<u32>>),
    /// Only `|bucket(σ)|` per conjugacy class index.
    Counts(Vec<u128>),
}

/// For fixed `n`, the fibres `{(a, b) ∈ S_n² : [a, b] = σ}` of the
/// commutator map.
#[derive(Debug)]
pub struct CommutatorBuckets {
    group: SymmetricGroup,
    table: std::sync::Arc<CharacterTable>,
    storage: Storage,
}

/// Builds the commutator buckets for `S_n`. Pairs are stored when
/// `n <= budget.max_materialized_n`; up to `n = 9` only sizes are kept and
/// pairs are regenerated on demand.
pub fn build_buckets(n: usize, budget: &Budget) -> Result<CommutatorBuckets> {
    if n > BUCKET_COUNT_LIMIT || n < 1 {
        return Err(Error::BudgetExceeded {
            what: "commutator buckets",
            needed: format!("n = {n}"),
            limit: format!("1 <= n <= {BUCKET_COUNT_LIMIT}"),
        });
    }
    let group = SymmetricGroup::new(n);
    let table = CharacterTable::shared(n);
    let storage = if n <= budget.max_materialized_n.min(super::PAIR_MATERIALIZATION_LIMIT) {
        let order = group.order();
        let mut pairs: Vec<Vec<u32>> = vec![Vec::new(); order];
        let inverses: Vec<Vec<u32>> = group
            .elements
            .iter()
            .map(|p| p.inverse().images().to_vec())
            .collect();
        let mut scratch = vec![0u32; n];
        for a in 0..order {
            let (ai, a_inv) = (group.elements[a].images(), &inverses[a]);
            for b in 0..order {
                let (bi, b_inv) = (group.elements[b].images(), &inverses[b]);
                for (i, slot) in scratch.iter_mut().enumerate() {
                    let x = b_inv[a_inv[i] as usize] as usize;
                    *slot = bi[ai[x] as usize];
                }
                pairs[rank_of(&scratch)].push((a * order + b) as u32);
            }
        }
        Storage::Pairs(pairs)
    } else {
        let counts = (0..table.len())
            .map(|c| {
                table
                    .commutator_product_count(1, c)
                    .and_then(|v| v.to_u128().ok_or(Error::Overflow("bucket size")))
            })
            .collect::<Result<Vec<_>>>()?;
        Storage::Counts(counts)
    };
    Ok(CommutatorBuckets {
        group,
        table,
        storage,
    })
}

impl CommutatorBuckets {
    pub fn n(&self) -> usize {
        self.group.n
    }

    pub fn group(&self) -> &SymmetricGroup {
        &self.group
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.storage, Storage::Pairs(_))
    }

    /// `|bucket(σ)|` for `σ` given by rank.
    pub fn len_of(&self, sigma: usize) -> u128 {
        match &self.storage {
            Storage::Pairs(p) => p[sigma].len() as u128,
            Storage::Counts(c) => {
                let class = self
                    .table
                    .index_of(&self.group.element(sigma).cycle_type())
                    .expect("cycle type of an element of S_n");
                c[class]
            }
        }
    }

    /// `Σ_σ |bucket(σ)|`, which must equal `(n!)²`.
    pub fn total(&self) -> u128 {
        (0..self.group.order()).map(|s| self.len_of(s)).sum()
    }

    /// Calls `f(a, b)` with element ranks for every pair in `bucket(σ)`.
    pub fn for_each_pair(&self, sigma: usize, mut f: impl FnMut(usize, usize)) {
        let order = self.group.order();
        match &self.storage {
            Storage::Pairs(p) => {
                for &packed in &p[sigma] {
                    let packed = packed as usize;
                    f(packed / order, packed % order);
                }
            }
            Storage::Counts(_) => {
                let s = self.group.element(sigma);
                for (a_rank, a) in self.group.elements.iter().enumerate() {
                    let target = a.then(s);
                    for b in all_conjugators(a, &target) {
                        f(a_rank, self.group.rank(&b));
                    }
                }
            }
        }
    }

    /// The pairs of `bucket(σ)` as permutations.
    pub fn pairs(&self, sigma: &Permutation) -> Vec<(Permutation, Permutation)> {
        let mut out = Vec::new();
        self.for_each_pair(self.group.rank(sigma), |a, b| {
            out.push((self.group.element(a).clone(), self.group.element(b).clone()))
        });
        out
    }
}

fn cycles_by_length(p: &Permutation) -> BTreeMap<usize, Vec<Vec<u32>>> {
    let mut m: BTreeMap<usize, Vec<Vec<u32>>> = BTreeMap::new();
    for c in p.cycles() {
        m.entry(c.len()).or_default().push(c);
    }
    m
}

/// Every `b` with `b⁻¹ a b = t` (left-to-right), i.e. `t(b(x)) = b(a(x))`.
/// Empty when `a` and `t` are not conjugate.
pub fn all_conjugators(a: &Permutation, t: &Permutation) -> Vec<Permutation> {
    let (ca, ct) = (cycles_by_length(a), cycles_by_length(t));
    if ca.iter().map(|(l, v)| (*l, v.len())).ne(ct.iter().map(|(l, v)| (*l, v.len()))) {
        return Vec::new();
    }
    let source: Vec<&Vec<u32>> = ca.values().flatten().collect();
    let mut out = Vec::new();
    let mut images = vec![0u32; a.len()];
    let mut used: BTreeMap<usize, Vec<bool>> =
        ct.iter().map(|(l, v)| (*l, vec![false; v.len()])).collect();

    fn rec(
        k: usize,
        source: &[&Vec<u32>],
        ct: &BTreeMap<usize, Vec<Vec<u32>>>,
        used: &mut BTreeMap<usize, Vec<bool>>,
        images: &mut Vec<u32>,
        out: &mut Vec<Permutation>,
    ) {
        if k == source.len() {
            out.push(Permutation::from_images_unchecked(images.clone()));
            return;
        }
        let cycle = source[k];
        let len = cycle.len();
        for j in 0..ct[&len].len() {
            if used[&len][j] {
                continue;
            }
            used.get_mut(&len).expect("length present")[j] = true;
            let target = &ct[&len][j];
            for rot in 0..len {
                for (i, &x) in cycle.iter().enumerate() {
                    images[x as usize] = target[(i + rot) % len];
                }
                rec(k + 1, source, ct, used, images, out);
            }
            used.get_mut(&len).expect("length present")[j] = false;
        }
    }
    rec(0, &source, &ct, &mut used, &mut images, &mut out);
    out
}

/// A uniformly random `b` with `b⁻¹ a b = t`, or `None` if there is none.
pub fn random_conjugator<R: Rng + ?Sized>(
    a: &Permutation,
    t: &Permutation,
    rng: &mut R,
) -> Option<Permutation> {
    let (ca, mut ct) = (cycles_by_length(a), cycles_by_length(t));
    if ca.iter().map(|(l, v)| (*l, v.len())).ne(ct.iter().map(|(l, v)| (*l, v.len()))) {
        return None;
    }
    let mut images = vec![0u32; a.len()];
    for (len, sources) in &ca {
        let targets = ct.get_mut(len).expect("same lengths");
        targets.shuffle(rng);
        for (cycle, target) in sources.iter().zip(targets.iter()) {
            let rot = rng.gen_range(0..*len);
            for (i, &x) in cycle.iter().enumerate() {
                images[x as usize] = target[(i + rot) % len];
            }
        }
    }
    Some(Permutation::from_images_unchecked(images))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::commutator;

    #[test]
    fn rank_round_trip() {
        let g = SymmetricGroup::new(5);
        assert_eq!(g.order(), 120);
        for (r, p) in g.elements().iter().enumerate() {
            assert_eq!(g.rank(p), r);
        }
        assert!(g.element(0).is_identity());
    }

    #[test]
    fn bucket_sizes_small() {
        let b2 = build_buckets(2, &Budget::default()).unwrap();
        assert_eq!(b2.len_of(0), 4);
        assert_eq!(b2.total(), 4);
        let b3 = build_buckets(3, &Budget::default()).unwrap();
        assert_eq!(b3.len_of(0), 18);
        assert_eq!(b3.total(), 36);
        for (r, p) in b3.group().elements().iter().enumerate() {
            for (a, b) in b3.pairs(p) {
                assert_eq!(commutator(&a, &b).unwrap(), *p);
            }
            let expected = match p.cycle_type().parts() {
                [1, 1, 1] => 18,
                [2, 1] => 0,
                _ => 9,
            };
            assert_eq!(b3.len_of(r), expected);
        }
    }

    #[test]
    fn counts_only_buckets_regenerate_pairs() {
        let budget = Budget {
            max_materialized_n: 3,
            ..Budget::default()
        };
        let stored = build_buckets(4, &Budget::default()).unwrap();
        let counted = build_buckets(4, &budget).unwrap();
        assert!(stored.is_materialized());
        assert!(!counted.is_materialized());
        assert_eq!(counted.total(), 576);
        for s in 0..24 {
            assert_eq!(stored.len_of(s), counted.len_of(s));
            let mut x = Vec::new();
            let mut y = Vec::new();
            stored.for_each_pair(s, |a, b| x.push((a, b)));
            counted.for_each_pair(s, |a, b| y.push((a, b)));
            x.sort();
            y.sort();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn oversized_buckets_rejected() {
        assert!(matches!(
            build_buckets(10, &Budget::default()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn conjugators_are_exactly_the_centralizer_coset() {
        let g = SymmetricGroup::new(4);
        let a = Permutation::parse_cycles("(1 2)(3 4)", 4).unwrap();
        let t = Permutation::parse_cycles("(1 3)(2 4)", 4).unwrap();
        let mut expected: Vec<Permutation> = g
            .elements()
            .iter()
            .filter(|b| a.conjugate(b).unwrap() == t)
            .cloned()
            .collect();
        let mut got = all_conjugators(&a, &t);
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(got.len(), 8);
        let not_conj = Permutation::parse_cycles("(1 2)", 4).unwrap();
        assert!(all_conjugators(&a, &not_conj).is_empty());
    }
}
