//! Permutations of `{0, ..., n-1}`, cycle statistics, and homomorphism points.
//!
//! Products are composed left to right: `compose(p, q)` applies `p` first and
//! then `q`, so it maps `i` to `q(p(i))`. This is the convention under which
//! `γ ↦ φ(γ)` is a homomorphism when permutations are read off path lifts.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::words::{Genus, Word};

/// Cycle type of a permutation, as a weakly decreasing partition of `n`.
pub type CycleType = Partition;

/// A bijection of `{0, ..., n-1}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n as u32).collect(),
        }
    }

    /// Validates that `images` is a bijection of `0..images.len()`.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!("{images:?}")));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Permutation::from_images(images.clone()).is_ok());
        Permutation { images }
    }

    /// Builds a permutation from 0-based cycles; unmentioned points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<u32>]) -> Result<Self> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                let x = x as usize;
                if x >= n || touched[x] {
                    return Err(Error::InvalidPermutation(format!("{cycles:?}")));
                }
                touched[x] = true;
                images[x] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Permutation { images })
    }

    /// Parses 1-based cycle notation such as `(1 2 3)(4 5)`. Commas are
    /// accepted as separators; `()` is the identity.
    pub fn parse_cycles(text: &str, n: usize) -> Result<Self> {
        let bad = || Error::InvalidPermutation(text.to_string());
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(bad)?;
            let close = open.find(')').ok_or_else(bad)?;
            let cycle = open[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| match s.parse::<u32>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<u32>>>()?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = open[close + 1..].trim_start();
        }
        Permutation::from_cycles(n, &cycles)
    }

    /// Uniformly random permutation.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut images: Vec<u32> = (0..n as u32).collect();
        images.shuffle(rng);
        Permutation { images }
    }

    /// Uniformly random element of the conjugacy class `class`: a uniform
    /// shuffle cut into consecutive cycles of the prescribed lengths.
    pub fn random_in_class<R: Rng + ?Sized>(class: &CycleType, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let n = class.size();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(rng);
        let mut images = vec![0u32; n];
        let mut start = 0;
        for &len in class.parts() {
            let len = len as usize;
            let cycle = &order[start..start + len];
            for k in 0..len {
                images[cycle[k] as usize] = cycle[(k + 1) % len];
            }
            start += len;
        }
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    fn check_size(&self, other: &Permutation) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch(self.len(), other.len()));
        }
        Ok(())
    }

    /// `self` then `other`: maps `i` to `other(self(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        self.check_size(other)?;
        Ok(self.then(other))
    }

    /// Unchecked form of [`Permutation::compose`].
    #[inline]
    pub(crate) fn then(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&x| other.images[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u32; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u32;
        }
        Permutation { images }
    }

    /// `by⁻¹ · self · by` under the left-to-right convention.
    pub fn conjugate(&self, by: &Permutation) -> Result<Permutation> {
        self.check_size(by)?;
        Ok(by.inverse().then(self).then(by))
    }

    /// `self^k` for `k >= 0`.
    pub fn pow(&self, k: u32) -> Permutation {
        let mut result = Permutation::identity(self.len());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.then(&base);
            }
            base = base.then(&base);
            k >>= 1;
        }
        result
    }

    /// Lengths of all cycles, in order of their smallest element.
    pub fn cycle_lengths(&self) -> Vec<u32> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x] as usize;
                len += 1;
            }
            lengths.push(len);
        }
        lengths
    }

    /// Cycles as 0-based point lists, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x as u32);
                x = self.images[x] as usize;
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        Partition::from_unsorted(self.cycle_lengths())
    }

    pub fn fix_count(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &x)| i as u32 == x)
            .count()
    }

    /// Number of cycles of length exactly `d`, for `1 <= d <= n`.
    pub fn d_cycle_count(&self, d: usize) -> Result<usize> {
        if d < 1 || d > self.len() {
            return Err(Error::CycleLengthOutOfRange { d, n: self.len() });
        }
        Ok(self
            .cycle_lengths()
            .iter()
            .filter(|&&len| len as usize == d)
            .count())
    }

    /// Sign as `+1` or `-1`.
    pub fn sign(&self) -> i32 {
        let transpositions: usize = self.cycle_lengths().iter().map(|&l| l as usize - 1).sum();
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// The commutator `a⁻¹ b⁻¹ a b`, composed left to right; this agrees with
/// evaluating the word `x' y' x y` at `x ↦ a, y ↦ b`.
pub fn commutator(a: &Permutation, b: &Permutation) -> Result<Permutation> {
    a.check_size(b)?;
    Ok(commutator_unchecked(a, b))
}

#[inline]
pub(crate) fn commutator_unchecked(a: &Permutation, b: &Permutation) -> Permutation {
    // (a⁻¹ b⁻¹ a b)(i) = b(a(b⁻¹(a⁻¹(i))))
    let n = a.len();
    let mut a_inv = vec![0u32; n];
    let mut b_inv = vec![0u32; n];
    for i in 0..n {
        a_inv[a.images[i] as usize] = i as u32;
        b_inv[b.images[i] as usize] = i as u32;
    }
    let images = (0..n)
        .map(|i| {
            let x = b_inv[a_inv[i] as usize] as usize;
            b.images[a.images[x] as usize]
        })
        .collect();
    Permutation { images }
}

impl fmt::Display for Permutation {
    /// 1-based cycle notation with fixed points omitted; `()` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles() {
            if cycle.len() < 2 {
                continue;
            }
            any = true;
            write!(f, "(")?;
            for (k, x) in cycle.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", x + 1)?;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[n={}]{}", self.len(), self)
    }
}

/// A homomorphism `Γ → S_n`, stored as the images of `a1, b1, ..., ag, bg`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomPoint {
    images: Vec<Permutation>,
    genus: Genus,
    n: usize,
}

impl HomPoint {
    /// Validates sizes and the relator `[a1,b1]...[ag,bg] = 1`.
    pub fn new(genus: Genus, images: Vec<Permutation>) -> Result<Self> {
        if images.len() != genus.generator_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} generator images, got {}",
                genus.generator_count(),
                images.len()
            )));
        }
        let n = images[0].len();
        for p in &images {
            if p.len() != n {
                return Err(Error::SizeMismatch(n, p.len()));
            }
        }
        let point = HomPoint { images, genus, n };
        if !point.relator_image().is_identity() {
            return Err(Error::RelatorViolated);
        }
        Ok(point)
    }

    pub(crate) fn new_unchecked(genus: Genus, images: Vec<Permutation>) -> Self {
        let n = images[0].len();
        HomPoint { images, genus, n }
    }

    pub(crate) fn images_mut(&mut self) -> &mut [Permutation] {
        &mut self.images
    }

    pub fn images(&self) -> &[Permutation] {
        &self.images
    }

    pub fn genus(&self) -> Genus {
        self.genus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Product of the generator commutators; the identity for a valid point.
    pub fn relator_image(&self) -> Permutation {
        let mut acc = Permutation::identity(self.n);
        for pair in self.images.chunks(2) {
            acc = acc.then(&commutator_unchecked(&pair[0], &pair[1]));
        }
        acc
    }

    pub fn satisfies_relator(&self) -> bool {
        self.relator_image().is_identity()
    }

    /// `φ(w)`: the product of generator images letter by letter, left to right.
    pub fn evaluate(&self, w: &Word) -> Result<Permutation> {
        if w.genus() != self.genus {
            return Err(Error::GenusMismatch {
                expected: self.genus.get(),
                found: w.genus().get(),
            });
        }
        let n = self.n;
        let inverses: Vec<Option<Permutation>> = {
            let mut v = vec![None; self.images.len()];
            for l in w.letters() {
                if l.is_inverse() && v[l.generator()].is_none() {
                    v[l.generator()] = Some(self.images[l.generator()].inverse());
                }
            }
            v
        };
        // track where each starting point goes
        let mut images: Vec<u32> = (0..n as u32).collect();
        for l in w.letters() {
            let g = if l.is_inverse() {
                inverses[l.generator()].as_ref().expect("prepared above")
            } else {
                &self.images[l.generator()]
            };
            for x in images.iter_mut() {
                *x = g.images[*x as usize];
            }
        }
        Ok(Permutation { images })
    }
}

/// Free-function form of [`HomPoint::evaluate`].
pub fn evaluate_word(h: &HomPoint, w: &Word) -> Result<Permutation> {
    h.evaluate(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(text: &str, n: usize) -> Permutation {
        Permutation::parse_cycles(text, n).unwrap()
    }

    #[test]
    fn compose_examples() {
        let id = Permutation::identity(3);
        let q = p("(1 2)", 3);
        assert_eq!(id.compose(&q).unwrap(), q);
        let t = p("(1 2)", 2);
        assert!(t.compose(&t).unwrap().is_identity());
        // 0→1→0, 1→2→2, 2→0→1: swaps the last two points
        let c = p("(1 2 3)", 3).compose(&p("(1 2)", 3)).unwrap();
        assert_eq!(c.images(), &[0, 2, 1]);
        assert_eq!(c, p("(2 3)", 3));
        assert!(matches!(
            id.compose(&Permutation::identity(4)),
            Err(Error::SizeMismatch(3, 4))
        ));
    }

    #[test]
    fn inverse_examples() {
        assert!(Permutation::identity(4).inverse().is_identity());
        assert_eq!(p("(1 2 3)", 3).inverse(), p("(1 3 2)", 3));
    }

    #[test]
    fn cycle_statistics() {
        let id = Permutation::identity(5);
        assert_eq!(id.fix_count(), 5);
        let c = p("(1 2 3)", 3);
        assert_eq!(c.d_cycle_count(3).unwrap(), 1);
        assert_eq!(c.fix_count(), 0);
        let x = p("(1 2)(3 4)", 5);
        assert_eq!(x.cycle_type().parts(), &[2, 2, 1]);
        assert_eq!(x.fix_count(), 1);
        assert_eq!(x.d_cycle_count(2).unwrap(), 2);
        assert!(x.d_cycle_count(0).is_err());
        assert!(x.d_cycle_count(6).is_err());
    }

    #[test]
    fn commutator_examples() {
        let a = p("(1 2)", 3);
        let b = p("(2 3)", 3);
        let c = commutator(&a, &b).unwrap();
        assert_eq!(c.cycle_type().parts(), &[3]);
        // a⁻¹b⁻¹ab = (a b)^2 for involutions; here ab = (1 2)(2 3) left to right
        let ab = a.compose(&b).unwrap();
        assert_eq!(c, ab.compose(&ab).unwrap());
        assert!(commutator(&a, &a).unwrap().is_identity());
        let d = p("(1 2)(3 4)", 4);
        let e = p("(3 4)", 4);
        assert!(commutator(&d, &e).unwrap().is_identity());
    }

    #[test]
    fn conjugation_preserves_cycle_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(1..12);
            let x = Permutation::random(n, &mut rng);
            let c = Permutation::random(n, &mut rng);
            let y = x.conjugate(&c).unwrap();
            assert_eq!(x.cycle_type(), y.cycle_type());
            assert_eq!(y, c.inverse().compose(&x).unwrap().compose(&c).unwrap());
        }
    }

    #[test]
    fn random_in_class_has_requested_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let class = Partition::new(vec![3, 2, 2, 1]).unwrap();
        for _ in 0..50 {
            assert_eq!(Permutation::random_in_class(&class, &mut rng).cycle_type(), class);
        }
    }

    #[test]
    fn cycle_notation_round_trip() {
        let x = p("(1 4 2)(3 5)", 6);
        assert_eq!(x.to_string(), "(1 4 2)(3 5)");
        assert_eq!(p(&x.to_string(), 6), x);
        assert_eq!(Permutation::identity(3).to_string(), "()");
        assert!(Permutation::parse_cycles("(1 1)", 3).is_err());
        assert!(Permutation::parse_cycles("(1 4)", 3).is_err());
        assert!(Permutation::parse_cycles("1 2", 3).is_err());
    }

    #[test]
    fn pow_matches_repeated_compose() {
        let x = p("(1 2 3 4 5)(6 7)", 8);
        let mut acc = Permutation::identity(8);
        for k in 0..12 {
            assert_eq!(x.pow(k), acc);
            acc = acc.then(&x);
        }
    }

    #[test]
    fn hom_point_validation() {
        let g = Genus::new(2).unwrap();
        let t = p("(1 2)", 2);
        let id = Permutation::identity(2);
        let h = HomPoint::new(g, vec![t.clone(), id.clone(), t.clone(), t.clone()]).unwrap();
        assert!(h.satisfies_relator());
        let a = p("(1 2)", 3);
        let b = p("(2 3)", 3);
        let i3 = Permutation::identity(3);
        assert_eq!(
            HomPoint::new(g, vec![a, b, i3.clone(), i3]),
            Err(Error::RelatorViolated)
        );
    }

    #[test]
    fn evaluate_word_examples() {
        let g = Genus::new(2).unwrap();
        let a = p("(1 2 3)", 3);
        let id = Permutation::identity(3);
        let h = HomPoint::new(g, vec![a.clone(), id.clone(), id.clone(), id]).unwrap();
        let w = |s: &str| Word::parse(s, g).unwrap();
        assert!(h.evaluate(&w("a1 a1'")).unwrap().is_identity());
        assert_eq!(h.evaluate(&w("a1")).unwrap(), a);
        assert_eq!(h.evaluate(&w("a1'")).unwrap(), a.inverse());
        assert!(h.evaluate(&g.relator()).unwrap().is_identity());
        let g3 = Genus::new(3).unwrap();
        assert!(h.evaluate(&Word::parse("a1", g3).unwrap()).is_err());
    }
}
