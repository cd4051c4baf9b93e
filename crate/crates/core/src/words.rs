//! Words in the surface group `⟨a1, b1, ..., ag, bg | [a1,b1]...[ag,bg]⟩`.
//!
//! Generator `a_{i+1}` has dense index `2i`, `b_{i+1}` has index `2i + 1`.
//! Commutators follow the left-to-right permutation convention used in
//! [`crate::perm`]: `[x, y] = x⁻¹ y⁻¹ x y`, so the relator word is
//! `a1' b1' a1 b1 a2' b2' a2 b2 ...`.
//!
//! The word problem is solved with Dehn's algorithm, which is correct for the
//! surface relator when `g >= 2` (pieces have length one, so the presentation is
//! C'(1/6)).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Genus of the closed orientable surface, always at least 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Genus(u32);

impl Genus {
    pub fn new(g: u32) -> Result<Self> {
        if g < 2 {
            return Err(Error::InvalidGenus(g));
        }
        Ok(Genus(g))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Number of generators, `2g`.
    pub fn generator_count(self) -> usize {
        2 * self.0 as usize
    }

    /// The relator `[a1,b1]...[ag,bg]` as a word.
    pub fn relator(self) -> Word {
        let mut letters = Vec::with_capacity(4 * self.0 as usize);
        for i in 0..self.0 as usize {
            let a = Letter::new(2 * i, false);
            let b = Letter::new(2 * i + 1, false);
            letters.extend([a.inverse(), b.inverse(), a, b]);
        }
        Word {
            letters,
            genus: self,
        }
    }
}

impl TryFrom<u32> for Genus {
    type Error = Error;

    fn try_from(g: u32) -> Result<Self> {
        Genus::new(g)
    }
}

impl From<Genus> for u32 {
    fn from(g: Genus) -> u32 {
        g.0
    }
}

impl fmt::Display for Genus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    generator: u32,
    inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter {
            generator: generator as u32,
            inverse,
        }
    }

    pub fn generator(self) -> usize {
        self.generator as usize
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    /// `+1` for a generator, `-1` for an inverse generator.
    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.generator % 2 == 0 { 'a' } else { 'b' };
        write!(f, "{}{}", name, self.generator / 2 + 1)?;
        if self.inverse {
            write!(f, "'")?;
        }
        Ok(())
    }
}

/// A freely reduced word over the surface-group generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
    genus: Genus,
}

/// Exponent-sum vector of a word, i.e. its image in `H1 = Z^{2g}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianImage(pub Vec<i64>);

impl AbelianImage {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn negated(&self) -> AbelianImage {
        AbelianImage(self.0.iter().map(|x| -x).collect())
    }

    /// Gcd of the absolute entries; zero for the zero vector.
    pub fn content(&self) -> u64 {
        self.0
            .iter()
            .fold(0i64, |acc, &x| acc.gcd(&x))
            .unsigned_abs()
    }

    /// The image divided by its content; the zero vector is unchanged.
    pub fn direction(&self) -> AbelianImage {
        let c = self.content() as i64;
        if c == 0 {
            return self.clone();
        }
        AbelianImage(self.0.iter().map(|x| x / c).collect())
    }
}

/// Outcome of a sound but incomplete certificate check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// The property is proven.
    Certified,
    /// The cheap invariant could not decide.
    Unknown,
}

/// A word written as `base^exponent`, together with whatever is known about
/// primitivity of the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerClaim {
    pub base: Word,
    pub exponent: u32,
    pub primitive: Certificate,
}

impl PowerClaim {
    pub fn new(base: Word, exponent: u32) -> Result<Self> {
        let primitive = primitivity_certificate(&base)?;
        if exponent < 1 {
            return Err(Error::InvalidExponent(exponent as i64));
        }
        Ok(PowerClaim {
            base,
            exponent,
            primitive,
        })
    }

    pub fn word(&self) -> Word {
        self.base
            .power(self.exponent)
            .expect("exponent validated at construction")
    }
}

impl Word {
    /// Freely reduces `raw` into a word; fails if a generator index is out of
    /// range for `genus`.
    pub fn free_reduce(raw: &[Letter], genus: Genus) -> Result<Word> {
        let limit = genus.generator_count();
        let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
        for &letter in raw {
            if letter.generator() >= limit {
                return Err(Error::GeneratorOutOfRange {
                    index: letter.generator(),
                    genus: genus.get(),
                });
            }
            match out.last() {
                Some(&last) if last.cancels(letter) => {
                    out.pop();
                }
                _ => out.push(letter),
            }
        }
        Ok(Word {
            letters: out,
            genus,
        })
    }

    pub fn identity(genus: Genus) -> Word {
        Word {
            letters: Vec::new(),
            genus,
        }
    }

    /// The single-letter word for generator `index` (0-based dense index).
    pub fn generator(index: usize, genus: Genus) -> Result<Word> {
        Word::free_reduce(&[Letter::new(index, false)], genus)
    }

    /// Parses the text syntax `a1^2 b1' a2`: generators `a<i>`/`b<i>` with
    /// 1-based index, a `'` suffix for the inverse and an optional `^k`
    /// power (negative `k` inverts). The empty string and `1` denote the
    /// identity.
    pub fn parse(text: &str, genus: Genus) -> Result<Word> {
        let mut raw = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        let err = |msg: &str| Error::WordParse(format!("{msg} in {text:?}"));
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(Word::identity(genus));
        }
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c == '*' || c == '.' {
                i += 1;
                continue;
            }
            let offset = match c {
                'a' => 0,
                'b' => 1,
                _ => return Err(err(&format!("unexpected character {c:?}"))),
            };
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(err("missing generator index"));
            }
            let index: usize = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| err("bad generator index"))?;
            if index == 0 || index > genus.get() as usize {
                return Err(Error::GeneratorOutOfRange {
                    index,
                    genus: genus.get(),
                });
            }
            let mut inverse = false;
            if i < chars.len() && chars[i] == '\'' {
                inverse = true;
                i += 1;
            }
            let mut power: i64 = 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                if i < chars.len() && chars[i] == '-' {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                power = chars[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| err("bad exponent"))?;
            }
            if power < 0 {
                inverse = !inverse;
            }
            let letter = Letter::new(2 * (index - 1) + offset, inverse);
            raw.extend(std::iter::repeat(letter).take(power.unsigned_abs() as usize));
        }
        Word::free_reduce(&raw, genus)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn genus(&self) -> Genus {
        self.genus
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
            genus: self.genus,
        }
    }

    /// Free reduction of the concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.genus != other.genus {
            return Err(Error::GenusMismatch {
                expected: self.genus.get(),
                found: other.genus.get(),
            });
        }
        let mut raw = self.letters.clone();
        raw.extend_from_slice(&other.letters);
        Word::free_reduce(&raw, self.genus)
    }

    /// `c⁻¹ · self · c`, freely reduced.
    pub fn conjugate_by(&self, c: &Word) -> Result<Word> {
        c.inverse().concat(self)?.concat(c)
    }

    /// Strips matching inverse letters from both ends; the result is a
    /// conjugate of `self`.
    pub fn cyclic_reduce(&self) -> Word {
        let l = &self.letters;
        let (mut lo, mut hi) = (0, l.len());
        while hi - lo >= 2 && l[lo].cancels(l[hi - 1]) {
            lo += 1;
            hi -= 1;
        }
        Word {
            letters: l[lo..hi].to_vec(),
            genus: self.genus,
        }
    }

    /// Dehn's algorithm: repeatedly replaces the first subword that is more
    /// than half of a cyclic relator rotation by the inverse of the
    /// complementary part, then freely reduces, until no such subword exists.
    /// The result is empty iff `self` is trivial in the group.
    pub fn dehn_reduce(&self) -> Word {
        let rotations = relator_rotations(self.genus);
        let half = 2 * self.genus.get() as usize;
        let mut letters = self.letters.clone();
        'outer: loop {
            for i in 0..letters.len() {
                let tail = &letters[i..];
                if tail.len() <= half {
                    break;
                }
                let best = rotations
                    .iter()
                    .map(|r| {
                        let common = r.iter().zip(tail).take_while(|(x, y)| x == y).count();
                        (common, r)
                    })
                    .max_by_key(|(common, _)| *common);
                if let Some((common, rotation)) = best {
                    if common > half {
                        let replacement = rotation[common..].iter().rev().map(|l| l.inverse());
                        let mut next: Vec<Letter> = letters[..i].to_vec();
                        next.extend(replacement);
                        next.extend_from_slice(&letters[i + common..]);
                        letters = Word::free_reduce(&next, self.genus)
                            .expect("letters already validated")
                            .letters;
                        continue 'outer;
                    }
                }
            }
            break;
        }
        Word {
            letters,
            genus: self.genus,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.dehn_reduce().is_empty()
    }

    pub fn abelianize(&self) -> AbelianImage {
        let mut v = vec![0i64; self.genus.generator_count()];
        for l in &self.letters {
            v[l.generator()] += l.sign();
        }
        AbelianImage(v)
    }

    /// Free reduction of `self` repeated `exponent` times.
    pub fn power(&self, exponent: u32) -> Result<Word> {
        if exponent < 1 {
            return Err(Error::InvalidExponent(exponent as i64));
        }
        let mut raw = Vec::with_capacity(self.letters.len() * exponent as usize);
        for _ in 0..exponent {
            raw.extend_from_slice(&self.letters);
        }
        Word::free_reduce(&raw, self.genus)
    }
}

impl fmt::Display for Word {
    /// Prints in the parser's syntax, collapsing runs into `^k`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{l}")?;
            if run > 1 {
                write!(f, "^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// All `4g` cyclic rotations of the relator and of its inverse.
fn relator_rotations(genus: Genus) -> Arc<Vec<Vec<Letter>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<Vec<Letter>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(genus.get())
        .or_insert_with(|| {
            let rel = genus.relator();
            let inv = rel.inverse();
            let mut out = Vec::with_capacity(2 * rel.len());
            for base in [rel.letters(), inv.letters()] {
                for k in 0..base.len() {
                    let mut r = base[k..].to_vec();
                    r.extend_from_slice(&base[..k]);
                    out.push(r);
                }
            }
            Arc::new(out)
        })
        .clone()
}

/// Sound certificate that `u` and `v` are distinct in `P0`, i.e. `u` is not
/// conjugate to `v` or `v⁻¹`. Only ever certifies when the abelian images
/// differ up to sign.
pub fn distinct_in_p0_certificate(u: &Word, v: &Word) -> Result<Certificate> {
    if u.is_identity() || v.is_identity() {
        return Err(Error::IdentityWord);
    }
    let (au, av) = (u.abelianize(), v.abelianize());
    if au != av && au != av.negated() {
        Ok(Certificate::Certified)
    } else {
        Ok(Certificate::Unknown)
    }
}

/// Sound certificate that `w` is not a proper power: a proper power `x^k`
/// has abelian image divisible by `k`, so content 1 rules it out.
pub fn primitivity_certificate(w: &Word) -> Result<Certificate> {
    if w.is_identity() {
        return Err(Error::IdentityWord);
    }
    if w.abelianize().content() == 1 {
        Ok(Certificate::Certified)
    } else {
        Ok(Certificate::Unknown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2() -> Genus {
        Genus::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, g2()).unwrap()
    }

    #[test]
    fn genus_below_two_rejected() {
        assert_eq!(Genus::new(1), Err(Error::InvalidGenus(1)));
        assert_eq!(Genus::new(0), Err(Error::InvalidGenus(0)));
    }

    #[test]
    fn free_reduction_examples() {
        assert!(w("a1 a1'").is_empty());
        assert_eq!(w("a1 b1 b1' a1"), w("a1^2"));
        assert_eq!(w("a1 b1 a2").len(), 3);
        let bad = Word::free_reduce(&[Letter::new(4, false)], g2());
        assert!(matches!(bad, Err(Error::GeneratorOutOfRange { index: 4, .. })));
    }

    #[test]
    fn cyclic_reduction_examples() {
        assert_eq!(w("a1 b1 a1'").cyclic_reduce(), w("b1"));
        assert_eq!(w("b1 a2").cyclic_reduce(), w("b1 a2"));
        assert_eq!(w("a1 a1").cyclic_reduce(), w("a1^2"));
    }

    #[test]
    fn relator_reduces_to_identity() {
        for g in 2..5 {
            let genus = Genus::new(g).unwrap();
            assert!(genus.relator().dehn_reduce().is_empty());
            assert!(genus.relator().inverse().is_identity());
        }
    }

    #[test]
    fn single_commutator_is_dehn_reduced() {
        // length 4 is exactly half the relator, so no replacement applies
        let c = w("a1' b1' a1 b1");
        assert_eq!(c.dehn_reduce(), c);
        assert!(!w("a1 b1 a1' b1'").is_identity());
        assert_eq!(w("a1").dehn_reduce(), w("a1"));
        assert!(!w("a1").is_identity());
    }

    #[test]
    fn dehn_shortens_long_relator_pieces() {
        // five letters of the relator equal the inverse of the remaining three
        let long = w("a1' b1' a1 b1 a2'");
        let reduced = long.dehn_reduce();
        assert_eq!(reduced, w("b2' a2 b2").inverse());
        assert_eq!(reduced.len(), 3);
    }

    #[test]
    fn conjugated_relator_is_identity() {
        let rel = g2().relator();
        let c = w("a2 b1^3 a1'");
        assert!(rel.conjugate_by(&c).unwrap().is_identity());
        let prod = w("a1 b2").concat(&rel).unwrap().concat(&w("b2' a1'")).unwrap();
        assert!(prod.is_identity());
    }

    #[test]
    fn abelianization_examples() {
        assert_eq!(w("a1^2 b2'").abelianize(), AbelianImage(vec![2, 0, 0, -1]));
        assert!(g2().relator().abelianize().is_zero());
        assert!(w("").abelianize().is_zero());
    }

    #[test]
    fn distinctness_certificates() {
        use Certificate::*;
        assert_eq!(distinct_in_p0_certificate(&w("a1"), &w("a2")), Ok(Certified));
        assert_eq!(distinct_in_p0_certificate(&w("a1"), &w("a1'")), Ok(Unknown));
        assert_eq!(distinct_in_p0_certificate(&w("a1 b1"), &w("b1 a1")), Ok(Unknown));
        assert_eq!(
            distinct_in_p0_certificate(&w("1"), &w("a1")),
            Err(Error::IdentityWord)
        );
    }

    #[test]
    fn primitivity_certificates() {
        use Certificate::*;
        assert_eq!(primitivity_certificate(&w("a1")), Ok(Certified));
        assert_eq!(primitivity_certificate(&w("a1^2")), Ok(Unknown));
        assert_eq!(primitivity_certificate(&w("a1 b2")), Ok(Certified));
        assert_eq!(
            primitivity_certificate(&g2().relator()),
            Err(Error::IdentityWord)
        );
    }

    #[test]
    fn power_examples() {
        assert_eq!(w("a1").power(3).unwrap(), w("a1 a1 a1"));
        assert_eq!(w("a1 b1 a1'").power(2).unwrap(), w("a1 b1 b1 a1'"));
        let x = w("a2 b1'");
        assert_eq!(x.power(1).unwrap(), x);
        assert_eq!(x.power(0), Err(Error::InvalidExponent(0)));
    }

    #[test]
    fn parse_and_display_round_trip() {
        let x = w("a1^2 b1' a2");
        assert_eq!(x.to_string(), "a1^2 b1' a2");
        assert_eq!(w(&x.to_string()), x);
        assert_eq!(w("a1^-2"), w("a1' a1'"));
        assert_eq!(w("a1'^2"), w("a1^-2"));
        assert!(Word::parse("c1", g2()).is_err());
        assert!(Word::parse("a3", g2()).is_err());
        assert!(Word::parse("a0", g2()).is_err());
        assert_eq!(w("1").to_string(), "1");
    }

    #[test]
    fn power_claim_certifies_base() {
        let claim = PowerClaim::new(w("a1 b2"), 3).unwrap();
        assert_eq!(claim.primitive, Certificate::Certified);
        assert_eq!(claim.word(), w("a1 b2 a1 b2 a1 b2"));
    }
}
