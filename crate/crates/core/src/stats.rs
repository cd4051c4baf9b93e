//! Observables on homomorphism points: fixed points `F(γ)`, `d`-cycle counts
//! `C_d(γ)`, products of fixed-point counts of powers, and the Möbius
//! inversion relating the two.

use std::collections::BTreeMap;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::HomPoint;
use crate::words::{distinct_in_p0_certificate, primitivity_certificate, Certificate, Genus, Word};

/// Number of fixed points of `φ(w)`. Rejects the identity word.
#[allow(non_snake_case)]
pub fn F(h: &HomPoint, w: &Word) -> Result<usize> {
    if w.is_identity() {
        return Err(Error::IdentityWord);
    }
    Ok(h.evaluate(w)?.fix_count())
}

/// Number of `d`-cycles of `φ(w)`.
#[allow(non_snake_case)]
pub fn C(h: &HomPoint, w: &Word, d: usize) -> Result<usize> {
    if w.is_identity() {
        return Err(Error::IdentityWord);
    }
    h.evaluate(w)?.d_cycle_count(d)
}

/// Checks `F(w^a) = Σ_{d|a} d·C_d(w)` on one point, evaluating `w^a` as a
/// word rather than through the cycle structure of `φ(w)`.
pub fn power_identity_check(h: &HomPoint, w: &Word, a: u32) -> Result<bool> {
    let lhs = h.evaluate(&w.power(a)?)?.fix_count();
    let image = h.evaluate(w)?;
    let n = h.n();
    let rhs: usize = divisors(a)
        .into_iter()
        .filter(|&d| d as usize <= n)
        .map(|d| d as usize * image.d_cycle_count(d as usize).expect("d <= n"))
        .sum();
    Ok(lhs == rhs)
}

/// Möbius function.
pub fn mobius(n: u64) -> Result<i32> {
    if n < 1 {
        return Err(Error::InvalidArgument("mobius of 0".into()));
    }
    let mut m = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return Ok(0);
            }
            sign = -sign;
        }
        p += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    Ok(sign)
}

/// Positive divisors in increasing order.
pub fn divisors(a: u32) -> Vec<u32> {
    (1..=a).filter(|d| a % d == 0).collect()
}

/// Number of positive divisors.
pub fn d_count(a: u32) -> usize {
    divisors(a).len()
}

/// `C_r = (1/r) Σ_{d|r} μ(d) F(r/d)`, where `fixed_points[q]` holds `F(γ^q)`.
pub fn cycles_from_fixed_points(fixed_points: &BTreeMap<u32, i64>, r: u32) -> Result<i64> {
    if r < 1 {
        return Err(Error::InvalidExponent(r as i64));
    }
    let mut total: i64 = 0;
    for d in divisors(r) {
        let f = fixed_points
            .get(&(r / d))
            .ok_or(Error::MissingDivisor(r / d))?;
        total += mobius(d as u64)? as i64 * f;
    }
    if total % r as i64 != 0 {
        return Err(Error::NonIntegralCount(format!("{total}/{r}")));
    }
    Ok(total / r as i64)
}

/// Fixed points of `π^a` given the cycle lengths of `π`.
#[inline]
pub fn fixed_points_of_power(cycle_lengths: &[u32], a: u32) -> u32 {
    cycle_lengths.iter().filter(|&&l| a % l == 0).sum()
}

/// One factor group `(Π_j F(γ^{a_j}))^s` of an observable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableGroup {
    pub name: String,
    pub word: Word,
    pub exponents: Vec<u32>,
    pub power: u32,
}

/// The moment observable `Π_i (Π_j F(γ_i^{a_ij}))^{s_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableSpec {
    genus: Genus,
    groups: Vec<ObservableGroup>,
}

/// Hypotheses of the limit theorems that the cheap certificates could not
/// confirm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecWarning {
    PrimitivityUnknown { group: String },
    DistinctnessUnknown { first: String, second: String },
}

impl fmt::Display for SpecWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecWarning::PrimitivityUnknown { group } => {
                write!(f, "could not certify that {group} is primitive")
            }
            SpecWarning::DistinctnessUnknown { first, second } => {
                write!(f, "could not certify that {first} and {second} are distinct up to conjugation and inversion")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GroupDoc {
    name: String,
    word: String,
    #[serde(default = "default_exps")]
    exps: Vec<u32>,
    #[serde(default = "default_pow")]
    pow: u32,
}

fn default_exps() -> Vec<u32> {
    vec![1]
}

fn default_pow() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpecDoc {
    Groups(Vec<GroupDoc>),
    Object { groups: Vec<GroupDoc> },
}

impl ObservableSpec {
    pub fn new(genus: Genus, groups: Vec<ObservableGroup>) -> Result<Self> {
        for g in &groups {
            if g.word.genus() != genus {
                return Err(Error::GenusMismatch {
                    expected: genus.get(),
                    found: g.word.genus().get(),
                });
            }
            if g.word.is_identity() {
                return Err(Error::IdentityWord);
            }
            if g.exponents.is_empty() {
                return Err(Error::SpecParse(format!("group {} has no exponents", g.name)));
            }
            if let Some(&bad) = g.exponents.iter().find(|&&a| a < 1) {
                return Err(Error::InvalidExponent(bad as i64));
            }
            if g.power < 1 {
                return Err(Error::InvalidExponent(g.power as i64));
            }
        }
        Ok(ObservableSpec { genus, groups })
    }

    pub fn empty(genus: Genus) -> Self {
        ObservableSpec {
            genus,
            groups: Vec::new(),
        }
    }

    /// Convenience constructor from `(word text, exponents, power)` triples;
    /// groups are named `g1, g2, ...`.
    pub fn from_words(genus: Genus, groups: &[(&str, &[u32], u32)]) -> Result<Self> {
        let groups = groups
            .iter()
            .enumerate()
            .map(|(i, (w, exps, pow))| {
                Ok(ObservableGroup {
                    name: format!("g{}", i + 1),
                    word: Word::parse(w, genus)?,
                    exponents: exps.to_vec(),
                    power: *pow,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ObservableSpec::new(genus, groups)
    }

    /// Parses `gamma="a1" exps=[2,3] pow=1; delta="a2" exps=[4] pow=1`.
    /// `exps` defaults to `[1]` and `pow` to `1`.
    pub fn parse(text: &str, genus: Genus) -> Result<Self> {
        let head = Regex::new(r#"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*"([^"]*)"\s*(.*)$"#)
            .expect("valid regex");
        let exps_re = Regex::new(r"^exps\s*=\s*\[([^\]]*)\]\s*").expect("valid regex");
        let pow_re = Regex::new(r"^pow\s*=\s*(\d+)\s*").expect("valid regex");
        let mut groups = Vec::new();
        for chunk in text.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let caps = head
                .captures(chunk)
                .ok_or_else(|| Error::SpecParse(format!("expected name=\"word\" in {chunk:?}")))?;
            let name = caps[1].to_string();
            let word = Word::parse(&caps[2], genus)?;
            let mut rest = caps.get(3).map_or("", |m| m.as_str());
            let mut exponents = vec![1];
            let mut power = 1;
            while !rest.is_empty() {
                if let Some(c) = exps_re.captures(rest) {
                    exponents = c[1]
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.parse::<u32>()
                                .map_err(|_| Error::SpecParse(format!("bad exponent {s:?}")))
                        })
                        .collect::<Result<Vec<u32>>>()?;
                    rest = &rest[c.get(0).expect("match").end()..];
                } else if let Some(c) = pow_re.captures(rest) {
                    power = c[1]
                        .parse()
                        .map_err(|_| Error::SpecParse(format!("bad power {:?}", &c[1])))?;
                    rest = &rest[c.get(0).expect("match").end()..];
                } else {
                    return Err(Error::SpecParse(format!("unexpected {rest:?}")));
                }
            }
            groups.push(ObservableGroup {
                name,
                word,
                exponents,
                power,
            });
        }
        ObservableSpec::new(genus, groups)
    }

    /// Accepts either a JSON array of groups or `{"groups": [...]}`, each
    /// group `{"name", "word", "exps", "pow"}`.
    pub fn from_json(text: &str, genus: Genus) -> Result<Self> {
        let doc: SpecDoc =
            serde_json::from_str(text).map_err(|e| Error::SpecParse(e.to_string()))?;
        let docs = match doc {
            SpecDoc::Groups(g) | SpecDoc::Object { groups: g } => g,
        };
        let groups = docs
            .into_iter()
            .map(|d| {
                Ok(ObservableGroup {
                    name: d.name,
                    word: Word::parse(&d.word, genus)?,
                    exponents: d.exps,
                    power: d.pow,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ObservableSpec::new(genus, groups)
    }

    /// Parses either syntax, choosing JSON when the text starts with `[`/`{`.
    pub fn parse_any(text: &str, genus: Genus) -> Result<Self> {
        match text.trim_start().chars().next() {
            Some('[') | Some('{') => ObservableSpec::from_json(text, genus),
            _ => ObservableSpec::parse(text, genus),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let docs: Vec<GroupDoc> = self
            .groups
            .iter()
            .map(|g| GroupDoc {
                name: g.name.clone(),
                word: g.word.to_string(),
                exps: g.exponents.clone(),
                pow: g.power,
            })
            .collect();
        serde_json::to_value(docs).expect("plain data")
    }

    pub fn genus(&self) -> Genus {
        self.genus
    }

    pub fn groups(&self) -> &[ObservableGroup] {
        &self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// The spec restricted to group `i`.
    pub fn single_group(&self, i: usize) -> ObservableSpec {
        ObservableSpec {
            genus: self.genus,
            groups: vec![self.groups[i].clone()],
        }
    }

    /// Warnings for hypotheses that could not be certified.
    pub fn certificate_warnings(&self) -> Vec<SpecWarning> {
        let mut out = Vec::new();
        for g in &self.groups {
            if primitivity_certificate(&g.word) != Ok(Certificate::Certified) {
                out.push(SpecWarning::PrimitivityUnknown {
                    group: g.name.clone(),
                });
            }
        }
        for i in 0..self.groups.len() {
            for j in i + 1..self.groups.len() {
                let (a, b) = (&self.groups[i], &self.groups[j]);
                // the roots of γ and δ must differ too, so compare directions
                let (da, db) = (a.word.abelianize().direction(), b.word.abelianize().direction());
                let roots_differ = da != db && da != db.negated();
                if !roots_differ
                    || distinct_in_p0_certificate(&a.word, &b.word) != Ok(Certificate::Certified)
                {
                    out.push(SpecWarning::DistinctnessUnknown {
                        first: a.name.clone(),
                        second: b.name.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn evaluator(&self) -> SpecEvaluator<'_> {
        SpecEvaluator::new(self)
    }

    /// `Π_i (Π_j F(γ_i^{a_ij}))^{s_i}` on one point.
    pub fn joint_moment(&self, h: &HomPoint) -> Result<u128> {
        let eval = self.evaluator();
        let values = eval.group_values(h)?;
        eval.joint(&values)
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let exps: Vec<String> = g.exponents.iter().map(|a| a.to_string()).collect();
            write!(f, "{}=\"{}\" exps=[{}] pow={}", g.name, g.word, exps.join(","), g.power)?;
        }
        Ok(())
    }
}

/// Evaluates an [`ObservableSpec`] on many points. Each base word is
/// evaluated once per point; every requested power is read off its cycle
/// lengths.
#[derive(Debug)]
pub struct SpecEvaluator<'a> {
    spec: &'a ObservableSpec,
    // (distinct exponent, multiplicity) per group
    powers: Vec<Vec<(u32, u32)>>,
}

impl<'a> SpecEvaluator<'a> {
    fn new(spec: &'a ObservableSpec) -> Self {
        let powers = spec
            .groups
            .iter()
            .map(|g| {
                let mut m: BTreeMap<u32, u32> = BTreeMap::new();
                for &a in &g.exponents {
                    *m.entry(a).or_default() += 1;
                }
                m.into_iter().collect()
            })
            .collect();
        SpecEvaluator { spec, powers }
    }

    pub fn spec(&self) -> &ObservableSpec {
        self.spec
    }

    /// `(Π_j F(γ_i^{a_ij}))^{s_i}` for every group `i`.
    pub fn group_values(&self, h: &HomPoint) -> Result<Vec<u128>> {
        self.spec
            .groups
            .iter()
            .zip(&self.powers)
            .map(|(g, powers)| {
                let lengths = h.evaluate(&g.word)?.cycle_lengths();
                let mut value: u128 = 1;
                for &(a, mult) in powers {
                    let f = fixed_points_of_power(&lengths, a) as u128;
                    value = value
                        .checked_mul(f.checked_pow(mult * g.power).ok_or(Error::Overflow("group value"))?)
                        .ok_or(Error::Overflow("group value"))?;
                }
                Ok(value)
            })
            .collect()
    }

    pub fn joint(&self, group_values: &[u128]) -> Result<u128> {
        group_values.iter().try_fold(1u128, |acc, &v| {
            acc.checked_mul(v).ok_or(Error::Overflow("joint moment"))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;

    fn g2() -> Genus {
        Genus::new(2).unwrap()
    }

    fn point(a1: &str, n: usize) -> HomPoint {
        let a = Permutation::parse_cycles(a1, n).unwrap();
        let id = Permutation::identity(n);
        HomPoint::new(g2(), vec![a, id.clone(), id.clone(), id]).unwrap()
    }

    #[test]
    fn fixed_points_and_cycles() {
        let w = Word::parse("a1", g2()).unwrap();
        let h = point("(1 2)", 3);
        assert_eq!(F(&h, &w).unwrap(), 1);
        assert_eq!(C(&h, &w, 1).unwrap(), 1);
        assert_eq!(C(&h, &w, 2).unwrap(), 1);
        assert!(C(&h, &w, 4).is_err());
        assert_eq!(F(&h, &Word::identity(g2())), Err(Error::IdentityWord));
        // a1 maps to the identity in this point even though a1 ≠ 1 in Γ
        let b = Word::parse("b1", g2()).unwrap();
        assert_eq!(F(&h, &b).unwrap(), 3);
        assert_eq!(F(&h, &w.inverse()).unwrap(), F(&h, &w).unwrap());
    }

    #[test]
    fn power_identity_examples() {
        let w = Word::parse("a1", g2()).unwrap();
        let h = point("(1 2)(3 4)", 5);
        assert!(power_identity_check(&h, &w, 1).unwrap());
        assert!(power_identity_check(&h, &w, 2).unwrap());
        assert_eq!(F(&h, &w.power(2).unwrap()).unwrap(), 5);
        let h = point("(1 2 3)(4 5)", 5);
        assert!(power_identity_check(&h, &w, 6).unwrap());
    }

    #[test]
    fn mobius_and_divisors() {
        assert_eq!(mobius(1).unwrap(), 1);
        assert_eq!(mobius(4).unwrap(), 0);
        assert_eq!(mobius(6).unwrap(), 1);
        assert_eq!(mobius(30).unwrap(), -1);
        assert!(mobius(0).is_err());
        assert_eq!(d_count(4), 3);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn mobius_inversion_examples() {
        let mut f = BTreeMap::new();
        f.insert(1, 1);
        f.insert(2, 5);
        assert_eq!(cycles_from_fixed_points(&f, 2).unwrap(), 2);
        assert_eq!(cycles_from_fixed_points(&f, 1).unwrap(), 1);
        assert_eq!(cycles_from_fixed_points(&f, 4), Err(Error::MissingDivisor(4)));
        f.insert(2, 4);
        assert!(matches!(
            cycles_from_fixed_points(&f, 2),
            Err(Error::NonIntegralCount(_))
        ));
    }

    #[test]
    fn spec_text_and_json() {
        let spec = ObservableSpec::parse(r#"gamma="a1" exps=[2,3] pow=1; delta="a2" exps=[4] pow=1"#, g2())
            .unwrap();
        assert_eq!(spec.groups().len(), 2);
        assert_eq!(spec.groups()[0].exponents, vec![2, 3]);
        assert_eq!(spec.groups()[1].word, Word::parse("a2", g2()).unwrap());
        let again = ObservableSpec::parse(&spec.to_string(), g2()).unwrap();
        assert_eq!(again, spec);
        let json = spec.to_json_value().to_string();
        assert_eq!(ObservableSpec::from_json(&json, g2()).unwrap(), spec);
        let obj = format!("{{\"groups\": {json}}}");
        assert_eq!(ObservableSpec::parse_any(&obj, g2()).unwrap(), spec);
        let defaults = ObservableSpec::parse(r#"x="b1 a2""#, g2()).unwrap();
        assert_eq!(defaults.groups()[0].exponents, vec![1]);
        assert_eq!(defaults.groups()[0].power, 1);
    }

    #[test]
    fn spec_rejections() {
        assert_eq!(
            ObservableSpec::parse(r#"x="a1 a1'""#, g2()),
            Err(Error::IdentityWord)
        );
        assert!(ObservableSpec::parse(r#"x="a1" exps=[0]"#, g2()).is_err());
        assert!(ObservableSpec::parse(r#"x="a1" pow=0"#, g2()).is_err());
        assert!(ObservableSpec::parse(r#"x="a1" bogus=1"#, g2()).is_err());
        assert!(ObservableSpec::parse(r#"x=a1"#, g2()).is_err());
    }

    #[test]
    fn warnings_for_uncertified_hypotheses() {
        let ok = ObservableSpec::from_words(g2(), &[("a1", &[1], 1), ("a2", &[1], 1)]).unwrap();
        assert!(ok.certificate_warnings().is_empty());
        let bad = ObservableSpec::from_words(g2(), &[("a1^2", &[1], 1), ("a1'", &[1], 1)]).unwrap();
        let w = bad.certificate_warnings();
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn joint_moment_examples() {
        let h = point("(1 2)(3 4 5)", 6);
        assert_eq!(ObservableSpec::empty(g2()).joint_moment(&h).unwrap(), 1);
        let single = ObservableSpec::from_words(g2(), &[("a1", &[1], 1)]).unwrap();
        assert_eq!(single.joint_moment(&h).unwrap(), 1);
        // F(a1^2) = 1 + 2 = 3, F(a1^3) = 1 + 3 = 4, F(b1^4) = 6
        let spec =
            ObservableSpec::from_words(g2(), &[("a1", &[2, 3], 1), ("b1", &[4], 1)]).unwrap();
        assert_eq!(spec.joint_moment(&h).unwrap(), 3 * 4 * 6);
        let squared = ObservableSpec::from_words(g2(), &[("a1", &[2, 3], 2)]).unwrap();
        assert_eq!(squared.joint_moment(&h).unwrap(), 144);
    }
}
