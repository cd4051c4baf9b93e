//! Exact limits as `n → ∞` of the moment observables, in terms of
//! independent Poisson variables `Z^{(i)}_{1/k}`.
//!
//! Group `i` of a spec converges to `X^{(i)} = Π_j Σ_{k | a_ij} k Z^{(i)}_{1/k}`
//! and distinct groups are independent, so the limit of the joint
//! observable is the expectation of a polynomial in Poisson variables.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{divisors, ObservableSpec, SpecWarning};

fn stirling_cache() -> &'static RwLock<Vec<Vec<BigUint>>> {
    static CACHE: OnceLock<RwLock<Vec<Vec<BigUint>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![vec![BigUint::one()]]))
}

/// Stirling number of the second kind `S(m, j)`.
pub fn stirling2(m: usize, j: usize) -> BigUint {
    if j > m {
        return BigUint::zero();
    }
    {
        let rows = stirling_cache().read().unwrap_or_else(|e| e.into_inner());
        if let Some(row) = rows.get(m) {
            return row[j].clone();
        }
    }
    let mut rows = stirling_cache().write().unwrap_or_else(|e| e.into_inner());
    while rows.len() <= m {
        let prev = rows.last().expect("row 0 present");
        let r = rows.len();
        let row: Vec<BigUint> = (0..=r)
            .map(|k| {
                let stay = if k < prev.len() { prev[k].clone() * k } else { BigUint::zero() };
                let grow = if k >= 1 { prev[k - 1].clone() } else { BigUint::zero() };
                stay + grow
            })
            .collect();
        rows.push(row);
    }
    rows[m][j].clone()
}

/// `E[Z^m]` for `Z ~ Poisson(λ)`, via `Σ_j S(m, j) λ^j`.
pub fn poisson_moment(lambda: &BigRational, m: u32) -> Result<BigRational> {
    if !lambda.is_positive() {
        return Err(Error::InvalidArgument(format!("Poisson parameter {lambda} must be positive")));
    }
    let m = m as usize;
    let mut total = BigRational::zero();
    let mut power = BigRational::one();
    for j in 0..=m {
        total += BigRational::from(BigInt::from(stirling2(m, j))) * &power;
        power *= lambda;
    }
    Ok(total)
}

/// A monomial `Π (Z^{(i)}_{1/k})^m`, keyed by `(group i, divisor k)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PoissonMonomial {
    pub factors: BTreeMap<(usize, u32), u32>,
}

impl PoissonMonomial {
    fn times(&self, group: usize, k: u32) -> PoissonMonomial {
        let mut factors = self.factors.clone();
        *factors.entry((group, k)).or_default() += 1;
        PoissonMonomial { factors }
    }

    /// `E[monomial]`; distinct keys are independent variables.
    pub fn expectation(&self) -> BigRational {
        self.factors
            .iter()
            .map(|(&(_, k), &m)| {
                poisson_moment(&BigRational::new(BigInt::one(), BigInt::from(k)), m)
                    .expect("1/k is positive")
            })
            .fold(BigRational::one(), |acc, x| acc * x)
    }

    /// Value with every variable replaced by its mean `1/k`.
    pub fn at_means(&self) -> BigRational {
        self.factors
            .iter()
            .map(|(&(_, k), &m)| BigRational::new(BigInt::one(), BigInt::from(k).pow(m)))
            .fold(BigRational::one(), |acc, x| acc * x)
    }
}

impl fmt::Display for PoissonMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (n, (&(i, k), &m)) in self.factors.iter().enumerate() {
            if n > 0 {
                write!(f, "·")?;
            }
            write!(f, "Z{i}_1/{k}")?;
            if m > 1 {
                write!(f, "^{m}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial in the `Z^{(i)}_{1/k}` with non-negative integer
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentExpansion {
    pub terms: BTreeMap<PoissonMonomial, BigUint>,
}

impl MomentExpansion {
    fn one() -> Self {
        MomentExpansion {
            terms: BTreeMap::from([(PoissonMonomial::default(), BigUint::one())]),
        }
    }

    /// Multiplies by `Σ_{k | a} k Z^{(group)}_{1/k}`.
    fn multiply_divisor_sum(&self, group: usize, a: u32) -> Self {
        let mut terms: BTreeMap<PoissonMonomial, BigUint> = BTreeMap::new();
        for (mono, coeff) in &self.terms {
            for k in divisors(a) {
                *terms.entry(mono.times(group, k)).or_default() += coeff * k;
            }
        }
        MomentExpansion { terms }
    }

    /// Expands `Π_i (Π_j Σ_{k | a_ij} k Z^{(i)}_{1/k})^{s_i}`.
    pub fn of_spec(spec: &ObservableSpec) -> Self {
        let mut e = MomentExpansion::one();
        for (i, group) in spec.groups().iter().enumerate() {
            for _ in 0..group.power {
                for &a in &group.exponents {
                    e = e.multiply_divisor_sum(i, a);
                }
            }
        }
        e
    }

    pub fn expectation(&self) -> BigRational {
        self.terms
            .iter()
            .map(|(m, c)| m.expectation() * BigRational::from(BigInt::from(c.clone())))
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// The polynomial evaluated at the means of its variables.
    pub fn at_means(&self) -> BigRational {
        self.terms
            .iter()
            .map(|(m, c)| m.at_means() * BigRational::from(BigInt::from(c.clone())))
            .fold(BigRational::zero(), |acc, x| acc + x)
    }
}

/// A predicted limit and the hypotheses that could not be certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitValue {
    #[serde(with = "rational_string")]
    pub value: BigRational,
    pub spec: String,
    pub warnings: Vec<SpecWarning>,
}

/// Serializes a rational as `"p/q"` (or `"p"` when integral).
pub mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `lim_n E_n[spec]`, assuming the group words are primitive and pairwise
/// distinct up to conjugation and inversion. Uncertified hypotheses are
/// reported as warnings, not errors.
pub fn limit_product_moment(spec: &ObservableSpec) -> LimitValue {
    LimitValue {
        value: MomentExpansion::of_spec(spec).expectation(),
        spec: spec.to_string(),
        warnings: spec.certificate_warnings(),
    }
}

/// `E[Π (Z^{(i)}_{1/j})^s]` for a list of `(group i, cycle length j, power s)`;
/// repeated `(i, j)` pairs are the same variable.
pub fn limit_cycle_moment(factors: &[(usize, u32, u32)]) -> Result<BigRational> {
    let mut merged: BTreeMap<(usize, u32), u32> = BTreeMap::new();
    for &(i, j, s) in factors {
        if j < 1 {
            return Err(Error::InvalidArgument("cycle length must be at least 1".into()));
        }
        *merged.entry((i, j)).or_default() += s;
    }
    Ok(PoissonMonomial { factors: merged }.expectation())
}

/// Whether the full joint limit equals the product of the single-group
/// limits.
pub fn factorization_identity_check(spec: &ObservableSpec) -> bool {
    let joint = limit_product_moment(spec).value;
    let product = (0..spec.groups().len())
        .map(|i| limit_product_moment(&spec.single_group(i)).value)
        .fold(BigRational::one(), |acc, x| acc * x);
    joint == product
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::d_count;
    use crate::words::Genus;

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(p.into(), r.into())
    }

    fn spec(groups: &[(&str, &[u32], u32)]) -> ObservableSpec {
        ObservableSpec::from_words(Genus::new(2).unwrap(), groups).unwrap()
    }

    #[test]
    fn stirling_small() {
        assert_eq!(stirling2(0, 0), BigUint::one());
        assert_eq!(stirling2(4, 2), BigUint::from(7u32));
        assert_eq!(stirling2(5, 3), BigUint::from(25u32));
        assert_eq!(stirling2(3, 5), BigUint::zero());
    }

    #[test]
    fn poisson_moments() {
        let l = q(3, 7);
        assert_eq!(poisson_moment(&l, 0).unwrap(), q(1, 1));
        assert_eq!(poisson_moment(&l, 1).unwrap(), l);
        assert_eq!(poisson_moment(&l, 2).unwrap(), &l * &l + &l);
        assert_eq!(poisson_moment(&q(1, 1), 3).unwrap(), q(5, 1));
        assert!(poisson_moment(&q(0, 1), 2).is_err());
        assert!(poisson_moment(&q(-1, 2), 2).is_err());
    }

    #[test]
    fn worked_example_is_fifteen() {
        let s = spec(&[("a1", &[2, 3], 1), ("a2", &[4], 1)]);
        let v = limit_product_moment(&s);
        assert_eq!(v.value, q(15, 1));
        assert!(v.warnings.is_empty());
        assert!(factorization_identity_check(&s));
        assert_eq!(limit_product_moment(&s.single_group(0)).value, q(5, 1));
        assert_eq!(limit_product_moment(&s.single_group(1)).value, q(3, 1));
    }

    #[test]
    fn single_power_gives_divisor_count() {
        for a in 1..=48 {
            let s = spec(&[("a1", &[a], 1)]);
            assert_eq!(limit_product_moment(&s).value, q(d_count(a) as i64, 1), "a = {a}");
        }
        assert_eq!(limit_product_moment(&spec(&[("a1", &[1], 2)])).value, q(2, 1));
    }

    #[test]
    fn cycle_moments() {
        assert_eq!(limit_cycle_moment(&[(0, 1, 1)]).unwrap(), q(1, 1));
        assert_eq!(limit_cycle_moment(&[(0, 2, 1)]).unwrap(), q(1, 2));
        // (i, j) repeated merges into one variable: E[Z_{1/2}^2] = 1/4 + 1/2
        assert_eq!(limit_cycle_moment(&[(0, 2, 1), (0, 2, 1)]).unwrap(), q(3, 4));
        let joint = limit_cycle_moment(&[(0, 1, 1), (1, 2, 1)]).unwrap();
        let product = limit_cycle_moment(&[(0, 1, 1)]).unwrap() * limit_cycle_moment(&[(1, 2, 1)]).unwrap();
        assert_eq!(joint - product, q(0, 1));
        assert!(limit_cycle_moment(&[(0, 0, 1)]).is_err());
    }

    #[test]
    fn same_base_is_not_independent() {
        // a1 with [1, 2] as one group: E[Z1 (Z1 + 2 Z_{1/2})] = 2 + 1 = 3,
        // against 1 · 2 when split into two groups
        let one = spec(&[("a1", &[1, 2], 1)]);
        assert_eq!(limit_product_moment(&one).value, q(3, 1));
        let split = spec(&[("a1", &[1], 1), ("a1", &[2], 1)]);
        assert_eq!(limit_product_moment(&split).value, q(2, 1));
        assert!(!limit_product_moment(&split).warnings.is_empty());
    }

    #[test]
    fn serialized_as_string() {
        let v = limit_product_moment(&spec(&[("a1", &[1], 1)]));
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"value\":\"1\""), "{json}");
        let back: LimitValue = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
