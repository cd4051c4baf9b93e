//! Exact character theory of `S_n`: Murnaghan–Nakayama values, hook-length
//! dimensions, the Witten zeta function and Frobenius-type counts of
//! solutions to commutator equations.
//!
//! Everything here is exact. Character values are stored as `i128`
//! (`|χ| <= sqrt(n!)` fits for every `n` where the table is computable) and
//! every count is assembled in `BigInt`/`BigRational`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::partition::{factorial, partitions, Partition};

/// Full character table of `S_n`, rows indexed by irreducibles `λ` and
/// columns by cycle types `μ`, both in reverse-lexicographic order.
///
/// Built once by a single writer and immutable afterwards.
#[derive(Debug)]
pub struct CharacterTable {
    n: usize,
    partitions: Vec<Partition>,
    index: HashMap<Partition, usize>,
    values: Vec<i128>,
    dims: Vec<BigUint>,
    class_sizes: Vec<BigUint>,
}

impl CharacterTable {
    pub fn new(n: usize) -> Self {
        let by_size: Vec<Vec<Partition>> = (0..=n).map(partitions).collect();
        let index_by_size: Vec<HashMap<Partition, usize>> = by_size
            .iter()
            .map(|ps| ps.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect())
            .collect();
        let mut builder = ColumnBuilder {
            by_size: &by_size,
            index_by_size: &index_by_size,
            columns: HashMap::new(),
            hooks: HashMap::new(),
        };
        let parts = by_size[n].clone();
        let count = parts.len();
        let mut values = vec![0i128; count * count];
        for (j, mu) in parts.iter().enumerate() {
            let column = builder.column(mu);
            for i in 0..count {
                values[i * count + j] = column[i];
            }
        }
        let dims = parts.iter().map(dim_irrep).collect();
        let class_sizes = parts.iter().map(|p| p.class_size()).collect();
        CharacterTable {
            n,
            index: index_by_size[n].clone(),
            partitions: parts,
            values,
            dims,
            class_sizes,
        }
    }

    /// Process-wide shared table for `n`, built on first use.
    pub fn shared(n: usize) -> Arc<CharacterTable> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CharacterTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(CharacterTable::new(n)))
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Partitions of `n` in table order.
    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn index_of(&self, p: &Partition) -> Result<usize> {
        self.index.get(p).copied().ok_or_else(|| {
            if p.size() != self.n {
                Error::PartitionSizeMismatch(p.size(), self.n)
            } else {
                Error::InvalidPartition(p.to_string())
            }
        })
    }

    /// `χ_λ(μ)` by table indices.
    #[inline]
    pub fn value(&self, lambda: usize, mu: usize) -> i128 {
        self.values[lambda * self.partitions.len() + mu]
    }

    pub fn character(&self, lambda: &Partition, mu: &Partition) -> Result<BigInt> {
        Ok(BigInt::from(
            self.value(self.index_of(lambda)?, self.index_of(mu)?),
        ))
    }

    pub fn dim(&self, lambda: usize) -> &BigUint {
        &self.dims[lambda]
    }

    pub fn class_size(&self, mu: usize) -> &BigUint {
        &self.class_sizes[mu]
    }

    /// Index of the identity class `(1^n)`.
    pub fn identity_class(&self) -> usize {
        self.partitions.len() - 1
    }

    /// `Σ_λ χ_λ(μ) / dim(λ)^e`.
    pub fn class_sum(&self, mu: usize, exponent: u32) -> BigRational {
        let mut total = BigRational::zero();
        for lambda in 0..self.len() {
            let chi = self.value(lambda, mu);
            if chi == 0 {
                continue;
            }
            let denom = BigInt::from(self.dims[lambda].pow(exponent));
            total += BigRational::new(BigInt::from(chi), denom);
        }
        total
    }

    /// Number of `k`-tuples of pairs whose commutator product equals a fixed
    /// element of class `μ`: `(n!)^{2k-1} Σ_λ χ_λ(μ) / dim(λ)^{2k-1}`.
    pub fn commutator_product_count(&self, k: u32, mu: usize) -> Result<BigUint> {
        if k == 0 {
            return Ok(if mu == self.identity_class() {
                BigUint::one()
            } else {
                BigUint::zero()
            });
        }
        let scale = BigRational::from(BigInt::from(factorial(self.n).pow(2 * k - 1)));
        to_count(scale * self.class_sum(mu, 2 * k - 1))
    }

    /// Number of homomorphisms sending `a1` to a fixed element of class `μ`:
    /// `(n!)^{2g-2} Σ_λ χ_λ(μ)² / dim(λ)^{2g-2}`.
    pub fn generator_fiber_count(&self, genus: u32, mu: usize) -> Result<BigUint> {
        let e = 2 * genus - 2;
        let mut total = BigRational::zero();
        for lambda in 0..self.len() {
            let chi = BigInt::from(self.value(lambda, mu));
            total += BigRational::new(&chi * &chi, BigInt::from(self.dims[lambda].pow(e)));
        }
        let scale = BigRational::from(BigInt::from(factorial(self.n).pow(e)));
        to_count(scale * total)
    }

    /// `#{(x, y) : x ∈ κ1, y ∈ κ2, x·y = s}` for a fixed `s` of class `σ`.
    pub fn factorization_count(&self, k1: usize, k2: usize, sigma: usize) -> Result<BigUint> {
        let mut total = BigRational::zero();
        for lambda in 0..self.len() {
            let num = BigInt::from(self.value(lambda, k1))
                * BigInt::from(self.value(lambda, k2))
                * BigInt::from(self.value(lambda, sigma));
            if num.is_zero() {
                continue;
            }
            total += BigRational::new(num, BigInt::from(self.dims[lambda].clone()));
        }
        let scale = BigRational::new(
            BigInt::from(&self.class_sizes[k1] * &self.class_sizes[k2]),
            BigInt::from(factorial(self.n)),
        );
        to_count(scale * total)
    }

    /// CSV rendering: header row of classes `μ`, one row per irreducible `λ`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda");
        for mu in &self.partitions {
            out.push_str(&format!(",\"{mu}\""));
        }
        out.push('\n');
        for (i, lambda) in self.partitions.iter().enumerate() {
            out.push_str(&format!("\"{lambda}\""));
            for j in 0..self.len() {
                out.push_str(&format!(",{}", self.value(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

struct ColumnBuilder<'a> {
    by_size: &'a [Vec<Partition>],
    index_by_size: &'a [HashMap<Partition, usize>],
    columns: HashMap<Partition, Arc<Vec<i128>>>,
    hooks: HashMap<(Partition, u32), Vec<(Partition, i32)>>,
}

impl ColumnBuilder<'_> {
    /// `χ_λ(μ)` for every `λ ⊢ |μ|`, stripping the largest part of `μ` first.
    fn column(&mut self, mu: &Partition) -> Arc<Vec<i128>> {
        if let Some(c) = self.columns.get(mu) {
            return c.clone();
        }
        let m = mu.size();
        let result = if m == 0 {
            vec![1i128]
        } else {
            let k = mu.parts()[0];
            let rest = Partition::new(mu.parts()[1..].to_vec()).expect("suffix of a partition");
            let rest_column = self.column(&rest);
            let rest_index = &self.index_by_size[m - k as usize];
            let mut col = Vec::with_capacity(self.by_size[m].len());
            for lambda in &self.by_size[m] {
                let hooks = self
                    .hooks
                    .entry((lambda.clone(), k))
                    .or_insert_with(|| lambda.remove_rim_hooks(k));
                let v: i128 = hooks
                    .iter()
                    .map(|(smaller, sign)| *sign as i128 * rest_column[rest_index[smaller]])
                    .sum();
                col.push(v);
            }
            col
        };
        let result = Arc::new(result);
        self.columns.insert(mu.clone(), result.clone());
        result
    }
}

fn to_count(value: BigRational) -> Result<BigUint> {
    if !value.is_integer() || value.is_negative() {
        return Err(Error::NonIntegralCount(value.to_string()));
    }
    Ok(value
        .to_integer()
        .to_biguint()
        .expect("checked non-negative"))
}

/// All partitions of `n`, reverse-lexicographic.
pub fn irreducible_labels(n: usize) -> Vec<Partition> {
    partitions(n)
}

/// Dimension of the irreducible `λ` by the hook length formula.
pub fn dim_irrep(lambda: &Partition) -> BigUint {
    let hooks: BigUint = lambda
        .hook_lengths()
        .into_iter()
        .fold(BigUint::one(), |acc, h| acc * h);
    factorial(lambda.size()) / hooks
}

/// `χ_λ(μ)` by a direct memoized Murnaghan–Nakayama recursion, independent
/// of [`CharacterTable`].
pub fn mn_character(lambda: &Partition, mu: &Partition) -> Result<BigInt> {
    if lambda.size() != mu.size() {
        return Err(Error::PartitionSizeMismatch(lambda.size(), mu.size()));
    }
    fn rec(
        lambda: &Partition,
        mu: &[u32],
        memo: &mut HashMap<(Partition, usize), BigInt>,
    ) -> BigInt {
        if mu.is_empty() {
            return if lambda.size() == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            };
        }
        let key = (lambda.clone(), mu.len());
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let mut total = BigInt::zero();
        for (smaller, sign) in lambda.remove_rim_hooks(mu[0]) {
            total += BigInt::from(sign) * rec(&smaller, &mu[1..], memo);
        }
        memo.insert(key, total.clone());
        total
    }
    // memo keys on the remaining suffix length, valid because μ is fixed
    let mut memo = HashMap::new();
    Ok(rec(lambda, mu.parts(), &mut memo))
}

/// `ζ^{S_n}(s) = Σ_λ dim(λ)^{-s}`.
pub fn witten_zeta(n: usize, s: u32) -> BigRational {
    partitions(n)
        .iter()
        .map(|lambda| BigRational::new(BigInt::one(), BigInt::from(dim_irrep(lambda).pow(s))))
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// `#Hom(Γ_g, S_n) = (n!)^{2g-1} ζ^{S_n}(2g-2)`.
pub fn hom_count(n: usize, genus: u32) -> Result<BigUint> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if genus < 1 {
        return Err(Error::InvalidGenus(genus));
    }
    let scale = BigRational::from(BigInt::from(factorial(n).pow(2 * genus - 1)));
    to_count(scale * witten_zeta(n, 2 * genus - 2))
}

/// Number of pairs `(a, b)` with `[a, b]` equal to a fixed element of class `μ`.
pub fn commutator_count(n: usize, mu: &Partition) -> Result<BigUint> {
    g_commutator_product_count(n, 1, mu)
}

/// Number of `2g`-tuples with `[a1,b1]...[ag,bg]` equal to a fixed element of
/// class `μ`.
pub fn g_commutator_product_count(n: usize, genus: u32, mu: &Partition) -> Result<BigUint> {
    if mu.size() != n {
        return Err(Error::PartitionSizeMismatch(mu.size(), n));
    }
    let table = CharacterTable::shared(n);
    let idx = table.index_of(mu)?;
    table.commutator_product_count(genus, idx)
}

/// `#{(x, y) : x ∈ κ1, y ∈ κ2, xy = s}` for a fixed `s` of class `σ`.
pub fn factorization_count(k1: &Partition, k2: &Partition, sigma: &Partition) -> Result<BigUint> {
    let n = sigma.size();
    for k in [k1, k2] {
        if k.size() != n {
            return Err(Error::PartitionSizeMismatch(k.size(), n));
        }
    }
    let table = CharacterTable::shared(n);
    table.factorization_count(table.index_of(k1)?, table.index_of(k2)?, table.index_of(sigma)?)
}

pub fn class_size(mu: &Partition) -> BigUint {
    mu.class_size()
}

pub fn centralizer_size(mu: &Partition) -> BigUint {
    mu.centralizer_size()
}

/// Lossy conversion used for display only.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
