use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

use super::buckets::random_conjugator;
use super::Seed;
use crate::characters::{hom_count, CharacterTable};
use crate::error::{Error, Result};
use crate::partition::{factorial, Partition};
use crate::perm::{commutator_unchecked, HomPoint, Permutation};
use crate::words::Genus;

/// Precomputed class weights for drawing exactly uniform points of
/// `Hom(Γ_g, S_n)`.
///
/// A point is drawn in three steps. First the class of
/// `τ = [a₁,b₁]⋯[a_{g-1},b_{g-1}]` is chosen with weight
/// `|κ| · N_{g-1}(κ) · N_1(κ)`, where `N_k(κ)` counts `k`-tuples of pairs
/// whose commutator product is a fixed element of class `κ`; `τ` is then
/// uniform in its class. Next the first `g-1` pairs are drawn uniformly
/// among those with product `τ`, and finally `(a_g, b_g)` uniformly among
/// pairs with `[a_g, b_g] = τ⁻¹`.
#[derive(Debug)]
pub struct SamplerPlan {
    n: usize,
    genus: Genus,
    table: Arc<CharacterTable>,
    factorial: BigUint,
    total: BigUint,
    tau_cumulative: Vec<BigUint>,
    // chain_counts[k][class] = N_k(class), for k < g
    chain_counts: Vec<Vec<BigUint>>,
    // per class of σ: cumulative weights for the class of a in [a, b] = σ
    pair_weights: Vec<OnceLock<Vec<BigUint>>>,
}

/// Builds the sampler, checking that the class weights add up to
/// `#Hom(Γ_g, S_n)`.
pub fn build_sampler(n: usize, genus: Genus) -> Result<SamplerPlan> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let g = genus.get();
    let table = CharacterTable::shared(n);
    let chain_counts = (0..g)
        .map(|k| {
            (0..table.len())
                .map(|c| table.commutator_product_count(k, c))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tau_cumulative = Vec::with_capacity(table.len());
    let mut running = BigUint::zero();
    for c in 0..table.len() {
        // κ and κ⁻¹ share a class
        running += table.class_size(c) * &chain_counts[(g - 1) as usize][c] * &chain_counts[1][c];
        tau_cumulative.push(running.clone());
    }
    let total = hom_count(n, g)?;
    if running != total {
        return Err(Error::InconsistentWeights(format!(
            "class weights sum to {running}, expected {total}"
        )));
    }
    let pair_weights = (0..table.len()).map(|_| OnceLock::new()).collect();
    Ok(SamplerPlan {
        n,
        genus,
        factorial: factorial(n),
        table,
        total,
        tau_cumulative,
        chain_counts,
        pair_weights,
    })
}

fn pick<R: Rng + ?Sized>(cumulative: &[BigUint], rng: &mut R) -> usize {
    let total = cumulative.last().expect("non-empty weights");
    let r = rng.gen_biguint_below(total);
    cumulative.partition_point(|c| c <= &r)
}

impl SamplerPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn genus(&self) -> Genus {
        self.genus
    }

    /// `#Hom(Γ_g, S_n)`.
    pub fn total(&self) -> &BigUint {
        &self.total
    }

    /// Probability of each class of `τ`, as exact rationals.
    pub fn tau_distribution(&self) -> Vec<(Partition, BigRational)> {
        let total = BigInt::from(self.total.clone());
        let mut prev = BigUint::zero();
        self.tau_cumulative
            .iter()
            .zip(self.table.partitions())
            .map(|(c, p)| {
                let w = c - &prev;
                prev = c.clone();
                (p.clone(), BigRational::new(BigInt::from(w), total.clone()))
            })
            .collect()
    }

    /// Cumulative weights `n! · #{(a, b) : a ∈ κ, [a, b] = s}` over classes
    /// `κ`, for a fixed `s` of class `sigma`.
    fn pair_weights(&self, sigma: usize) -> &[BigUint] {
        self.pair_weights[sigma].get_or_init(|| {
            let t = &self.table;
            let scaled_dims: Vec<BigInt> = (0..t.len())
                .map(|l| BigInt::from(&self.factorial / t.dim(l)))
                .collect();
            let mut cumulative = Vec::with_capacity(t.len());
            let mut running = BigUint::zero();
            for kappa in 0..t.len() {
                let mut s = BigInt::zero();
                for l in 0..t.len() {
                    let chi = t.value(l, kappa);
                    let x = t.value(l, sigma);
                    if chi == 0 || x == 0 {
                        continue;
                    }
                    s += BigInt::from(chi * chi) * BigInt::from(x) * &scaled_dims[l];
                }
                // |κ| Σ χ(κ)² χ(σ) n!/d = n! · (pairs with a ∈ κ)
                let w = s * BigInt::from(t.class_size(kappa).clone());
                if w.is_negative() || !(&w % BigInt::from(self.factorial.clone())).is_zero() {
                    panic!("pair weight for class {kappa} over {sigma} is {w}");
                }
                running += w.magnitude();
                cumulative.push(running.clone());
            }
            let expected = &self.factorial * &self.chain_counts[1][sigma];
            if running != expected {
                panic!("pair weights over class {sigma} sum to {running}, expected {expected}");
            }
            cumulative
        })
    }

    /// Uniform `(a, b)` with `[a, b] = s`.
    fn sample_pair<R: Rng + ?Sized>(&self, s: &Permutation, rng: &mut R) -> (Permutation, Permutation) {
        let sigma = self
            .table
            .index_of(&s.cycle_type())
            .expect("class of an element of S_n");
        let kappa_idx = pick(self.pair_weights(sigma), rng);
        let kappa = &self.table.partitions()[kappa_idx];
        loop {
            let a = Permutation::random_in_class(kappa, rng);
            let target = a.then(s);
            if target.cycle_type() != *kappa {
                continue;
            }
            let b = random_conjugator(&a, &target, rng).expect("target is conjugate to a");
            return (a, b);
        }
    }

    /// Uniform `k`-tuple of pairs with commutator product `t`, written into
    /// `out[0..2k]`.
    fn sample_chain<R: Rng + ?Sized>(&self, k: usize, t: &Permutation, out: &mut [Permutation], rng: &mut R) {
        if k == 1 {
            let (a, b) = self.sample_pair(t, rng);
            out[0] = a;
            out[1] = b;
            return;
        }
        // the last pair's commutator ρ is accepted with probability
        // N_{k-1}(tρ⁻¹) / N_{k-1}(id); the identity class is the maximum
        let counts = &self.chain_counts[k - 1];
        let ceiling = &counts[self.table.identity_class()];
        loop {
            let a = Permutation::random(self.n, rng);
            let b = Permutation::random(self.n, rng);
            let rho = commutator_unchecked(&a, &b);
            let rest = t.then(&rho.inverse());
            let class = self
                .table
                .index_of(&rest.cycle_type())
                .expect("class of an element of S_n");
            if rng.gen_biguint_below(ceiling) < counts[class] {
                self.sample_chain(k - 1, &rest, &mut out[..2 * (k - 1)], rng);
                out[2 * k - 2] = a;
                out[2 * k - 1] = b;
                return;
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> HomPoint {
        let g = self.genus.get() as usize;
        let class = pick(&self.tau_cumulative, rng);
        let tau = Permutation::random_in_class(&self.table.partitions()[class], rng);
        let mut images = vec![Permutation::identity(self.n); 2 * g];
        self.sample_chain(g - 1, &tau, &mut images[..2 * (g - 1)], rng);
        let (a, b) = self.sample_pair(&tau.inverse(), rng);
        images[2 * g - 2] = a;
        images[2 * g - 1] = b;
        let h = HomPoint::new_unchecked(self.genus, images);
        assert!(h.satisfies_relator(), "sampled point violates the relator");
        h
    }

    /// Unnormalized weight of the class of `τ`; the weights sum to
    /// [`total`](Self::total).
    pub fn tau_class_weight(&self, class: &Partition) -> Result<BigUint> {
        let idx = self.table.index_of(class)?;
        let prev = if idx == 0 {
            BigUint::zero()
        } else {
            self.tau_cumulative[idx - 1].clone()
        };
        Ok(&self.tau_cumulative[idx] - prev)
    }
}

/// One exactly uniform point of `Hom(Γ_g, S_n)`. The same plan and seed
/// always give the same point.
pub fn sample_hom(plan: &SamplerPlan, seed: Seed) -> HomPoint {
    let mut rng = seed.rng();
    plan.draw(&mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::hom_space::{enumerate_homs, HomSpace};
    use std::collections::HashMap;
    use std::sync::Mutex;

    fn g(k: u32) -> Genus {
        Genus::new(k).unwrap()
    }

    #[test]
    fn abelian_case_is_trivial() {
        let plan = build_sampler(2, g(2)).unwrap();
        let dist = plan.tau_distribution();
        let id = Partition::column(2);
        for (p, w) in dist {
            let expect = if p == id { BigRational::one() } else { BigRational::zero() };
            assert_eq!(w, expect);
        }
    }

    #[test]
    fn tau_weights_for_s3() {
        let plan = build_sampler(3, g(2)).unwrap();
        assert_eq!(plan.total(), &BigUint::from(486u32));
        let w = |p: &str| plan.tau_class_weight(&p.parse().unwrap()).unwrap();
        // |bucket(id)|² = 324, two 3-cycles with |bucket|² = 81 each
        assert_eq!(w("1,1,1"), BigUint::from(324u32));
        assert_eq!(w("3"), BigUint::from(162u32));
        assert_eq!(w("2,1"), BigUint::zero());
    }

    #[test]
    fn pair_weights_match_factorization_counts() {
        let plan = build_sampler(5, g(2)).unwrap();
        let t = &plan.table;
        for sigma in 0..t.len() {
            let cum = plan.pair_weights(sigma);
            let mut prev = BigUint::zero();
            for kappa in 0..t.len() {
                let w = &cum[kappa] - &prev;
                prev = cum[kappa].clone();
                // #{a ∈ κ : aσ ∈ κ} = #{(x, y) ∈ κ × κ : x y = s}, times |C(a)|
                let solutions = t.factorization_count(kappa, kappa, sigma).unwrap();
                let centralizer = &plan.factorial / t.class_size(kappa);
                assert_eq!(w, solutions * centralizer * &plan.factorial);
            }
        }
    }

    #[test]
    fn samples_satisfy_relator_and_are_deterministic() {
        for (n, genus) in [(3, 2), (5, 2), (4, 3), (8, 2), (6, 4)] {
            let plan = build_sampler(n, g(genus)).unwrap();
            for i in 0..50 {
                let h = sample_hom(&plan, Seed::new(7, i));
                assert!(h.satisfies_relator());
                assert_eq!(h, sample_hom(&plan, Seed::new(7, i)));
            }
        }
    }

    #[test]
    fn genus_three_small_support_is_covered_uniformly() {
        // 64 points at n = 2, g = 3; every one should appear about equally
        let plan = build_sampler(2, g(3)).unwrap();
        let mut counts: HashMap<Vec<Permutation>, u32> = HashMap::new();
        for i in 0..6400 {
            *counts.entry(sample_hom(&plan, Seed::new(1, i)).images().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 64);
        assert!(counts.values().all(|&c| (50..=150).contains(&c)));
    }

    #[test]
    fn genus_three_n3_support_matches_enumeration() {
        let space = HomSpace::new(3, g(3)).unwrap();
        let all = Mutex::new(std::collections::HashSet::new());
        let total = enumerate_homs(&space, |h| {
            all.lock().unwrap().insert(h.images().to_vec());
        })
        .unwrap();
        let all = all.into_inner().unwrap();
        let plan = build_sampler(3, g(3)).unwrap();
        assert_eq!(BigUint::from(total), *plan.total());
        for i in 0..2000 {
            assert!(all.contains(sample_hom(&plan, Seed::new(3, i)).images()));
        }
    }
}
