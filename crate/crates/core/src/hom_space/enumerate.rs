use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::buckets::{build_buckets, CommutatorBuckets};
use super::HomSpace;
use crate::error::{Error, Result};
use crate::perm::{HomPoint, Permutation};
use crate::stats::ObservableSpec;

/// Folds over every point of `Hom(Γ_g, S_n)` exactly once.
///
/// Work is split by the value `σ = [a₁, b₁]` of the first commutator. Each
/// `σ` gets a fresh accumulator from `init`, and the per-`σ` results are
/// combined with `reduce` in increasing rank order, so the result does not
/// depend on the thread count. `fold` runs concurrently on different
/// accumulators and must not rely on shared mutable state.
pub fn fold_homs<T, I, F, R>(space: &HomSpace, init: I, fold: F, reduce: R) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, &HomPoint) -> Result<()> + Sync,
    R: Fn(T, T) -> T,
{
    space.check_enumeration()?;
    let buckets = build_buckets(space.n, &space.budget)?;
    let genus = space.genus;
    let pairs = genus.get() as usize;
    let identity = Permutation::identity(space.n);

    let per_key: Vec<Result<T>> = (0..buckets.group().order())
        .into_par_iter()
        .map(|sigma| {
            let mut acc = init();
            if buckets.len_of(sigma) == 0 {
                return Ok(acc);
            }
            let mut point = HomPoint::new_unchecked(genus, vec![identity.clone(); 2 * pairs]);
            let mut visit = |h: &HomPoint| -> Result<()> {
                if !h.satisfies_relator() {
                    return Err(Error::RelatorViolated);
                }
                fold(&mut acc, h)
            };
            let walker = Walker {
                buckets: &buckets,
                pairs,
            };
            walker.walk(0, Some(sigma), &identity, &mut point, &mut visit)?;
            Ok(acc)
        })
        .collect();

    let mut total = init();
    for r in per_key {
        total = reduce(total, r?);
    }
    Ok(total)
}

struct Walker<'a> {
    buckets: &'a CommutatorBuckets,
    pairs: usize,
}

impl Walker<'_> {
    /// Fills pair `k` onwards given the product `prefix` of the first `k`
    /// commutators.
    fn walk(
        &self,
        k: usize,
        only: Option<usize>,
        prefix: &Permutation,
        point: &mut HomPoint,
        visit: &mut dyn FnMut(&HomPoint) -> Result<()>,
    ) -> Result<()> {
        let group = self.buckets.group();
        let mut status = Ok(());
        if k + 1 == self.pairs {
            let target = group.rank(&prefix.inverse());
            self.buckets.for_each_pair(target, |a, b| {
                if status.is_err() {
                    return;
                }
                let images = point.images_mut();
                images[2 * k].clone_from(group.element(a));
                images[2 * k + 1].clone_from(group.element(b));
                status = visit(point);
            });
            return status;
        }
        let keys: Box<dyn Iterator<Item = usize>> = match only {
            Some(s) => Box::new(std::iter::once(s)),
            None => Box::new(0..group.order()),
        };
        for sigma in keys {
            if self.buckets.len_of(sigma) == 0 {
                continue;
            }
            let next = prefix.then(group.element(sigma));
            self.buckets.for_each_pair(sigma, |a, b| {
                if status.is_err() {
                    return;
                }
                let images = point.images_mut();
                images[2 * k].clone_from(group.element(a));
                images[2 * k + 1].clone_from(group.element(b));
                status = self.walk(k + 1, None, &next, point, visit);
            });
            status.clone()?;
        }
        Ok(())
    }
}

/// Calls `visitor` on every point and returns how many there were.
/// The visitor runs concurrently and must be pure or internally
/// synchronized.
pub fn enumerate_homs<V>(space: &HomSpace, visitor: V) -> Result<u128>
where
    V: Fn(&HomPoint) + Sync,
{
    fold_homs(
        space,
        || 0u128,
        |count, h| {
            visitor(h);
            *count += 1;
            Ok(())
        },
        |a, b| a + b,
    )
}

/// Exact sums of an observable over the whole space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMoments {
    pub count: u128,
    /// `Σ_φ joint(φ)`.
    pub joint_sum: u128,
    /// `Σ_φ group_i(φ)` for every group.
    pub group_sums: Vec<u128>,
}

impl ExactMoments {
    fn ratio(&self, sum: u128) -> BigRational {
        BigRational::new(
            BigUint::from(sum).into(),
            BigUint::from(self.count).into(),
        )
    }

    pub fn joint_mean(&self) -> BigRational {
        self.ratio(self.joint_sum)
    }

    pub fn group_mean(&self, i: usize) -> BigRational {
        self.ratio(self.group_sums[i])
    }

    /// `Π_i E[group_i]`.
    pub fn product_of_group_means(&self) -> BigRational {
        (0..self.group_sums.len())
            .map(|i| self.group_mean(i))
            .fold(BigRational::one(), |acc, m| acc * m)
    }
}

fn check_genus(space: &HomSpace, spec: &ObservableSpec) -> Result<()> {
    if spec.genus() != space.genus {
        return Err(Error::GenusMismatch {
            expected: space.genus.get(),
            found: spec.genus().get(),
        });
    }
    Ok(())
}

/// Joint and per-group sums of `spec` over every point.
pub fn exact_moments(space: &HomSpace, spec: &ObservableSpec) -> Result<ExactMoments> {
    check_genus(space, spec)?;
    let eval = spec.evaluator();
    let groups = spec.groups().len();
    let add = |x: u128, y: u128| x.checked_add(y).ok_or(Error::Overflow("moment sum"));
    let result = fold_homs(
        space,
        || {
            Ok(ExactMoments {
                count: 0,
                joint_sum: 0,
                group_sums: vec![0; groups],
            })
        },
        |acc: &mut Result<ExactMoments>, h| {
            let m = acc.as_mut().map_err(|e| e.clone())?;
            let values = eval.group_values(h)?;
            m.count += 1;
            m.joint_sum = add(m.joint_sum, eval.joint(&values)?)?;
            for (s, v) in m.group_sums.iter_mut().zip(values) {
                *s = add(*s, v)?;
            }
            Ok(())
        },
        |a, b| {
            let (a, b) = (a?, b?);
            Ok(ExactMoments {
                count: a.count + b.count,
                joint_sum: add(a.joint_sum, b.joint_sum)?,
                group_sums: a
                    .group_sums
                    .iter()
                    .zip(&b.group_sums)
                    .map(|(&x, &y)| add(x, y))
                    .collect::<Result<_>>()?,
            })
        },
    )?;
    result
}

/// `E_n[spec]` under the uniform measure, as an exact rational.
pub fn exact_expectation(space: &HomSpace, spec: &ObservableSpec) -> Result<BigRational> {
    let m = exact_moments(space, spec)?;
    if m.count.is_zero() {
        return Err(Error::InvalidArgument("empty hom space".into()));
    }
    Ok(m.joint_mean())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::hom_count;
    use crate::words::Genus;

    fn space(n: usize, g: u32) -> HomSpace {
        HomSpace::new(n, Genus::new(g).unwrap()).unwrap()
    }

    #[test]
    fn visit_counts_match_character_formula() {
        for (n, g, expected) in [(2, 2, 16u128), (3, 2, 486), (2, 3, 64), (1, 2, 1)] {
            assert_eq!(enumerate_homs(&space(n, g), |_| {}).unwrap(), expected);
        }
        let c4 = enumerate_homs(&space(4, 2), |_| {}).unwrap();
        assert_eq!(BigUint::from(c4), hom_count(4, 2).unwrap());
    }

    #[test]
    fn points_are_distinct() {
        let seen = std::sync::Mutex::new(std::collections::HashSet::new());
        enumerate_homs(&space(3, 2), |h| {
            assert!(seen.lock().unwrap().insert(h.images().to_vec()));
        })
        .unwrap();
        assert_eq!(seen.into_inner().unwrap().len(), 486);
    }

    #[test]
    fn small_expectations() {
        let g = Genus::new(2).unwrap();
        let spec = ObservableSpec::from_words(g, &[("a1", &[1], 1)]).unwrap();
        assert_eq!(
            exact_expectation(&space(2, 2), &spec).unwrap(),
            BigRational::one()
        );
        assert_eq!(
            exact_expectation(&space(3, 2), &spec).unwrap(),
            BigRational::new(10.into(), 9.into())
        );
        let empty = ObservableSpec::empty(g);
        assert_eq!(exact_expectation(&space(3, 2), &empty).unwrap(), BigRational::one());
    }

    #[test]
    fn budget_is_enforced() {
        let tight = space(4, 2).with_budget(super::super::Budget {
            max_visits: 1000,
            ..Default::default()
        });
        assert!(matches!(
            enumerate_homs(&tight, |_| {}),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn genus_mismatch_rejected() {
        let spec = ObservableSpec::from_words(Genus::new(3).unwrap(), &[("a1", &[1], 1)]).unwrap();
        assert!(exact_expectation(&space(2, 2), &spec).is_err());
    }
}
