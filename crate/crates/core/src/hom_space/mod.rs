//! The finite probability space `Hom(Γ_g, S_n)` with the uniform measure.
//!
//! Three ways in:
//! - [`enumerate_homs`] visits every point exactly once through a join of
//!   commutator buckets (small `n`);
//! - [`SamplerPlan`] draws exactly uniform points using character-theoretic
//!   class weights (moderate `n`);
//! - [`exact_expectation`] and [`monte_carlo_expectation`] turn either into
//!   expectations of an [`ObservableSpec`](crate::stats::ObservableSpec).

mod buckets;
mod enumerate;
mod estimate;
mod sampler;

pub use buckets::{all_conjugators, build_buckets, random_conjugator, CommutatorBuckets, SymmetricGroup};
pub use enumerate::{enumerate_homs, exact_expectation, exact_moments, fold_homs, ExactMoments};
pub use estimate::{monte_carlo_expectation, sample_observables, SampleMoments};
pub use sampler::{build_sampler, sample_hom, SamplerPlan};

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characters::hom_count;
use crate::error::{Error, Result};
use crate::partition::factorial;
use crate::words::Genus;

/// Largest `n` for which commutator buckets store their pairs.
pub const PAIR_MATERIALIZATION_LIMIT: usize = 7;

/// Largest `n` for which bucket sizes are tabulated (pairs regenerated on
/// demand above [`PAIR_MATERIALIZATION_LIMIT`]).
pub const BUCKET_COUNT_LIMIT: usize = 9;

/// Hard resource limits. Exceeding one is an error, never a truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Maximum number of homomorphisms an enumeration may visit.
    pub max_visits: u128,
    /// Maximum `n` whose `(n!)^2` commutator pairs may be stored.
    pub max_materialized_n: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_visits: 1_000_000_000,
            max_materialized_n: PAIR_MATERIALIZATION_LIMIT,
        }
    }
}

/// Seed of the counter-based generator: `(seed, stream)` pins a sample
/// sequence; distinct streams never overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub seed: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Seed { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// `Hom(Γ_g, S_n)` together with the budget governing exhaustive work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HomSpace {
    pub n: usize,
    pub genus: Genus,
    pub budget: Budget,
}

impl HomSpace {
    pub fn new(n: usize, genus: Genus) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(HomSpace {
            n,
            genus,
            budget: Budget::default(),
        })
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    /// Number of points, from the character formula.
    pub fn size(&self) -> BigUint {
        hom_count(self.n, self.genus.get()).expect("hom counts are integral")
    }

    /// Whether exhaustive enumeration fits the budget.
    pub fn enumeration_feasible(&self) -> bool {
        self.check_enumeration().is_ok()
    }

    pub(crate) fn check_enumeration(&self) -> Result<()> {
        let size = self.size();
        if size > BigUint::from(self.budget.max_visits) {
            return Err(Error::BudgetExceeded {
                what: "enumeration visits",
                needed: size.to_string(),
                limit: self.budget.max_visits.to_string(),
            });
        }
        // the join walks (n!)^{2(g-1)} prefixes even when few of them extend
        let prefixes = factorial(self.n).pow(2 * (self.genus.get() - 1));
        if prefixes > BigUint::from(self.budget.max_visits) {
            return Err(Error::BudgetExceeded {
                what: "enumeration prefixes",
                needed: prefixes.to_string(),
                limit: self.budget.max_visits.to_string(),
            });
        }
        Ok(())
    }
}
