use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::sampler::{sample_hom, SamplerPlan};
use super::Seed;
use crate::error::{Error, Result};
use crate::perm::HomPoint;
use crate::stats::ObservableSpec;

/// Samples are generated in fixed-size chunks so the partition of work is
/// independent of the thread count.
const CHUNK: u64 = 4096;

/// Exact running sums of several integer observables and of all their
/// pairwise products over a sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMoments {
    samples: u64,
    sums: Vec<u128>,
    // row-major upper triangle: (i, j) with i <= j
    cross: Vec<u128>,
}

fn tri(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * k - i * (i + 1) / 2 + j
}

impl SampleMoments {
    pub fn new(observables: usize) -> Self {
        SampleMoments {
            samples: 0,
            sums: vec![0; observables],
            cross: vec![0; observables * (observables + 1) / 2],
        }
    }

    pub fn observables(&self) -> usize {
        self.sums.len()
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn push(&mut self, values: &[u128]) -> Result<()> {
        let k = self.sums.len();
        if values.len() != k {
            return Err(Error::InvalidArgument(format!(
                "expected {k} observable values, got {}",
                values.len()
            )));
        }
        let overflow = || Error::Overflow("sample sums");
        for i in 0..k {
            self.sums[i] = self.sums[i].checked_add(values[i]).ok_or_else(overflow)?;
            for j in i..k {
                let p = values[i].checked_mul(values[j]).ok_or_else(overflow)?;
                let slot = &mut self.cross[tri(k, i, j)];
                *slot = slot.checked_add(p).ok_or_else(overflow)?;
            }
        }
        self.samples += 1;
        Ok(())
    }

    pub fn merge(mut self, other: &SampleMoments) -> Result<Self> {
        let overflow = || Error::Overflow("sample sums");
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a = a.checked_add(*b).ok_or_else(overflow)?;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a = a.checked_add(*b).ok_or_else(overflow)?;
        }
        self.samples += other.samples;
        Ok(self)
    }

    pub fn sum(&self, i: usize) -> u128 {
        self.sums[i]
    }

    /// Exact sample mean of observable `i`.
    pub fn exact_mean(&self, i: usize) -> BigRational {
        BigRational::new(BigInt::from(self.sums[i]), BigInt::from(self.samples))
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sums[i] as f64 / self.samples as f64
    }

    /// Unbiased sample covariance, computed exactly before rounding.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        let n = BigInt::from(self.samples);
        if self.samples < 2 {
            return f64::NAN;
        }
        let num = &n * BigInt::from(self.cross[tri(self.sums.len(), i, j)])
            - BigInt::from(self.sums[i]) * BigInt::from(self.sums[j]);
        let den = &n * (&n - 1);
        BigRational::new(num, den).to_f64().unwrap_or(f64::NAN)
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.covariance(i, i)
    }

    /// Standard error of the mean of observable `i`.
    pub fn stderr(&self, i: usize) -> f64 {
        (self.variance(i).max(0.0) / self.samples as f64).sqrt()
    }

    /// Delta-method standard error of a smooth function of the means with
    /// gradient `grad` at the sample means.
    pub fn delta_stderr(&self, grad: &[f64]) -> f64 {
        let k = self.sums.len();
        let mut var = 0.0;
        for i in 0..k {
            for j in 0..k {
                var += grad[i] * grad[j] * self.covariance(i, j);
            }
        }
        (var.max(0.0) / self.samples as f64).sqrt()
    }

    /// Standard error of the difference of the means of `i` and `j`.
    pub fn difference_stderr(&self, i: usize, j: usize) -> f64 {
        let mut grad = vec![0.0; self.sums.len()];
        grad[i] += 1.0;
        grad[j] -= 1.0;
        self.delta_stderr(&grad)
    }
}

/// Draws `samples` points and accumulates `observe` on each. Sample `i`
/// uses stream `i` of `seed`, so results do not depend on thread count.
pub fn sample_observables<F>(
    plan: &SamplerPlan,
    samples: u64,
    seed: u64,
    observables: usize,
    observe: F,
) -> Result<SampleMoments>
where
    F: Fn(&HomPoint) -> Result<Vec<u128>> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<SampleMoments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = SampleMoments::new(observables);
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let h = sample_hom(plan, Seed::new(seed, i));
                acc.push(&observe(&h)?)?;
            }
            Ok(acc)
        })
        .collect();
    parts
        .into_iter()
        .try_fold(SampleMoments::new(observables), |acc, p| acc.merge(&p?))
}

/// Sample mean and standard error of the joint observable of `spec`.
pub fn monte_carlo_expectation(
    plan: &SamplerPlan,
    spec: &ObservableSpec,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidArgument("at least two samples are needed".into()));
    }
    if spec.genus() != plan.genus() {
        return Err(Error::GenusMismatch {
            expected: plan.genus().get(),
            found: spec.genus().get(),
        });
    }
    let eval = spec.evaluator();
    let m = sample_observables(plan, samples, seed, 1, |h| {
        let values = eval.group_values(h)?;
        Ok(vec![eval.joint(&values)?])
    })?;
    Ok((m.mean(0), m.stderr(0)))
}
