//! Experiments comparing finite-`n` statistics with their limits: joint
//! moments against Poisson predictions, joint against product-of-group
//! moments, and cycle counts against `1/d`.

pub mod acceptance;
mod oracles;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::characters::rational_to_f64;
use crate::error::{Error, Result};
use crate::hom_space::{build_sampler, fold_homs, sample_observables, Budget, HomSpace, SampleMoments};
use crate::limits::{limit_cycle_moment, limit_product_moment, rational_string};
use crate::perm::HomPoint;
use crate::stats::{ObservableSpec, SpecWarning};
use crate::words::{Genus, Word};

/// How a row of an experiment is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Enumerate,
    Sample,
    /// Enumerate when the budget allows, otherwise sample.
    Auto,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enumerate => "enumerate",
            Method::Sample => "sample",
            Method::Auto => "auto",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(Method::Enumerate),
            "sample" => Ok(Method::Sample),
            "auto" => Ok(Method::Auto),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

/// Which `n` to run, and how.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub spec: ObservableSpec,
    pub n_values: Vec<usize>,
    pub method: Method,
    pub samples: u64,
    pub seed: u64,
    pub budget: Budget,
}

impl ExperimentPlan {
    pub fn new(spec: ObservableSpec, n_values: Vec<usize>, method: Method, samples: u64, seed: u64) -> Result<Self> {
        if n_values.is_empty() {
            return Err(Error::InvalidArgument("no values of n given".into()));
        }
        if n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("n values must be strictly increasing".into()));
        }
        if n_values[0] < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if method != Method::Enumerate && samples < 2 {
            return Err(Error::InvalidArgument("at least two samples are needed".into()));
        }
        Ok(ExperimentPlan {
            spec,
            n_values,
            method,
            samples,
            seed,
            budget: Budget::default(),
        })
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn genus(&self) -> Genus {
        self.spec.genus()
    }

    fn space(&self, n: usize) -> Result<HomSpace> {
        Ok(HomSpace::new(n, self.genus())?.with_budget(self.budget))
    }

    /// The concrete method used at `n`.
    pub fn method_at(&self, n: usize) -> Result<Method> {
        match self.method {
            Method::Auto => Ok(if self.space(n)?.enumeration_feasible() {
                Method::Enumerate
            } else {
                Method::Sample
            }),
            m => Ok(m),
        }
    }
}

/// A value that is either exact or a Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    Exact(BigRational),
    Sampled { mean: f64, stderr: f64, samples: u64 },
}

impl Estimate {
    pub fn value(&self) -> f64 {
        match self {
            Estimate::Exact(r) => rational_to_f64(r),
            Estimate::Sampled { mean, .. } => *mean,
        }
    }

    /// Zero for exact values.
    pub fn stderr(&self) -> f64 {
        match self {
            Estimate::Exact(_) => 0.0,
            Estimate::Sampled { stderr, .. } => *stderr,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Estimate::Exact(_))
    }

    /// `|self − target|`, exact when `self` is.
    pub fn distance_to(&self, target: &BigRational) -> Estimate {
        match self {
            Estimate::Exact(r) => Estimate::Exact((r - target).abs()),
            Estimate::Sampled { mean, stderr, samples } => Estimate::Sampled {
                mean: (mean - rational_to_f64(target)).abs(),
                stderr: *stderr,
                samples: *samples,
            },
        }
    }

    /// Whether `target` lies within `k` standard errors. Exact values must
    /// equal the target.
    pub fn within(&self, target: &BigRational, k: f64) -> bool {
        match self {
            Estimate::Exact(r) => r == target,
            Estimate::Sampled { mean, stderr, .. } => {
                (mean - rational_to_f64(target)).abs() <= k * stderr
            }
        }
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimate::Exact(r) => write!(f, "{r} (≈ {:.6})", rational_to_f64(r)),
            Estimate::Sampled { mean, stderr, .. } => write!(f, "{mean:.6} ± {stderr:.6}"),
        }
    }
}

impl Serialize for Estimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Estimate::Exact(r) => {
                let mut st = s.serialize_struct("Estimate", 3)?;
                st.serialize_field("kind", "exact")?;
                st.serialize_field("value", &r.to_string())?;
                st.serialize_field("decimal", &rational_to_f64(r))?;
                st.end()
            }
            Estimate::Sampled { mean, stderr, samples } => {
                let mut st = s.serialize_struct("Estimate", 4)?;
                st.serialize_field("kind", "sampled")?;
                st.serialize_field("mean", mean)?;
                st.serialize_field("stderr", stderr)?;
                st.serialize_field("samples", samples)?;
                st.end()
            }
        }
    }
}

/// Sums of integer observables over a whole space, or over a sample.
#[derive(Clone, Debug)]
pub enum Measurement {
    Exact { count: u128, sums: Vec<u128> },
    Sampled(SampleMoments),
}

impl Measurement {
    /// Evaluates `observe` (returning `k` values) on every point at `n`, or
    /// on a sample, according to `method`.
    pub fn take<F>(space: &HomSpace, method: Method, samples: u64, seed: u64, k: usize, observe: F) -> Result<Self>
    where
        F: Fn(&HomPoint) -> Result<Vec<u128>> + Sync,
    {
        let enumerate = match method {
            Method::Enumerate => true,
            Method::Sample => false,
            Method::Auto => space.enumeration_feasible(),
        };
        match enumerate {
            true => {
                let add = |x: u128, y: u128| x.checked_add(y).ok_or(Error::Overflow("exact sums"));
                let (count, sums) = fold_homs(
                    space,
                    || Ok((0u128, vec![0u128; k])),
                    |acc: &mut Result<(u128, Vec<u128>)>, h| {
                        let (count, sums) = acc.as_mut().map_err(|e| e.clone())?;
                        for (s, v) in sums.iter_mut().zip(observe(h)?) {
                            *s = add(*s, v)?;
                        }
                        *count += 1;
                        Ok(())
                    },
                    |a, b| {
                        let ((ca, sa), (cb, sb)) = (a?, b?);
                        let sums = sa.iter().zip(&sb).map(|(&x, &y)| add(x, y)).collect::<Result<_>>()?;
                        Ok((ca + cb, sums))
                    },
                )??;
                Ok(Measurement::Exact { count, sums })
            }
            false => {
                let plan = build_sampler(space.n, space.genus)?;
                Ok(Measurement::Sampled(sample_observables(&plan, samples, seed, k, observe)?))
            }
        }
    }

    fn exact_mean(count: u128, sum: u128) -> BigRational {
        BigRational::new(BigInt::from(sum), BigInt::from(count))
    }

    pub fn mean(&self, i: usize) -> Estimate {
        match self {
            Measurement::Exact { count, sums } => Estimate::Exact(Self::exact_mean(*count, sums[i])),
            Measurement::Sampled(m) => Estimate::Sampled {
                mean: m.mean(i),
                stderr: m.stderr(i),
                samples: m.samples(),
            },
        }
    }

    /// `Π_{i ∈ idx} E[X_i]`.
    pub fn product_of_means(&self, idx: &[usize]) -> Estimate {
        self.affine(None, idx)
    }

    /// `E[X_first] − Π_{i ∈ idx} E[X_i]`.
    pub fn mean_minus_product(&self, first: usize, idx: &[usize]) -> Estimate {
        self.affine(Some(first), idx)
    }

    fn affine(&self, first: Option<usize>, idx: &[usize]) -> Estimate {
        match self {
            Measurement::Exact { count, sums } => {
                let product = idx
                    .iter()
                    .map(|&i| Self::exact_mean(*count, sums[i]))
                    .fold(BigRational::one(), |a, x| a * x);
                Estimate::Exact(match first {
                    Some(f) => Self::exact_mean(*count, sums[f]) - product,
                    None => product,
                })
            }
            Measurement::Sampled(m) => {
                let means: Vec<f64> = idx.iter().map(|&i| m.mean(i)).collect();
                let product: f64 = means.iter().product();
                let sign = if first.is_some() { -1.0 } else { 1.0 };
                let mut grad = vec![0.0; m.observables()];
                for (pos, &i) in idx.iter().enumerate() {
                    let others: f64 = means
                        .iter()
                        .enumerate()
                        .filter(|&(q, _)| q != pos)
                        .map(|(_, v)| v)
                        .product();
                    grad[i] += sign * others;
                }
                let mean = match first {
                    Some(f) => {
                        grad[f] += 1.0;
                        m.mean(f) - product
                    }
                    None => product,
                };
                Estimate::Sampled {
                    mean,
                    stderr: m.delta_stderr(&grad),
                    samples: m.samples(),
                }
            }
        }
    }
}

/// One `n` of a convergence or independence experiment.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub method: Method,
    pub joint: Estimate,
    pub product_of_groups: Estimate,
    /// `joint − product_of_groups`.
    pub gap: Estimate,
    /// `|joint − prediction|`.
    pub error: Estimate,
    /// `n · |joint − prediction|`.
    pub n_error: f64,
    /// `n · |gap|`.
    pub n_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub spec: String,
    #[serde(with = "rational_string")]
    pub prediction: BigRational,
    pub prediction_decimal: f64,
    pub warnings: Vec<SpecWarning>,
    pub seed: u64,
    pub samples: u64,
    pub rows: Vec<ConvergenceRow>,
}

fn convergence_row(plan: &ExperimentPlan, n: usize, prediction: &BigRational) -> Result<ConvergenceRow> {
    let method = plan.method_at(n)?;
    let eval = plan.spec.evaluator();
    let t = plan.spec.groups().len();
    let m = Measurement::take(&plan.space(n)?, method, plan.samples, plan.seed, t + 1, |h| {
        let groups = eval.group_values(h)?;
        let mut out = Vec::with_capacity(t + 1);
        out.push(eval.joint(&groups)?);
        out.extend(groups);
        Ok(out)
    })?;
    let groups: Vec<usize> = (1..=t).collect();
    let joint = m.mean(0);
    let gap = m.mean_minus_product(0, &groups);
    let error = joint.distance_to(prediction);
    Ok(ConvergenceRow {
        n,
        method,
        n_error: n as f64 * error.value(),
        n_gap: n as f64 * gap.value().abs(),
        product_of_groups: m.product_of_means(&groups),
        joint,
        gap,
        error,
    })
}

/// Joint moment, product of group moments and limit prediction for each `n`.
pub fn run_convergence(plan: &ExperimentPlan) -> Result<ConvergenceReport> {
    let limit = limit_product_moment(&plan.spec);
    let rows = plan
        .n_values
        .par_iter()
        .map(|&n| convergence_row(plan, n, &limit.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        spec: plan.spec.to_string(),
        prediction_decimal: rational_to_f64(&limit.value),
        prediction: limit.value,
        warnings: limit.warnings,
        seed: plan.seed,
        samples: plan.samples,
        rows,
    })
}

/// [`run_convergence`] for specs with at least two groups; the `gap`
/// column measures dependence between the groups.
pub fn run_independence(plan: &ExperimentPlan) -> Result<ConvergenceReport> {
    if plan.spec.groups().len() < 2 {
        return Err(Error::InvalidArgument("independence needs at least two groups".into()));
    }
    run_convergence(plan)
}

/// Mean of `C(word, d)` at one `n`.
#[derive(Clone, Debug, Serialize)]
pub struct CycleMeanRow {
    pub n: usize,
    pub word: String,
    pub d: usize,
    pub mean: Estimate,
    #[serde(with = "rational_string")]
    pub limit: BigRational,
}

/// Covariance of `C(first, d)` and `C(second, e)` at one `n`.
#[derive(Clone, Debug, Serialize)]
pub struct CycleCovarianceRow {
    pub n: usize,
    pub first: String,
    pub d: usize,
    pub second: String,
    pub e: usize,
    pub covariance: Estimate,
    #[serde(with = "rational_string")]
    pub limit: BigRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleReport {
    pub seed: u64,
    pub samples: u64,
    pub means: Vec<CycleMeanRow>,
    pub covariances: Vec<CycleCovarianceRow>,
}

/// Means of `C(w, d)` for `d <= max_d` and covariances across distinct
/// words, against the Poisson limits `1/d` and `0`.
pub fn run_cycle_convergence(words: &[Word], max_d: usize, plan: &ExperimentPlan) -> Result<CycleReport> {
    if words.is_empty() || max_d < 1 {
        return Err(Error::InvalidArgument("need at least one word and max_d >= 1".into()));
    }
    if let Some(&n) = plan.n_values.first() {
        if max_d > n {
            return Err(Error::CycleLengthOutOfRange { d: max_d, n });
        }
    }
    if words.iter().any(|w| w.is_identity()) {
        return Err(Error::IdentityWord);
    }
    let pairs: Vec<(usize, usize)> = (0..words.len())
        .flat_map(|i| (i + 1..words.len()).map(move |j| (i, j)))
        .collect();
    let w = words.len();
    let single = |i: usize, d: usize| i * max_d + (d - 1);
    let cross_base = w * max_d;
    let cross = |p: usize, d: usize, e: usize| cross_base + (p * max_d + (d - 1)) * max_d + (e - 1);
    let k = cross_base + pairs.len() * max_d * max_d;

    let per_n = plan
        .n_values
        .par_iter()
        .map(|&n| {
            let method = plan.method_at(n)?;
            let m = Measurement::take(&plan.space(n)?, method, plan.samples, plan.seed, k, |h| {
                let mut out = vec![0u128; k];
                let mut counts = Vec::with_capacity(w);
                for (i, word) in words.iter().enumerate() {
                    let mut c = vec![0u128; max_d + 1];
                    for len in h.evaluate(word)?.cycle_lengths() {
                        if (len as usize) <= max_d {
                            c[len as usize] += 1;
                        }
                    }
                    for d in 1..=max_d {
                        out[single(i, d)] = c[d];
                    }
                    counts.push(c);
                }
                for (p, &(i, j)) in pairs.iter().enumerate() {
                    for d in 1..=max_d {
                        for e in 1..=max_d {
                            out[cross(p, d, e)] = counts[i][d] * counts[j][e];
                        }
                    }
                }
                Ok(out)
            })?;
            let mut means = Vec::new();
            for (i, word) in words.iter().enumerate() {
                for d in 1..=max_d {
                    means.push(CycleMeanRow {
                        n,
                        word: word.to_string(),
                        d,
                        mean: m.mean(single(i, d)),
                        limit: limit_cycle_moment(&[(i, d as u32, 1)])?,
                    });
                }
            }
            let mut covariances = Vec::new();
            for (p, &(i, j)) in pairs.iter().enumerate() {
                for d in 1..=max_d {
                    for e in 1..=max_d {
                        let joint = limit_cycle_moment(&[(i, d as u32, 1), (j, e as u32, 1)])?;
                        let product = limit_cycle_moment(&[(i, d as u32, 1)])? * limit_cycle_moment(&[(j, e as u32, 1)])?;
                        covariances.push(CycleCovarianceRow {
                            n,
                            first: words[i].to_string(),
                            d,
                            second: words[j].to_string(),
                            e,
                            covariance: m.mean_minus_product(cross(p, d, e), &[single(i, d), single(j, e)]),
                            limit: joint - product,
                        });
                    }
                }
            }
            Ok((means, covariances))
        })
        .collect::<Result<Vec<_>>>()?;
    let (means, covariances): (Vec<_>, Vec<_>) = per_n.into_iter().unzip();
    Ok(CycleReport {
        seed: plan.seed,
        samples: plan.samples,
        means: means.into_iter().flatten().collect(),
        covariances: covariances.into_iter().flatten().collect(),
    })
}

/// Least-squares fit of `e_n ≈ C / n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InverseFit {
    pub c: f64,
    /// Root mean square of `e_n − C/n`.
    pub residual_rms: f64,
    pub max_n_error: f64,
    /// `(n, n · e_n)` in input order.
    pub n_errors: Vec<(usize, f64)>,
}

pub fn fit_inverse_n(errors: &[(usize, f64)]) -> Result<InverseFit> {
    if errors.len() < 3 {
        return Err(Error::InvalidArgument("fitting needs at least three points".into()));
    }
    if let Some(&(n, e)) = errors.iter().find(|&&(n, e)| n == 0 || !(e >= 0.0) || !e.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid error point ({n}, {e})")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(n, e) in errors {
        let x = 1.0 / n as f64;
        num += x * e;
        den += x * x;
    }
    let c = num / den;
    let residual_rms = (errors
        .iter()
        .map(|&(n, e)| (e - c / n as f64).powi(2))
        .sum::<f64>()
        / errors.len() as f64)
        .sqrt();
    let n_errors: Vec<(usize, f64)> = errors.iter().map(|&(n, e)| (n, n as f64 * e)).collect();
    let max_n_error = n_errors.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    Ok(InverseFit {
        c,
        residual_rms,
        max_n_error,
        n_errors,
    })
}

/// Exact `E_n[F(a₁)]` from the character formula for the fibres of
/// `φ ↦ φ(a₁)`; feasible far beyond enumeration.
pub fn exact_generator_fixed_points(n: usize, genus: Genus) -> Result<BigRational> {
    let table = crate::characters::CharacterTable::shared(n);
    let mut total = BigInt::zero();
    for (mu, p) in table.partitions().iter().enumerate() {
        let fixed = p.multiplicity(1);
        if fixed == 0 {
            continue;
        }
        let fiber = table.generator_fiber_count(genus.get(), mu)?;
        total += BigInt::from(fiber * table.class_size(mu) * fixed);
    }
    let count = crate::characters::hom_count(n, genus.get())?;
    Ok(BigRational::new(total, BigInt::from(count)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2() -> Genus {
        Genus::new(2).unwrap()
    }

    #[test]
    fn fit_examples() {
        let exact: Vec<(usize, f64)> = (2..8).map(|n| (n, 1.0 / n as f64)).collect();
        let fit = fit_inverse_n(&exact).unwrap();
        assert!((fit.c - 1.0).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
        let zero = fit_inverse_n(&[(2, 0.0), (3, 0.0), (4, 0.0)]).unwrap();
        assert_eq!(zero.c, 0.0);
        assert!(fit_inverse_n(&[(2, 0.1), (3, 0.1)]).is_err());
        assert!(fit_inverse_n(&[(2, 0.1), (3, -0.1), (4, 0.0)]).is_err());
    }

    #[test]
    fn enumerated_convergence_rows() {
        let spec = ObservableSpec::from_words(g2(), &[("a1", &[1], 1)]).unwrap();
        let plan = ExperimentPlan::new(spec, vec![2, 3, 4], Method::Enumerate, 0, 0).unwrap();
        let report = run_convergence(&plan).unwrap();
        assert_eq!(report.prediction, BigRational::one());
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows.iter().all(|r| r.joint.is_exact()));
        assert_eq!(report.rows[0].joint, Estimate::Exact(BigRational::one()));
        assert_eq!(
            report.rows[1].joint,
            Estimate::Exact(BigRational::new(10.into(), 9.into()))
        );
        for r in &report.rows {
            assert_eq!(r.gap, Estimate::Exact(BigRational::zero()));
            let n = r.n;
            let exact = exact_generator_fixed_points(n, g2()).unwrap();
            assert_eq!(r.joint, Estimate::Exact(exact));
        }
    }

    #[test]
    fn empty_spec_rows_are_one() {
        let plan = ExperimentPlan::new(ObservableSpec::empty(g2()), vec![2, 3], Method::Enumerate, 0, 0).unwrap();
        let report = run_convergence(&plan).unwrap();
        for r in &report.rows {
            assert_eq!(r.joint, Estimate::Exact(BigRational::one()));
        }
    }

    #[test]
    fn plan_validation() {
        let spec = ObservableSpec::empty(g2());
        assert!(ExperimentPlan::new(spec.clone(), vec![3, 2], Method::Auto, 10, 0).is_err());
        assert!(ExperimentPlan::new(spec.clone(), vec![], Method::Auto, 10, 0).is_err());
        assert!(ExperimentPlan::new(spec, vec![2], Method::Sample, 1, 0).is_err());
    }

    #[test]
    fn exact_independence_gap_for_distinct_generators() {
        let spec = ObservableSpec::from_words(g2(), &[("a1", &[1], 1), ("a2", &[1], 1)]).unwrap();
        let plan = ExperimentPlan::new(spec, vec![2, 3, 4], Method::Enumerate, 0, 0).unwrap();
        let report = run_independence(&plan).unwrap();
        assert!(report.rows.iter().all(|r| r.gap.is_exact() && r.n_gap.is_finite()));
        let single = ObservableSpec::from_words(g2(), &[("a1", &[1], 1)]).unwrap();
        let plan = ExperimentPlan::new(single, vec![2, 3], Method::Enumerate, 0, 0).unwrap();
        assert!(run_independence(&plan).is_err());
    }

    #[test]
    fn sampled_rows_track_exact_values() {
        let spec = ObservableSpec::from_words(g2(), &[("a1", &[1], 1)]).unwrap();
        let plan = ExperimentPlan::new(spec, vec![5, 6], Method::Sample, 20_000, 5).unwrap();
        let report = run_convergence(&plan).unwrap();
        for r in &report.rows {
            let exact = exact_generator_fixed_points(r.n, g2()).unwrap();
            assert!(r.joint.within(&exact, 4.0), "{} vs {}", r.joint, exact);
        }
    }

    #[test]
    fn enumerated_cycle_means() {
        let words = [Word::parse("a1", g2()).unwrap(), Word::parse("a2", g2()).unwrap()];
        let spec = ObservableSpec::empty(g2());
        let plan = ExperimentPlan::new(spec, vec![3, 4], Method::Enumerate, 0, 0).unwrap();
        let report = run_cycle_convergence(&words, 2, &plan).unwrap();
        assert_eq!(report.means.len(), 2 * 2 * 2);
        assert_eq!(report.covariances.len(), 2 * 4);
        // Σ_d d·E[C_d] over all d is n; here only d <= 2, so just a sanity bound
        for row in &report.means {
            assert!(row.mean.value() <= row.n as f64);
        }
        assert!(run_cycle_convergence(&words, 5, &plan).is_err());
    }
}
