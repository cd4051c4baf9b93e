//! The acceptance suite: nine criteria, each checked against brute-force
//! oracles or statistical bands and reported as pass or fail.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::oracles;
use super::{exact_generator_fixed_points, fit_inverse_n, Estimate, Measurement, Method};
use crate::characters::{commutator_count, hom_count, rational_to_f64, CharacterTable};
use crate::error::Result;
use crate::hom_space::{build_sampler, enumerate_homs, exact_expectation, fold_homs, sample_hom, HomSpace, Seed};
use crate::limits::{limit_product_moment, poisson_moment};
use crate::partition::{factorial, partitions};
use crate::perm::{HomPoint, Permutation};
use crate::stats::{cycles_from_fixed_points, power_identity_check, ObservableSpec, F};
use crate::words::{Genus, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AcceptanceConfig {
    /// Samples per Monte Carlo run.
    pub samples: u64,
    pub seed: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            samples: 100_000,
            seed: 2024,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(serialize_with = "as_secs")]
    pub elapsed: Duration,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {} ({}) in {:.2}s: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

pub const CRITERIA: [(u32, &str); 9] = [
    (1, "hom counts"),
    (2, "character table"),
    (3, "commutator counts"),
    (4, "sampler exactness"),
    (5, "limit oracle"),
    (6, "convergence to d(a)"),
    (7, "asymptotic independence"),
    (8, "cycle statistics"),
    (9, "structural identities"),
];

fn g2() -> Genus {
    Genus::new(2).expect("genus 2")
}

fn word(text: &str) -> Word {
    Word::parse(text, g2()).expect("fixed word")
}

fn spec(groups: &[(&str, &[u32], u32)]) -> ObservableSpec {
    ObservableSpec::from_words(g2(), groups).expect("fixed spec")
}

/// Collects failure messages; a criterion passes when none were recorded.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn error(&mut self, e: crate::Error) {
        self.failures.push(format!("error: {e}"));
    }

    fn time_limit(&mut self, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.check(
            t < limit,
            format!("time {:.1}s (limit {}s)", t.as_secs_f64(), limit.as_secs()),
        );
    }

    fn finish(self, id: u32, start: Instant) -> CriterionResult {
        let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("?");
        let detail = if self.failures.is_empty() {
            self.notes.join("; ")
        } else {
            let mut parts = vec![format!("failed: {}", self.failures.join("; "))];
            if !self.notes.is_empty() {
                parts.push(format!("ok: {}", self.notes.join("; ")));
            }
            parts.join(" | ")
        };
        CriterionResult {
            id,
            name,
            passed: self.failures.is_empty(),
            detail,
            elapsed: start.elapsed(),
        }
    }
}

/// Runs a single criterion by number.
pub fn run_criterion(id: u32, cfg: &AcceptanceConfig) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::default();
    let outcome = match id {
        1 => hom_counts(&mut c),
        2 => character_table(&mut c),
        3 => commutator_counts(&mut c),
        4 => sampler_exactness(&mut c, cfg),
        5 => limit_oracle(&mut c),
        6 => convergence(&mut c, cfg),
        7 => independence(&mut c, cfg),
        8 => cycle_statistics(&mut c, cfg),
        9 => structural_identities(&mut c),
        _ => {
            c.check(false, format!("no criterion {id}"));
            Ok(())
        }
    };
    if let Err(e) = outcome {
        c.error(e);
    }
    let limit = match id {
        1 | 4 => Some(60),
        2 | 3 => Some(30),
        5 => Some(5),
        9 => Some(120),
        _ => None,
    };
    if let Some(secs) = limit {
        c.time_limit(start, Duration::from_secs(secs));
    }
    c.finish(id, start)
}

/// Runs every criterion in order.
pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, cfg)).collect()
}

fn hom_counts(c: &mut Checks) -> Result<()> {
    for n in 2..=4 {
        let brute = oracles::genus_two_hom_count(n);
        let formula = hom_count(n, 2)?;
        let visits = enumerate_homs(&HomSpace::new(n, g2())?, |_| {})?;
        c.check(
            formula == BigUint::from(brute) && visits == brute as u128,
            format!("n={n}: formula {formula}, enumeration {visits}, brute force {brute}"),
        );
    }
    Ok(())
}

fn character_table(c: &mut Checks) -> Result<()> {
    let reference = oracles::s5_character_table();
    let t5 = CharacterTable::new(5);
    let mut mismatches = 0;
    for (i, lambda) in t5.partitions().iter().enumerate() {
        for (j, mu) in t5.partitions().iter().enumerate() {
            let expected = reference[&(lambda.parts().to_vec(), mu.parts().to_vec())];
            if t5.value(i, j) != expected as i128 {
                mismatches += 1;
            }
        }
    }
    c.check(mismatches == 0, format!("S5 table: {mismatches} of 49 entries differ"));

    let mut bad_orth = Vec::new();
    for n in 1..=8 {
        let t = CharacterTable::shared(n);
        let nf = BigInt::from(factorial(n));
        for a in 0..t.len() {
            for b in a..t.len() {
                let s: BigInt = (0..t.len())
                    .map(|mu| BigInt::from(t.class_size(mu).clone()) * t.value(a, mu) * t.value(b, mu))
                    .sum();
                let expected = if a == b { nf.clone() } else { BigInt::zero() };
                if s != expected {
                    bad_orth.push((n, a, b));
                }
            }
        }
    }
    c.check(bad_orth.is_empty(), format!("row orthogonality n<=8: {} failures", bad_orth.len()));

    let bad_dims: Vec<usize> = (1..=12)
        .filter(|&n| {
            let t = CharacterTable::shared(n);
            let s: BigUint = (0..t.len()).map(|l| t.dim(l) * t.dim(l)).sum();
            s != factorial(n)
        })
        .collect();
    c.check(bad_dims.is_empty(), format!("sum of dim^2 = n! for n<=12 (failures {bad_dims:?})"));
    Ok(())
}

fn commutator_counts(c: &mut Checks) -> Result<()> {
    for n in 1..=8 {
        let mut total = BigUint::zero();
        for mu in partitions(n) {
            total += mu.class_size() * commutator_count(n, &mu)?;
        }
        let nf = factorial(n);
        c.check(total == &nf * &nf, format!("n={n}: Σ |class|·N = (n!)²"));
    }
    let brute = oracles::commutator_counts(3);
    for (mu, expected) in [(vec![1, 1, 1], 18u64), (vec![2, 1], 0), (vec![3], 9)] {
        let p = crate::Partition::new(mu.clone())?;
        let formula = commutator_count(3, &p)?;
        c.check(
            formula == BigUint::from(expected) && brute[&mu] == expected,
            format!("S3 class {p}: formula {formula}, brute force {}", brute[&mu]),
        );
    }
    Ok(())
}

fn sampler_exactness(c: &mut Checks, cfg: &AcceptanceConfig) -> Result<()> {
    let space = HomSpace::new(3, g2())?;
    let points = std::sync::Mutex::new(Vec::new());
    enumerate_homs(&space, |h| points.lock().expect("no poisoning").push(h.images().to_vec()))?;
    let mut points = points.into_inner().expect("no poisoning");
    points.sort();
    let index: HashMap<Vec<Permutation>, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let cells = points.len();

    let plan = build_sampler(3, g2())?;
    let hits: Vec<Option<usize>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let h = sample_hom(&plan, Seed::new(cfg.seed, i));
            if h.satisfies_relator() {
                index.get(h.images()).copied()
            } else {
                None
            }
        })
        .collect();
    let outside = hits.iter().filter(|h| h.is_none()).count();
    c.check(outside == 0, format!("{outside} samples outside the relator variety"));
    let mut counts = vec![0u64; cells];
    for i in hits.into_iter().flatten() {
        counts[i] += 1;
    }
    let n = cfg.samples as f64;
    let expected = n / cells as f64;
    let chi2: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let quantile = ChiSquared::new((cells - 1) as f64)
        .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?
        .inverse_cdf(0.999);
    c.check(chi2 < quantile, format!("chi2 {chi2:.1} vs 0.999 quantile {quantile:.1} ({} dof)", cells - 1));
    let tv: f64 = counts.iter().map(|&o| (o as f64 / n - 1.0 / cells as f64).abs()).sum::<f64>() / 2.0;
    // E|Bin(N,p)/N − p| ≈ sqrt(2p(1−p)/(πN)) per cell, for reference
    let p = 1.0 / cells as f64;
    let tv_expected = cells as f64 * (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n)).sqrt() / 2.0;
    c.check(
        tv < 0.02,
        format!("TV {tv:.4} (bound 0.02; an exactly uniform sampler gives about {tv_expected:.4} at {} samples)", cfg.samples),
    );
    Ok(())
}

fn limit_oracle(c: &mut Checks) -> Result<()> {
    let fifteen = limit_product_moment(&spec(&[("a1", &[2, 3], 1), ("a2", &[4], 1)]));
    c.check(
        fifteen.value == BigRational::from_integer(15.into()),
        format!("worked example = {}", fifteen.value),
    );
    let bad: Vec<u32> = (1..=48)
        .filter(|&a| {
            limit_product_moment(&spec(&[("a1", &[a], 1)])).value
                != BigRational::from_integer(oracles::divisor_count(a).into())
        })
        .collect();
    c.check(bad.is_empty(), format!("single power → d(a) for a<=48 (failures {bad:?})"));
    let bad: Vec<u32> = (0..=10)
        .filter(|&m| {
            poisson_moment(&BigRational::one(), m).ok()
                != Some(BigRational::from_integer(oracles::bell_by_enumeration(m as usize).into()))
        })
        .collect();
    c.check(bad.is_empty(), format!("Poisson(1) moments = Bell numbers for m<=10 (failures {bad:?})"));
    Ok(())
}

fn sampled(space: &HomSpace, cfg: &AcceptanceConfig, k: usize, observe: impl Fn(&HomPoint) -> Result<Vec<u128>> + Sync) -> Result<Measurement> {
    Measurement::take(space, Method::Sample, cfg.samples, cfg.seed, k, observe)
}

fn convergence(c: &mut Checks, cfg: &AcceptanceConfig) -> Result<()> {
    let s = spec(&[("a1", &[1], 1)]);
    let one = BigRational::one();
    let mut errors = Vec::new();
    for n in [2, 3, 4] {
        let e = exact_expectation(&HomSpace::new(n, g2())?, &s)?;
        c.check(e == one, format!("n={n}: exact E = {e} (≈ {:.5}), target 1", rational_to_f64(&e)));
        errors.push((n, rational_to_f64(&(&e - &one)).abs()));
    }
    let eval = s.evaluator();
    let mut largest = None;
    for n in [8, 12, 16] {
        let m = sampled(&HomSpace::new(n, g2())?, cfg, 1, |h| eval.group_values(h))?;
        let est = m.mean(0);
        let finite = exact_generator_fixed_points(n, g2())?;
        c.check(
            est.within(&one, 3.0),
            format!(
                "n={n}: sampled {est}, target 1 (exact finite-n value {:.5}, {:.1} stderr from the sample)",
                rational_to_f64(&finite),
                (est.value() - rational_to_f64(&finite)).abs() / est.stderr()
            ),
        );
        errors.push((n, (est.value() - 1.0).abs()));
        largest = Some((n, (est.value() - 1.0).abs()));
    }
    let fit = fit_inverse_n(&errors)?;
    c.check(
        fit.max_n_error.is_finite(),
        format!("fitted C = {:.4}, max n·e_n = {:.4}", fit.c, fit.max_n_error),
    );
    if let Some((n, e)) = largest {
        c.check(e < 5.0 * fit.c / n as f64, format!("n={n}: error {e:.5} < 5C/n = {:.5}", 5.0 * fit.c / n as f64));
    }
    Ok(())
}

fn independence(c: &mut Checks, cfg: &AcceptanceConfig) -> Result<()> {
    let real = spec(&[("a1", &[2, 3], 1), ("a2", &[4], 1)]);
    let fake = spec(&[("a1", &[1], 1), ("a1", &[2], 1)]);
    let (er, ef) = (real.evaluator(), fake.evaluator());
    let mut gaps = BTreeMap::new();
    let mut fake_gaps = BTreeMap::new();
    let mut joints = BTreeMap::new();
    for n in [8, 12, 16] {
        let m = sampled(&HomSpace::new(n, g2())?, cfg, 6, |h| {
            let r = er.group_values(h)?;
            let f = ef.group_values(h)?;
            Ok(vec![er.joint(&r)?, r[0], r[1], ef.joint(&f)?, f[0], f[1]])
        })?;
        joints.insert(n, m.mean(0));
        gaps.insert(n, m.mean_minus_product(0, &[1, 2]));
        fake_gaps.insert(n, m.mean_minus_product(3, &[4, 5]));
    }
    let fifteen = BigRational::from_integer(15.into());
    c.check(joints[&16].within(&fifteen, 3.0), format!("n=16 joint {} vs 15", joints[&16]));
    let (g8, g16) = (&gaps[&8], &gaps[&16]);
    c.check(
        g16.value().abs() < g8.value().abs() || g16.value().abs() <= 2.0 * g16.stderr(),
        format!("gap n=8 {g8}, n=16 {g16}"),
    );
    let fit = fit_inverse_n(&gaps.iter().map(|(&n, g)| (n, g.value().abs())).collect::<Vec<_>>())?;
    let control = fake_gaps[&16].value();
    c.check(
        control > 5.0 * fit.c / 16.0,
        format!(
            "same-base control gap at n=16 {} > 5C/n = {:.4} (C = {:.4})",
            fake_gaps[&16],
            5.0 * fit.c / 16.0,
            fit.c
        ),
    );
    Ok(())
}

fn cycle_statistics(c: &mut Checks, cfg: &AcceptanceConfig) -> Result<()> {
    let (w1, w2) = (word("a1"), word("a2"));
    // observables: C(a1, d) for d = 1..3, C(a2, d), then the nine products
    let m = sampled(&HomSpace::new(16, g2())?, cfg, 15, |h| {
        let count = |w: &Word| -> Result<[u128; 4]> {
            let mut out = [0u128; 4];
            for l in h.evaluate(w)?.cycle_lengths() {
                if l <= 3 {
                    out[l as usize] += 1;
                }
            }
            Ok(out)
        };
        let (x, y) = (count(&w1)?, count(&w2)?);
        let mut v = vec![x[1], x[2], x[3], y[1], y[2], y[3]];
        for d in 1..=3 {
            for e in 1..=3 {
                v.push(x[d] * y[e]);
            }
        }
        Ok(v)
    })?;
    for d in 1..=3 {
        let est = m.mean(d - 1);
        let target = BigRational::new(BigInt::one(), BigInt::from(d));
        c.check(est.within(&target, 3.0), format!("E C(a1,{d}) = {est} vs 1/{d}"));
    }
    let zero = BigRational::zero();
    for d in 1..=3 {
        for e in 1..=3 {
            let cov: Estimate = m.mean_minus_product(6 + (d - 1) * 3 + (e - 1), &[d - 1, 3 + e - 1]);
            c.check(cov.within(&zero, 3.0), format!("cov(C(a1,{d}), C(a2,{e})) = {cov}"));
        }
    }
    Ok(())
}

fn structural_identities(c: &mut Checks) -> Result<()> {
    let bases = [word("a1"), word("a1 b1")];
    let conjugators = [word("b1"), word("a2 b2'"), word("a1 b1 a1")];
    let relator = g2().relator();
    let mut dehn_words = vec![relator.clone(), word("b1 a1' b1' a1 b1 a2' b2' a2")];
    for (u, v) in [("a1", "b2"), ("a2 b1", "a1'"), ("b1 b1", "a2 a2")] {
        let (u, v) = (word(u), word(v));
        dehn_words.push(u.concat(&relator)?.concat(&v)?);
        dehn_words.push(u.concat(&relator.inverse())?.concat(&v)?);
    }
    let reduced: Vec<(Word, Word)> = dehn_words.iter().map(|w| (w.clone(), w.dehn_reduce())).collect();
    let shorter = reduced.iter().filter(|(w, r)| r.len() < w.len()).count();
    c.note(format!("Dehn reduction shortened {shorter} of {} test words", reduced.len()));

    let mut visited = 0u128;
    for n in 2..=4 {
        let space = HomSpace::new(n, g2())?;
        let (count, failures) = fold_homs(
            &space,
            || (0u128, Vec::<String>::new()),
            |(count, failures), h| {
                *count += 1;
                let mut fail = |what: String| {
                    if failures.len() < 5 {
                        failures.push(what);
                    }
                };
                for w in &bases {
                    for a in 1..=6 {
                        if !power_identity_check(h, w, a)? {
                            fail(format!("power identity {w}^{a}"));
                        }
                    }
                    let lengths = h.evaluate(w)?.cycle_lengths();
                    for r in 1..=6u32 {
                        let mut fixed = BTreeMap::new();
                        for q in crate::stats::divisors(r) {
                            fixed.insert(q, F(h, &w.power(q)?)? as i64);
                        }
                        let direct = lengths.iter().filter(|&&l| l == r).count() as i64;
                        if cycles_from_fixed_points(&fixed, r)? != direct {
                            fail(format!("Möbius inversion {w}, r={r}"));
                        }
                    }
                    let f = F(h, w)?;
                    if F(h, &w.inverse())? != f {
                        fail(format!("inversion {w}"));
                    }
                    for k in &conjugators {
                        if F(h, &w.conjugate_by(k)?)? != f {
                            fail(format!("conjugation of {w} by {k}"));
                        }
                    }
                }
                for (w, r) in &reduced {
                    if h.evaluate(w)? != h.evaluate(r)? {
                        fail(format!("Dehn reduction of {w}"));
                    }
                }
                Ok(())
            },
            |(ca, mut fa), (cb, fb)| {
                fa.extend(fb);
                (ca + cb, fa)
            },
        )?;
        visited += count;
        c.check(failures.is_empty(), format!("n={n}: {count} homs checked{}", if failures.is_empty() { String::new() } else { format!(", failures {:?}", &failures[..failures.len().min(5)]) }));
    }
    c.note(format!("{visited} homs in total"));
    Ok(())
}
