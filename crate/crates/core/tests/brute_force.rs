use std::sync::Mutex;

use itertools::Itertools;
use num_bigint::BigUint;
use num_rational::BigRational;

use scl_core::characters::{commutator_count, hom_count};
use scl_core::hom_space::{
    build_buckets, build_sampler, enumerate_homs, exact_expectation, monte_carlo_expectation, sample_observables,
    Budget, HomSpace, SymmetricGroup,
};
use scl_core::perm::commutator;
use scl_core::stats::{ObservableGroup, ObservableSpec};
use scl_core::verify::exact_generator_fixed_points;
use scl_core::{Genus, HomPoint, Permutation, Word};

fn genus(g: u32) -> Genus {
    Genus::new(g).unwrap()
}

/// Every `2g`-tuple of `S_n` satisfying the relator, by exhaustive search.
fn brute_homs(n: usize, g: u32) -> Vec<HomPoint> {
    let group = SymmetricGroup::new(n);
    (0..2 * g)
        .map(|_| group.elements().iter())
        .multi_cartesian_product()
        .filter_map(|t| HomPoint::new(genus(g), t.into_iter().cloned().collect()).ok())
        .collect()
}

#[test]
fn enumeration_matches_exhaustive_search() {
    for (n, g) in [(2, 2), (3, 2), (2, 3), (4, 2)] {
        let brute = brute_homs(n, g);
        let seen = Mutex::new(Vec::new());
        let count = enumerate_homs(&HomSpace::new(n, genus(g)).unwrap(), |h| {
            seen.lock().unwrap().push(h.images().to_vec())
        })
        .unwrap();
        assert_eq!(count as usize, brute.len(), "n={n} g={g}");
        assert_eq!(BigUint::from(count), hom_count(n, g).unwrap());
        let mut seen = seen.into_inner().unwrap();
        seen.sort();
        let mut expected: Vec<Vec<Permutation>> = brute.iter().map(|h| h.images().to_vec()).collect();
        expected.sort();
        assert_eq!(seen, expected);
    }
}

#[test]
fn exact_expectation_matches_brute_sum() {
    let g = genus(2);
    let a1 = Word::parse("a1", g).unwrap();
    for n in [3, 4] {
        let brute = brute_homs(n, 2);
        let total: usize = brute.iter().map(|h| h.evaluate(&a1).unwrap().fix_count()).sum();
        let expected = BigRational::new(total.into(), brute.len().into());
        let spec = ObservableSpec::from_words(g, &[("a1", &[1], 1)]).unwrap();
        assert_eq!(exact_expectation(&HomSpace::new(n, g).unwrap(), &spec).unwrap(), expected);
        assert_eq!(exact_generator_fixed_points(n, g).unwrap(), expected);
    }
    // the worked-example observable, evaluated point by point
    let spec = ObservableSpec::from_words(g, &[("a1", &[2, 3], 1), ("a2", &[4], 1)]).unwrap();
    let brute = brute_homs(3, 2);
    let total: usize = brute
        .iter()
        .map(|h| {
            let f = |w: &str| h.evaluate(&Word::parse(w, g).unwrap()).unwrap().fix_count();
            f("a1^2") * f("a1^3") * f("a2^4")
        })
        .sum();
    assert_eq!(
        exact_expectation(&HomSpace::new(3, g).unwrap(), &spec).unwrap(),
        BigRational::new(total.into(), brute.len().into())
    );
}

#[test]
fn expectation_invariant_under_conjugation_and_inversion() {
    let g = genus(2);
    let base = |w: &Word| ObservableSpec::new(g, vec![ObservableGroup {
        name: "x".into(),
        word: w.clone(),
        exponents: vec![1, 2],
        power: 1,
    }])
    .unwrap();
    let c = Word::parse("b1 a2", g).unwrap();
    for text in ["a1 b1", "a1^2 b2'", "a1 b1 a1' b2"] {
        let w = Word::parse(text, g).unwrap();
        for n in [3, 4] {
            let space = HomSpace::new(n, g).unwrap();
            let e = exact_expectation(&space, &base(&w)).unwrap();
            assert_eq!(exact_expectation(&space, &base(&w.inverse())).unwrap(), e);
            assert_eq!(exact_expectation(&space, &base(&w.conjugate_by(&c).unwrap())).unwrap(), e);
        }
    }
}

#[test]
fn bucket_sizes_match_brute_force() {
    let buckets = build_buckets(4, &Budget::default()).unwrap();
    let group = buckets.group();
    let mut sizes = vec![0u128; group.order()];
    for a in group.elements() {
        for b in group.elements() {
            sizes[group.rank(&commutator(a, b).unwrap())] += 1;
        }
    }
    for (s, &size) in sizes.iter().enumerate() {
        assert_eq!(buckets.len_of(s), size);
        let class = group.element(s).cycle_type();
        assert_eq!(BigUint::from(size), commutator_count(4, &class).unwrap());
    }
    assert_eq!(buckets.total(), 576);
}

#[test]
fn sampled_mean_matches_exact_finite_n_value() {
    let g = genus(2);
    let spec = ObservableSpec::from_words(g, &[("a1", &[1], 1)]).unwrap();
    let plan = build_sampler(12, g).unwrap();
    let (mean, stderr) = monte_carlo_expectation(&plan, &spec, 100_000, 99).unwrap();
    let exact = scl_core::characters::rational_to_f64(&exact_generator_fixed_points(12, g).unwrap());
    assert!((mean - exact).abs() < 3.0 * stderr, "{mean} ± {stderr} vs {exact}");
    assert!((mean - 1.0).abs() < 3.0 * stderr + 0.02);
}

#[test]
fn stderr_scales_with_inverse_root_of_samples() {
    let g = genus(2);
    let plan = build_sampler(8, g).unwrap();
    let a1 = Word::parse("a1", g).unwrap();
    let observe = |h: &HomPoint| Ok(vec![h.evaluate(&a1)?.fix_count() as u128]);
    let small = sample_observables(&plan, 20_000, 4, 1, observe).unwrap();
    let large = sample_observables(&plan, 80_000, 4, 1, observe).unwrap();
    let ratio = small.stderr(0) / large.stderr(0);
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn fixed_seed_reproduces_estimates() {
    let g = genus(3);
    let spec = ObservableSpec::from_words(g, &[("a1 b3", &[1, 2], 1)]).unwrap();
    let plan = build_sampler(6, g).unwrap();
    let a = monte_carlo_expectation(&plan, &spec, 3000, 5).unwrap();
    assert_eq!(a, monte_carlo_expectation(&plan, &spec, 3000, 5).unwrap());
    assert_ne!(a, monte_carlo_expectation(&plan, &spec, 3000, 6).unwrap());
}
