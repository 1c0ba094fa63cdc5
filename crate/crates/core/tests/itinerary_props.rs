mod common;

use common::{bundled, corpus, rational_in, small_system, BUDGET};
use kneadlab::itinerary::{
    check_separability, combinatorial_map, compare_kneading, itinerary, kneading_data, order_from_symbolic, CombinatorialMap,
    KneadingComparison, MapWitness,
};
use kneadlab::numeric::{int, rat, sign};
use kneadlab::SignedPoint;
use proptest::prelude::*;

#[test]
fn blind_past_pair_disagrees_on_inverse_images() {
    let (a, b) = (bundled("blind_past_a"), bundled("blind_past_b"));
    assert_eq!(compare_kneading(&a, &b, 10, BUDGET).unwrap(), KneadingComparison::Equal { depth: 10 });
    let CombinatorialMap::Violation { witness: MapWitness::Order { first, second }, .. } = combinatorial_map(&a, &b, 6, BUDGET).unwrap()
    else {
        panic!("expected an order violation");
    };
    // f1^-1(-1) = -1/2 < f2^-1(-1) = -1/3, reversed in the second system
    assert_eq!((first.a, second.a), (rat(-1, 2), rat(-1, 3)));
    assert!(first.b > second.b);
    assert!(check_separability(&a, 6, BUDGET).unwrap().past.failures > 0);
}

#[test]
fn parabola_pair_is_consistent_on_critical_orbit() {
    let (a, b) = (bundled("parabola_a"), bundled("parabola_b"));
    assert_eq!(compare_kneading(&a, &b, 10, BUDGET).unwrap(), KneadingComparison::Equal { depth: 10 });
    assert!(matches!(combinatorial_map(&a, &b, 6, BUDGET).unwrap(), CombinatorialMap::Consistent { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trees_constant_between_equal_points(spec in small_system(), x in rational_in(0, 1, 64), k in 1i64..16) {
        let m = 4;
        let y = &x + rat(1, 4096);
        let tx = itinerary(&spec, &SignedPoint::exact(x.clone()), m, BUDGET).unwrap();
        let ty = itinerary(&spec, &SignedPoint::exact(y.clone()), m, BUDGET).unwrap();
        prop_assume!(tx.entries == ty.entries);
        let z = &x + (&y - &x) * rat(k, 16);
        let tz = itinerary(&spec, &SignedPoint::exact(z), m, BUDGET).unwrap();
        prop_assert_eq!(tz.entries, tx.entries);
    }

    #[test]
    fn conjugation_preserves_kneading_data(k in 0usize..10, a in 1i64..6, d in 1i64..4, b in -4i64..=4) {
        let (name, spec) = &corpus()[k];
        let conj = spec.conjugate(&rat(a, d), &rat(b, 3)).unwrap();
        let (ka, kb) = (kneading_data(spec, 5, BUDGET).unwrap(), kneading_data(&conj, 5, BUDGET).unwrap());
        for (ta, tb) in ka.trees.iter().zip(&kb.trees) {
            prop_assert_eq!(&ta.entries, &tb.entries, "{}", name);
        }
    }

    #[test]
    fn symbolic_order_agrees_with_values(spec in small_system(), x in rational_in(0, 1, 32), y in rational_in(0, 1, 32)) {
        let tx = itinerary(&spec, &SignedPoint::exact(x.clone()), 5, BUDGET).unwrap();
        let ty = itinerary(&spec, &SignedPoint::exact(y.clone()), 5, BUDGET).unwrap();
        if let Some(o) = order_from_symbolic(&tx, &ty, &spec.orientations()) {
            prop_assert_eq!(o, sign(&(&y - &x)));
        }
    }
}

#[test]
fn conjugate_family_matches_bundled_config() {
    let fam = bundled("family");
    let conj = fam.conjugate(&int(3), &rat(-1, 2)).unwrap();
    let file = bundled("family_conjugate");
    for (a, b) in conj.branches().iter().zip(file.branches()) {
        assert_eq!(a.domain(), b.domain());
        assert_eq!(a.eval(a.domain().lo()).unwrap(), b.eval(b.domain().lo()).unwrap());
        assert_eq!(a.eval(a.domain().hi()).unwrap(), b.eval(b.domain().hi()).unwrap());
    }
}

/// First differing word by brute force over the full trees.
fn tree_difference(a: &kneadlab::SystemSpec, b: &kneadlab::SystemSpec, m: usize) -> KneadingComparison {
    let (ka, kb) = (kneading_data(a, m, BUDGET).unwrap(), kneading_data(b, m, BUDGET).unwrap());
    for (i, (ta, tb)) in ka.trees.iter().zip(&kb.trees).enumerate() {
        let words: std::collections::BTreeSet<_> = ta.entries.keys().chain(tb.entries.keys()).collect();
        for w in words {
            if ta.get(w) != tb.get(w) {
                return KneadingComparison::Differ { turning: i + 1, word: w.clone(), a: ta.get(w), b: tb.get(w) };
            }
        }
    }
    KneadingComparison::Equal { depth: m }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compare_matches_tree_oracle(p in 21i64..=40, q in 21i64..=40, m in 1usize..=9) {
        let tent = |s: kneadlab::Rational| {
            kneadlab::system::affine_system(&[(int(0), rat(1, 2), s.clone(), int(0)), (rat(1, 2), int(1), -s.clone(), s)]).unwrap()
        };
        let (a, b) = (tent(rat(p, 20)), tent(rat(q, 20)));
        prop_assert_eq!(compare_kneading(&a, &b, m, BUDGET).unwrap(), tree_difference(&a, &b, m));
    }
}
