mod common;

use common::{rational_in, small_system, BUDGET};
use kneadlab::words::{apply_word, lap_counts, word_domain, Applied};
use kneadlab::{ClosedInterval, Letter, SignedPoint, Span, SystemSpec, Word};
use proptest::prelude::*;

fn letters(n: usize, len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..n, len)
}

fn any_word(n: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..n, any::<bool>()), 0..=6)
        .prop_map(|ls| Word::from_letters(ls.into_iter().map(|(b, inv)| if inv { Letter::backward(b) } else { Letter::forward(b) })))
}

fn spec_and_word() -> impl Strategy<Value = (SystemSpec, Vec<usize>, Vec<usize>)> {
    small_system().prop_flat_map(|s| {
        let n = s.n_branches();
        (Just(s), letters(n, 1..=3), letters(n, 1..=3))
    })
}

/// f_g^{-1}(J) inside Dom(f_g), by pulling back the endpoints of J ∩ f_g(Dom f_g).
fn pullback(spec: &SystemSpec, g: &Word, dom: &Span, j: &Span) -> Span {
    let (Span::Segment(d), Span::Segment(j)) = (dom, j) else { return Span::Empty };
    let image_pt = |x: &kneadlab::Rational| match apply_word(spec, g, &SignedPoint::exact(x.clone())) {
        Applied::Point(p) => p.value,
        Applied::NotAdmissible { .. } => unreachable!("endpoint of the domain"),
    };
    let image = ClosedInterval::hull(image_pt(d.lo()), image_pt(d.hi()));
    let Some(target) = image.intersect(j) else { return Span::Empty };
    let back = |y: &kneadlab::Rational| match apply_word(spec, &g.inverse(), &SignedPoint::exact(y.clone())) {
        Applied::Point(p) => p.value,
        Applied::NotAdmissible { .. } => unreachable!("point of the image"),
    };
    Span::Segment(ClosedInterval::hull(back(target.lo()), back(target.hi())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn reduced_word_algebra(w in any_word(3), v in any_word(3)) {
        prop_assert!(w.concat(&w.inverse()).is_empty());
        prop_assert_eq!(w.inverse().inverse(), w.clone());
        prop_assert_eq!(w.concat(&v).inverse(), v.inverse().concat(&w.inverse()));
        let text = w.to_string();
        if !w.is_empty() {
            prop_assert_eq!(text.parse::<Word>().unwrap(), w);
        }
    }

    #[test]
    fn pullback_consistency((spec, g, _) in spec_and_word(), x in rational_in(-1, 2, 16)) {
        let w = Word::forward(&g);
        let dom = word_domain(&spec, &w).unwrap().domain;
        let applied = matches!(apply_word(&spec, &w, &SignedPoint::exact(x.clone())), Applied::Point(_));
        prop_assert_eq!(applied, dom.contains(&x));
    }

    #[test]
    fn domain_of_concatenation((spec, g, h) in spec_and_word()) {
        let (g, h) = (Word::forward(&g), Word::forward(&h));
        let gh = g.concat(&h);
        let dg = word_domain(&spec, &g).unwrap().domain;
        let dh = word_domain(&spec, &h).unwrap().domain;
        let expected = pullback(&spec, &g, &dg, &dh);
        let actual = word_domain(&spec, &gh).unwrap().domain;
        prop_assert_eq!(actual, expected);
    }

    #[test]
    fn lap_counts_submultiplicative(spec in small_system()) {
        let l = lap_counts(&spec, &Span::Line, 8, BUDGET).unwrap();
        // l[k - 1] = ℓ(k)
        for a in 1..=8 {
            for b in 1..=8 - a {
                prop_assert!(l[a + b - 1] <= l[a - 1] * l[b - 1], "{:?}", l);
            }
        }
    }
}
