mod common;

use common::{bundled, BUDGET};
use kneadlab::entropy::{entropy_report, RootStatus};
use kneadlab::measure::{hull_grid, linearize, MeasureContext};
use kneadlab::numeric::{rat, to_f64};
use kneadlab::overlap::{overlap_determinant_check, overlap_entropy_model, overlap_itineraries};
use kneadlab::{ClosedInterval, Span};
use num_traits::Signed;
use proptest::prelude::*;

#[test]
fn phi_is_monotone_and_hull_has_unit_mass() {
    for name in ["tent", "skewed_tent", "tent_1_5", "doubling"] {
        let spec = bundled(name);
        let ctx = MeasureContext::new(&spec, 12, BUDGET).unwrap();
        let prof = ctx.phi_profile(&hull_grid(&spec, 101));
        assert!(prof.windows(2).all(|w| w[0].1 <= w[1].1), "{name}");
        assert_eq!(ctx.estimate(&Span::Segment(spec.hull())).ratio, rat(1, 1), "{name}");
    }
}

#[test]
fn model_slopes_are_plus_minus_s() {
    for name in ["tent", "skewed_tent", "doubling"] {
        let lin = linearize(&bundled(name), 12, 14, &rat(1, 1_000_000_000), 50, BUDGET).unwrap();
        assert!(lin.model.branches.iter().all(|b| b.slope.abs() == lin.model.s), "{name}");
    }
}

#[test]
fn overlap_root_matches_determinant_root() {
    let tol = rat(1, 1_000_000_000);
    for name in ["doubling", "overlap_3_2", "overlap_9_5"] {
        let spec = bundled(name);
        let it = overlap_itineraries(&spec, 32).unwrap();
        let model = overlap_entropy_model(&spec, &it, 32, &tol).unwrap();
        let rep = entropy_report(&spec, 14, 20, &tol, BUDGET).unwrap();
        let RootStatus::Found { root } = rep.root else { panic!("{name}") };
        assert!((to_f64(&model.r) - to_f64(&root)).abs() < 1e-2, "{name}");
        let (rel, n21) = overlap_determinant_check(&spec, &it, 12, BUDGET).unwrap();
        assert!(rel.is_zero() && n21.is_zero(), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn self_similarity_within_bracket(k in 0usize..3, a in 0i64..20, w in 1i64..=10) {
        let name = ["tent", "skewed_tent", "doubling"][k];
        let spec = bundled(name);
        let ctx = MeasureContext::new(&spec, 12, BUDGET).unwrap();
        let j = ClosedInterval::new(rat(a, 30), rat(a + w, 30)).unwrap();
        let ss = ctx.self_similarity(&spec, &j);
        prop_assert!(ss.holds(), "{} {:?}", name, ss);
    }
}
