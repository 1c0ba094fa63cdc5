#![allow(dead_code)]

use std::path::PathBuf;

use kneadlab::numeric::{int, rat};
use kneadlab::system::affine_system;
use kneadlab::{load_system, Rational, SystemSpec};
use proptest::prelude::*;

pub const BUDGET: u64 = 20_000_000;

pub fn systems_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

pub fn bundled(name: &str) -> SystemSpec {
    let path = systems_dir().join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    load_system(&text).unwrap()
}

/// Systems used by the identity and property suites.
pub fn corpus() -> Vec<(&'static str, SystemSpec)> {
    ["blind_past_a", "blind_future_a", "blind_future_b", "parabola_a", "family", "tent", "skewed_tent", "tent_1_5", "doubling", "overlap_3_2"]
        .into_iter()
        .map(|n| (n, bundled(n)))
        .collect()
}

/// Rationals p/q with small denominators in [lo, hi].
pub fn rational_in(lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Rational> {
    (lo * den..=hi * den).prop_map(move |n| rat(n, den))
}

fn slope() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(rat(1, 2)), Just(rat(1, 3)), Just(int(2)), Just(int(3)), Just(rat(3, 2)), Just(rat(5, 2))]
        .prop_flat_map(|s| prop_oneof![Just(s.clone()), Just(-s)])
}

/// Small affine systems with two or three branches on [0, 1].
pub fn small_system() -> impl Strategy<Value = SystemSpec> {
    let branch = (0i64..4, 1i64..5, slope(), -4i64..=4).prop_filter_map("empty domain", |(a, w, s, c)| {
        let lo = rat(a, 4);
        let hi = rat((a + w).min(4), 4);
        (lo < hi).then(|| (lo, hi, s, rat(c, 4)))
    });
    prop::collection::vec(branch, 2..=3).prop_filter_map("invalid", |bs| affine_system(&bs).ok())
}
