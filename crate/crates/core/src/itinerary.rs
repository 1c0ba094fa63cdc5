//! Itineraries, kneading data, order recovery, separability and the
//! finite combinatorial map between two systems.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, Rational};
use crate::system::{Address, SignedPoint, SystemSpec};
use crate::words::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItineraryTree {
    pub base: SignedPoint,
    pub depth: usize,
    /// Every admissible forward word of length <= depth, shortlex ordered.
    pub entries: BTreeMap<Word, Address>,
}

impl ItineraryTree {
    pub fn get(&self, w: &Word) -> Option<Address> {
        self.entries.get(w).copied()
    }
}

/// Addresses of `f_g(p)` for every forward word `g` admissible for `p`.
pub fn itinerary(spec: &SystemSpec, p: &SignedPoint, m: usize, budget: u64) -> Result<ItineraryTree> {
    let mut entries = BTreeMap::new();
    entries.insert(Word::empty(), spec.address(p));
    let mut frontier = vec![(Word::empty(), p.clone())];
    let mut used = 1u64;
    for depth in 1..=m {
        let mut next = Vec::new();
        for (w, q) in &frontier {
            for (i, b) in spec.branches().iter().enumerate() {
                if !b.accepts(q) {
                    continue;
                }
                let r = SignedPoint::new(b.apply(&q.value), q.side.flip(b.orientation()));
                let w2 = w.pushed(Letter::forward(i));
                entries.insert(w2.clone(), spec.address(&r));
                next.push((w2, r));
            }
        }
        used += next.len() as u64;
        if used > budget {
            return Err(Error::BudgetExceeded { budget, completed_levels: depth - 1 });
        }
        frontier = next;
    }
    Ok(ItineraryTree { base: p.clone(), depth: m, entries })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KneadingData {
    pub depth: usize,
    /// trees[i - 1] is the itinerary of c_i.
    pub trees: Vec<ItineraryTree>,
}

pub fn kneading_data(spec: &SystemSpec, m: usize, budget: u64) -> Result<KneadingData> {
    let trees = spec
        .turning_points()
        .iter()
        .map(|c| itinerary(spec, &SignedPoint::exact(c.clone()), m, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(KneadingData { depth: m, trees })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KneadingComparison {
    Equal { depth: usize },
    Differ { turning: usize, word: Word, a: Option<Address>, b: Option<Address> },
}

/// Checks that two systems have the same combinatorial layout: branch count,
/// orientations, and branch endpoints at the same turning-point indices.
pub fn check_same_layout(a: &SystemSpec, b: &SystemSpec) -> Result<()> {
    if a.n_branches() != b.n_branches() {
        return Err(Error::StructuralMismatch(format!(
            "{} branches vs {}",
            a.n_branches(),
            b.n_branches()
        )));
    }
    if a.n_turning() != b.n_turning() {
        return Err(Error::StructuralMismatch(format!(
            "{} turning points vs {}",
            a.n_turning(),
            b.n_turning()
        )));
    }
    for (i, (ba, bb)) in a.branches().iter().zip(b.branches()).enumerate() {
        if ba.orientation() != bb.orientation() {
            return Err(Error::StructuralMismatch(format!("branch a{} has different orientation", i + 1)));
        }
        let ends = |s: &SystemSpec, br: &crate::system::Branch| {
            (s.turning_index(br.domain().lo()), s.turning_index(br.domain().hi()))
        };
        if ends(a, ba) != ends(b, bb) {
            return Err(Error::StructuralMismatch(format!(
                "domain of a{} sits between different turning points",
                i + 1
            )));
        }
    }
    Ok(())
}

/// First disagreement between the kneading data of two systems, turning
/// point by turning point, words in shortlex order.
pub fn compare_kneading(a: &SystemSpec, b: &SystemSpec, m: usize, budget: u64) -> Result<KneadingComparison> {
    check_same_layout(a, b)?;
    for (i, (ca, cb)) in a.turning_points().iter().zip(b.turning_points()).enumerate() {
        if let Some((word, x, y)) = first_difference(a, b, ca, cb, m, budget)? {
            return Ok(KneadingComparison::Differ { turning: i + 1, word, a: x, b: y });
        }
    }
    Ok(KneadingComparison::Equal { depth: m })
}

/// Walks the forward words of c_a and c_b together in shortlex order and
/// returns the first word whose address or admissibility differs.
fn first_difference(
    a: &SystemSpec,
    b: &SystemSpec,
    ca: &Rational,
    cb: &Rational,
    m: usize,
    budget: u64,
) -> Result<Option<Difference>> {
    let (pa, pb) = (SignedPoint::exact(ca.clone()), SignedPoint::exact(cb.clone()));
    let (da, db) = (a.address(&pa), b.address(&pb));
    if da != db {
        return Ok(Some((Word::empty(), Some(da), Some(db))));
    }
    // a pair met earlier in shortlex order has the same subtree with at least
    // as much depth left, so any difference below it shows up there first
    let mut seen: HashSet<(SignedPoint, SignedPoint)> = HashSet::new();
    seen.insert((pa.clone(), pb.clone()));
    let mut frontier = vec![(Word::empty(), pa, pb)];
    let mut used = 1u64;
    for depth in 1..=m {
        let mut next = Vec::new();
        for (w, qa, qb) in &frontier {
            for (i, (ba, bb)) in a.branches().iter().zip(b.branches()).enumerate() {
                let step = |spec: &SystemSpec, br: &crate::system::Branch, q: &SignedPoint| {
                    br.accepts(q).then(|| {
                        let r = SignedPoint::new(br.apply(&q.value), q.side.flip(br.orientation()));
                        (spec.address(&r), r)
                    })
                };
                match (step(a, ba, qa), step(b, bb, qb)) {
                    (None, None) => {}
                    (Some((x, ra)), Some((y, rb))) if x == y => {
                        if seen.insert((ra.clone(), rb.clone())) {
                            next.push((w.pushed(Letter::forward(i)), ra, rb));
                        }
                    }
                    (x, y) => return Ok(Some((w.pushed(Letter::forward(i)), x.map(|v| v.0), y.map(|v| v.0)))),
                }
            }
        }
        used += next.len() as u64;
        if used > budget {
            return Err(Error::BudgetExceeded { budget, completed_levels: depth - 1 });
        }
        frontier = next;
    }
    Ok(None)
}

/// Recovers λ(x, y) (+1 when x < y) from two itinerary trees over the same
/// system signature. `None` when the trees agree to their common depth.
pub fn order_from_symbolic(ta: &ItineraryTree, tb: &ItineraryTree, orientations: &[i32]) -> Option<i32> {
    if ta.base.value == tb.base.value && ta.base.side == tb.base.side {
        return Some(0);
    }
    for (w, x) in &ta.entries {
        // admissibility asymmetry always follows a prefix with different
        // addresses, which shortlex order meets first
        let Some(y) = tb.get(w) else { continue };
        if *x != y {
            let s: i32 = w.letters().iter().map(|l| orientations[l.branch]).product();
            let base = if x.rank() < y.rank() { 1 } else { -1 };
            return Some(s * base);
        }
    }
    None
}

/// Critical G-orbit: distinct values `f_g(c_i)` for words of length <= m,
/// with the first (turning index, word) reaching each.
pub fn critical_orbit(spec: &SystemSpec, m: usize, inverse_only: bool, budget: u64) -> Result<Vec<(Rational, usize, Word)>> {
    let mut seen: HashSet<Rational> = HashSet::new();
    let mut out = Vec::new();
    let mut frontier = Vec::new();
    for (k, c) in spec.turning_points().iter().enumerate() {
        if seen.insert(c.clone()) {
            out.push((c.clone(), k + 1, Word::empty()));
            frontier.push((c.clone(), k + 1, Word::empty()));
        }
    }
    for depth in 1..=m {
        let mut next = Vec::new();
        for (v, k, w) in &frontier {
            for (i, b) in spec.branches().iter().enumerate() {
                let mut moves = Vec::with_capacity(2);
                if !inverse_only && b.domain().contains(v) {
                    moves.push((Letter::forward(i), b.apply(v)));
                }
                if b.image().contains(v) {
                    moves.push((Letter::backward(i), b.unapply(v)));
                }
                for (l, u) in moves {
                    if seen.insert(u.clone()) {
                        let w2 = w.pushed(l);
                        out.push((u.clone(), *k, w2.clone()));
                        next.push((u, *k, w2));
                    }
                }
            }
        }
        if out.len() as u64 > budget {
            return Err(Error::BudgetExceeded { budget, completed_levels: depth - 1 });
        }
        frontier = next;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationWitness {
    pub x: Rational,
    pub y: Rational,
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FutureSeparation {
    pub orbit_points: usize,
    pub pairs_checked: usize,
    /// Every consecutive pair of orbit points is separated by a forward word of length <= depth.
    pub certified: bool,
    pub counterexample: Option<(Rational, Rational)>,
    /// Separating words rebuilt from the preimage points and checked directly.
    pub witnesses_verified: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PastSeparation {
    pub points: usize,
    pub points_checked: usize,
    pub sampled: bool,
    pub pairs_checked: u64,
    pub failures: u64,
    pub first_failure: Option<(Rational, Rational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparabilityReport {
    pub depth: usize,
    pub future: FutureSeparation,
    pub past: PastSeparation,
    pub warnings: Vec<String>,
}

impl SeparabilityReport {
    pub fn passes(&self) -> bool {
        self.future.certified && self.past.failures == 0
    }
}

/// Whether `w` separates `x` and `y` in the sense of the separation property.
pub fn separates(spec: &SystemSpec, w: &Word, x: &Rational, y: &Rational) -> bool {
    use crate::words::{apply_word, Applied};
    let px = apply_word(spec, w, &SignedPoint::exact(x.clone()));
    let py = apply_word(spec, w, &SignedPoint::exact(y.clone()));
    match (px, py) {
        (Applied::Point(a), Applied::Point(b)) => spec.address(&a) != spec.address(&b),
        (Applied::Point(_), _) | (_, Applied::Point(_)) => true,
        _ => false,
    }
}

/// First word where two itineraries disagree, with both addresses.
type Difference = (Word, Option<Address>, Option<Address>);

const PAST_POINT_CAP: usize = 4000;
const SAMPLE_SEED: u64 = 0x6b_6e65_6164;

/// Finite-depth separability certificate.
///
/// Future: consecutive points of the depth-m critical G-orbit must have a
/// backward image of a turning point between them (which is equivalent to
/// separation by a forward word). Past: points `f_{a^-1}(C_{S^-1})` are
/// grouped by their inverse-word itineraries; two points from different
/// generators with the same itinerary are a failure.
pub fn check_separability(spec: &SystemSpec, m: usize, budget: u64) -> Result<SeparabilityReport> {
    if m == 0 {
        return Err(Error::Precondition("separability depth must be at least 1".into()));
    }
    let future = future_separation(spec, m, budget)?;
    let past = past_separation(spec, m, budget)?;
    let mut warnings: Vec<String> = spec.warnings().to_vec();
    if past.sampled {
        warnings.push(format!(
            "past separation sampled {} of {} points",
            past.points_checked, past.points
        ));
    }
    warnings.push(format!("finite-depth certificate only (depth {m})"));
    Ok(SeparabilityReport { depth: m, future, past, warnings })
}

fn future_separation(spec: &SystemSpec, m: usize, budget: u64) -> Result<FutureSeparation> {
    let orbit = critical_orbit(spec, m, false, budget)?;
    let mut q = critical_orbit(spec, m, true, budget)?;
    q.sort_by(|a, b| a.0.cmp(&b.0));
    let mut pts: Vec<&Rational> = orbit.iter().map(|o| &o.0).collect();
    pts.sort();
    let mut verified = 0;
    let mut counterexample = None;
    for w in pts.windows(2) {
        let (x, y) = (w[0], w[1]);
        let k = q.partition_point(|e| &e.0 < x);
        match q.get(k) {
            Some((v, _, word)) if v <= y => {
                // the backward word reversed is a forward word; one of its prefixes separates
                let fwd = word.inverse();
                let found = (0..=fwd.len()).any(|j| separates(spec, &fwd.prefix(j), x, y));
                if !found {
                    return Err(Error::Inconsistency(format!(
                        "no prefix of {fwd} separates {} and {}",
                        fmt_rational(x),
                        fmt_rational(y)
                    )));
                }
                verified += 1;
            }
            _ => {
                if counterexample.is_none() {
                    counterexample = Some((x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(FutureSeparation {
        orbit_points: pts.len(),
        pairs_checked: pts.len().saturating_sub(1),
        certified: counterexample.is_none(),
        counterexample,
        witnesses_verified: verified,
    })
}

/// Interns inverse-word itineraries: two points get the same id at depth m
/// exactly when no word of S^-1 up to length m separates them.
struct BackwardSignatures<'a> {
    spec: &'a SystemSpec,
    shapes: HashMap<(u32, Vec<(u32, u32)>), u32>,
    memo: HashMap<(Rational, usize), u32>,
}

impl<'a> BackwardSignatures<'a> {
    fn new(spec: &'a SystemSpec) -> Self {
        BackwardSignatures { spec, shapes: HashMap::new(), memo: HashMap::new() }
    }

    fn id(&mut self, x: &Rational, m: usize) -> u32 {
        if let Some(&id) = self.memo.get(&(x.clone(), m)) {
            return id;
        }
        let rank = self.spec.address(&SignedPoint::exact(x.clone())).rank() as u32;
        let mut children = Vec::new();
        if m > 0 {
            for (i, b) in self.spec.branches().iter().enumerate() {
                if b.image().contains(x) {
                    let y = b.unapply(x);
                    children.push((i as u32, self.id(&y, m - 1)));
                }
            }
        }
        let next = self.shapes.len() as u32;
        let id = *self.shapes.entry((rank, children)).or_insert(next);
        self.memo.insert((x.clone(), m), id);
        id
    }
}

fn past_separation(spec: &SystemSpec, m: usize, budget: u64) -> Result<PastSeparation> {
    let base = critical_orbit(spec, m - 1, true, budget)?;
    // generator masks per point of X = union of f_{a^-1}(C)
    let mut masks: HashMap<Rational, u64> = HashMap::new();
    for (v, _, _) in &base {
        for (i, b) in spec.branches().iter().enumerate() {
            if b.image().contains(v) {
                *masks.entry(b.unapply(v)).or_default() |= 1 << (i % 64);
            }
        }
    }
    let mut points: Vec<(Rational, u64)> = masks.into_iter().collect();
    points.sort_by(|a, b| a.0.cmp(&b.0));
    let total = points.len();
    let sampled = total > PAST_POINT_CAP;
    if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        points.shuffle(&mut rng);
        points.truncate(PAST_POINT_CAP);
        points.sort_by(|a, b| a.0.cmp(&b.0));
    }
    let mut sigs = BackwardSignatures::new(spec);
    let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
    for (k, (x, _)) in points.iter().enumerate() {
        groups.entry(sigs.id(x, m)).or_default().push(k);
    }
    let n = points.len() as u64;
    let mut failures = 0u64;
    let mut first: Option<(Rational, Rational)> = None;
    for members in groups.values() {
        for (i, ki) in members.iter().enumerate() {
            for kj in &members[i + 1..] {
                let (mi, mj) = (points[*ki].1, points[*kj].1);
                // need generators a != b with x in X_a and y in X_b
                let ok = !(mi == mj && mi.count_ones() == 1);
                if ok {
                    failures += 1;
                    let pair = ordered(&points[*ki].0, &points[*kj].0);
                    if first.as_ref().is_none_or(|f| pair < *f) {
                        first = Some(pair);
                    }
                }
            }
        }
    }
    Ok(PastSeparation {
        points: total,
        points_checked: points.len(),
        sampled,
        pairs_checked: n * n.saturating_sub(1) / 2,
        failures,
        first_failure: first,
    })
}

fn ordered(a: &Rational, b: &Rational) -> (Rational, Rational) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPair {
    pub turning: usize,
    pub word: Word,
    pub a: Rational,
    pub b: Rational,
}

impl OrbitPair {
    fn key(&self) -> (usize, usize, &Word) {
        (self.word.len(), self.turning, &self.word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapWitness {
    /// The word applies to c_turning in one system only.
    Admissibility { turning: usize, word: Word, admissible_in_a: bool },
    /// `first.a <= second.a` but the B values are not in the same relation.
    Order { first: OrbitPair, second: OrbitPair },
}

impl std::fmt::Display for MapWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MapWitness::Admissibility { turning, word, admissible_in_a } => write!(
                f,
                "{word} is admissible for c{turning} in {} only",
                if *admissible_in_a { "A" } else { "B" }
            ),
            MapWitness::Order { first, second } => {
                let rel = |x: &Rational, y: &Rational| match x.cmp(y) {
                    std::cmp::Ordering::Less => "<",
                    std::cmp::Ordering::Equal => "=",
                    std::cmp::Ordering::Greater => ">",
                };
                write!(
                    f,
                    "f_{}(c{}) = {} {} f_{}(c{}) = {} in A, but {} {} {} in B",
                    first.word,
                    first.turning,
                    fmt_rational(&first.a),
                    rel(&first.a, &second.a),
                    second.word,
                    second.turning,
                    fmt_rational(&second.a),
                    fmt_rational(&first.b),
                    rel(&first.b, &second.b),
                    fmt_rational(&second.b)
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CombinatorialMap {
    /// Order-preserving, well defined and equivariant on the depth-m orbit.
    Consistent { depth: usize, pairs: Vec<OrbitPair> },
    Violation { depth: usize, witness: MapWitness },
}

fn violates(p: &OrbitPair, q: &OrbitPair) -> bool {
    p.a.cmp(&q.a) != p.b.cmp(&q.b)
}

/// Builds φ(f_g(c)) = f̃_g(c̃) on the depth-m critical G-orbit and checks it.
pub fn combinatorial_map(a: &SystemSpec, b: &SystemSpec, m: usize, budget: u64) -> Result<CombinatorialMap> {
    check_same_layout(a, b)?;
    let mut seen: HashSet<(Rational, Rational)> = HashSet::new();
    let mut all: Vec<OrbitPair> = Vec::new();
    let mut frontier: Vec<OrbitPair> = Vec::new();
    for (k, (ca, cb)) in a.turning_points().iter().zip(b.turning_points()).enumerate() {
        let p = OrbitPair { turning: k + 1, word: Word::empty(), a: ca.clone(), b: cb.clone() };
        seen.insert((ca.clone(), cb.clone()));
        all.push(p.clone());
        frontier.push(p);
    }
    if let Some(w) = first_order_violation(&all, &all) {
        return Ok(CombinatorialMap::Violation { depth: 0, witness: w });
    }
    for depth in 1..=m {
        let mut next = Vec::new();
        let mut mismatches = Vec::new();
        for p in &frontier {
            for i in 0..a.n_branches() {
                let (ba, bb) = (a.branch(i), b.branch(i));
                for inverse in [false, true] {
                    let (oka, okb) = if inverse {
                        (ba.image().contains(&p.a), bb.image().contains(&p.b))
                    } else {
                        (ba.domain().contains(&p.a), bb.domain().contains(&p.b))
                    };
                    let l = Letter { branch: i, inverse };
                    if oka != okb {
                        mismatches.push(MapWitness::Admissibility {
                            turning: p.turning,
                            word: p.word.pushed(l),
                            admissible_in_a: oka,
                        });
                        continue;
                    }
                    if !oka {
                        continue;
                    }
                    let (va, vb) = if inverse {
                        (ba.unapply(&p.a), bb.unapply(&p.b))
                    } else {
                        (ba.apply(&p.a), bb.apply(&p.b))
                    };
                    if seen.insert((va.clone(), vb.clone())) {
                        next.push(OrbitPair { turning: p.turning, word: p.word.pushed(l), a: va, b: vb });
                    }
                }
            }
        }
        if let Some(w) = mismatches.into_iter().min_by(|x, y| witness_key(x).cmp(&witness_key(y))) {
            return Ok(CombinatorialMap::Violation { depth, witness: w });
        }
        all.extend(next.iter().cloned());
        if all.len() as u64 > budget {
            return Err(Error::BudgetExceeded { budget, completed_levels: depth - 1 });
        }
        if has_violation(&all) {
            let w = first_order_violation(&next, &all).expect("violation involves a new point");
            return Ok(CombinatorialMap::Violation { depth, witness: w });
        }
        frontier = next;
    }
    all.sort_by(|x, y| x.a.cmp(&y.a));
    Ok(CombinatorialMap::Consistent { depth: m, pairs: all })
}

fn witness_key(w: &MapWitness) -> (usize, Word) {
    match w {
        MapWitness::Admissibility { turning, word, .. } => (*turning, word.clone()),
        MapWitness::Order { first, .. } => (first.turning, first.word.clone()),
    }
}

fn has_violation(all: &[OrbitPair]) -> bool {
    let mut idx: Vec<usize> = (0..all.len()).collect();
    idx.sort_by(|&x, &y| all[x].a.cmp(&all[y].a).then_with(|| all[x].b.cmp(&all[y].b)));
    idx.windows(2).any(|w| violates(&all[w[0]], &all[w[1]]))
}

/// Canonical violating pair with one member from `new`: smallest depth, then
/// turning index and word, for the pair written in increasing A order.
fn first_order_violation(new: &[OrbitPair], all: &[OrbitPair]) -> Option<MapWitness> {
    let mut best: Option<(OrbitPair, OrbitPair)> = None;
    for p in new {
        for q in all {
            if std::ptr::eq(p, q) || (p.turning == q.turning && p.word == q.word) || !violates(p, q) {
                continue;
            }
            let (x, y) = if (&p.a, p.key()) <= (&q.a, q.key()) { (p, q) } else { (q, p) };
            let key = |s: &OrbitPair, t: &OrbitPair| {
                (s.word.len().max(t.word.len()), s.key().1, s.key().2.clone(), t.key().1, t.key().2.clone())
            };
            let better = match &best {
                None => true,
                Some((bx, by)) => key(x, y) < key(bx, by),
            };
            if better {
                best = Some((x.clone(), y.clone()));
            }
        }
    }
    best.map(|(first, second)| MapWitness::Order { first, second })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use crate::system::{affine_system, Side};
    use crate::words::DEFAULT_BUDGET;

    fn two_three() -> SystemSpec {
        affine_system(&[(int(-1), int(1), int(2), int(0)), (int(-1), int(1), int(3), int(0))]).unwrap()
    }

    fn tent(slope: Rational) -> SystemSpec {
        affine_system(&[
            (int(0), rat(1, 2), slope.clone(), int(0)),
            (rat(1, 2), int(1), -slope.clone(), slope),
        ])
        .unwrap()
    }

    #[test]
    fn blind_past_itinerary_of_left_end() {
        let t = itinerary(&two_three(), &SignedPoint::exact(int(-1)), 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.entries.len(), 3);
        assert_eq!(t.get(&Word::empty()), Some(Address::Turning(1)));
        assert_eq!(t.get(&"a1".parse().unwrap()), Some(Address::Cell(0)));
        assert_eq!(t.get(&"a2".parse().unwrap()), Some(Address::Cell(0)));
    }

    #[test]
    fn identity_fixed_point() {
        let s = affine_system(&[(int(0), int(1), int(1), int(0))]).unwrap();
        let t = itinerary(&s, &SignedPoint::exact(rat(1, 2)), 5, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.entries.len(), 6);
        assert!(t.entries.values().all(|a| *a == Address::Cell(1)));
    }

    #[test]
    fn tent_peak_orbit() {
        let t = itinerary(&tent(int(2)), &SignedPoint::exact(rat(1, 2)), 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.get(&Word::empty()), Some(Address::Turning(2)));
        assert_eq!(t.get(&"a1".parse().unwrap()), Some(Address::Turning(3)));
        assert_eq!(t.get(&"a2".parse().unwrap()), Some(Address::Turning(3)));
        assert_eq!(t.get(&"a1.a2".parse().unwrap()), Some(Address::Turning(1)));
        assert_eq!(t.get(&"a1.a2.a1".parse().unwrap()), Some(Address::Turning(1)));
        assert_eq!(t.get(&"a1.a1".parse().unwrap()), None);
    }

    #[test]
    fn comparisons() {
        let skew = affine_system(&[(int(0), rat(1, 3), int(3), int(0)), (rat(1, 3), int(1), rat(-3, 2), rat(3, 2))]).unwrap();
        assert_eq!(
            compare_kneading(&tent(int(2)), &skew, 10, DEFAULT_BUDGET).unwrap(),
            KneadingComparison::Equal { depth: 10 }
        );
        match compare_kneading(&tent(int(2)), &tent(rat(19, 10)), 10, DEFAULT_BUDGET).unwrap() {
            KneadingComparison::Differ { turning, word, .. } => {
                assert_eq!(turning, 2);
                assert_eq!(word.len(), 1);
            }
            other => panic!("expected a difference, got {other:?}"),
        }
        let one = affine_system(&[(int(0), int(1), int(1), int(0))]).unwrap();
        assert!(matches!(compare_kneading(&one, &two_three(), 3, DEFAULT_BUDGET), Err(Error::StructuralMismatch(_))));
    }

    #[test]
    fn order_recovery() {
        let s = tent(int(2));
        let tx = itinerary(&s, &SignedPoint::exact(int(0)), 4, DEFAULT_BUDGET).unwrap();
        let ty = itinerary(&s, &SignedPoint::exact(int(1)), 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(order_from_symbolic(&tx, &ty, &s.orientations()), Some(1));
        assert_eq!(order_from_symbolic(&ty, &tx, &s.orientations()), Some(-1));
        // images of -1 under a1 and a2 are both in P0
        let e = two_three();
        let p = itinerary(&e, &SignedPoint::exact(int(-2)), 3, DEFAULT_BUDGET).unwrap();
        let q = itinerary(&e, &SignedPoint::exact(int(-3)), 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(order_from_symbolic(&p, &q, &e.orientations()), None);
        let u = itinerary(&s, &SignedPoint::new(rat(1, 3), Side::Exact), 6, DEFAULT_BUDGET).unwrap();
        let v = itinerary(&s, &SignedPoint::new(rat(2, 5), Side::Exact), 6, DEFAULT_BUDGET).unwrap();
        assert_eq!(order_from_symbolic(&u, &v, &s.orientations()), Some(1));
    }

    #[test]
    fn blind_past_map_witness() {
        let b = affine_system(&[(int(-1), int(1), int(2), int(0)), (int(-1), int(1), int(3), rat(3, 4))]).unwrap();
        assert_eq!(compare_kneading(&two_three(), &b, 8, DEFAULT_BUDGET).unwrap(), KneadingComparison::Equal { depth: 8 });
        match combinatorial_map(&two_three(), &b, 6, DEFAULT_BUDGET).unwrap() {
            CombinatorialMap::Violation { depth: 1, witness: MapWitness::Order { first, second } } => {
                assert_eq!((first.turning, first.word.to_string(), first.a.clone(), first.b.clone()), (1, "A1".into(), rat(-1, 2), rat(-1, 2)));
                assert_eq!((second.turning, second.word.to_string(), second.a.clone(), second.b.clone()), (1, "A2".into(), rat(-1, 3), rat(-7, 12)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blind_future_map_witness() {
        let a = affine_system(&[(int(-1), int(0), rat(1, 2), rat(1, 2)), (int(0), int(1), rat(3, 4), rat(1, 4))]).unwrap();
        let b = affine_system(&[(int(-1), int(0), rat(1, 2), rat(1, 2)), (int(0), int(1), rat(1, 4), rat(3, 4))]).unwrap();
        match combinatorial_map(&a, &b, 6, DEFAULT_BUDGET).unwrap() {
            CombinatorialMap::Violation { depth: 1, witness: MapWitness::Order { first, second } } => {
                assert_eq!((first.turning, first.word.to_string()), (2, "a2".into()));
                assert_eq!((second.turning, second.word.to_string()), (2, "a1".into()));
                assert_eq!((first.b.clone(), second.b.clone()), (rat(3, 4), rat(1, 2)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn conjugate_map_is_consistent() {
        let s = tent(int(2));
        let t = s.conjugate(&int(3), &rat(-1, 2)).unwrap();
        match combinatorial_map(&s, &t, 5, DEFAULT_BUDGET).unwrap() {
            CombinatorialMap::Consistent { pairs, .. } => {
                for p in pairs {
                    assert_eq!(p.b, &p.a * int(3) - rat(1, 2));
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn separability_examples() {
        let r = check_separability(&two_three(), 6, DEFAULT_BUDGET).unwrap();
        assert!(r.past.failures > 0);
        assert!(!r.passes());
        let family = affine_system(&[
            (int(0), rat(1, 3), int(3), int(0)),
            (rat(2, 3), int(1), int(3), int(-2)),
            (int(0), int(1), rat(1, 3), int(0)),
            (int(0), int(1), rat(1, 3), rat(2, 3)),
        ])
        .unwrap();
        let r = check_separability(&family, 5, DEFAULT_BUDGET).unwrap();
        assert!(r.future.certified, "{r:?}");
        assert_eq!(r.past.failures, 0);
        let r = check_separability(&tent(int(2)), 6, DEFAULT_BUDGET).unwrap();
        assert!(r.future.certified);
        assert!(r.future.witnesses_verified > 0);
    }
}
