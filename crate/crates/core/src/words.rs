//! Words over the generators, their domains, application to signed points
//! and enumeration of admissible words.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{ClosedInterval, Rational, Span};
use crate::system::{SignedPoint, SystemSpec};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    /// 0-based branch index; printed 1-based.
    pub branch: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn forward(branch: usize) -> Self {
        Letter { branch, inverse: false }
    }

    pub fn backward(branch: usize) -> Self {
        Letter { branch, inverse: true }
    }

    pub fn inv(self) -> Self {
        Letter { branch: self.branch, inverse: !self.inverse }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.inverse { 'A' } else { 'a' }, self.branch + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordKind {
    Empty,
    Forward,
    Inverse,
    Mixed,
}

/// A reduced word; `f_g` applies the letters left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut w = Word::empty();
        for l in letters {
            w.push(l);
        }
        w
    }

    pub fn forward(branches: &[usize]) -> Self {
        Word::from_letters(branches.iter().map(|&b| Letter::forward(b)))
    }

    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inv()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn pushed(&self, l: Letter) -> Word {
        let mut w = self.clone();
        w.push(l);
        w
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &l in &other.0 {
            w.push(l);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn kind(&self) -> WordKind {
        let fwd = self.0.iter().any(|l| !l.inverse);
        let inv = self.0.iter().any(|l| l.inverse);
        match (fwd, inv) {
            (false, false) => WordKind::Empty,
            (true, false) => WordKind::Forward,
            (false, true) => WordKind::Inverse,
            (true, true) => WordKind::Mixed,
        }
    }
}

impl Ord for Word {
    /// Shortlex: shorter words first, then letter by letter.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::empty());
        }
        let mut w = Word::empty();
        for tok in s.split('.') {
            let bad = || Error::Parse(format!("bad letter {tok:?} in word {s:?}"));
            let mut chars = tok.chars();
            let inverse = match chars.next() {
                Some('a') => false,
                Some('A') => true,
                _ => return Err(bad()),
            };
            let k: usize = chars.as_str().parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            w.push(Letter { branch: k - 1, inverse });
        }
        Ok(w)
    }
}

/// Product of branch orientations along the word.
pub fn sigma(spec: &SystemSpec, w: &Word) -> i32 {
    w.letters().iter().map(|l| spec.branch(l.branch).orientation()).product()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordDomain {
    pub word: Word,
    pub domain: Span,
    pub has_interior: bool,
}

/// Dom(f_w) for a forward or inverse word, by pulling back from the right.
pub fn word_domain(spec: &SystemSpec, w: &Word) -> Result<WordDomain> {
    let domain = match w.kind() {
        WordKind::Empty => Span::Line,
        WordKind::Mixed => {
            return Err(Error::Precondition(format!("word {w} mixes forward and inverse letters")));
        }
        WordKind::Forward | WordKind::Inverse => {
            let mut d: Option<ClosedInterval> = None;
            for l in w.letters().iter().rev() {
                let b = spec.branch(l.branch);
                let next = if l.inverse {
                    // preimage under f^-1 of d is f(d ∩ I)
                    match &d {
                        None => Some(b.image().clone()),
                        Some(iv) => iv.intersect(b.domain()).map(|k| b.map_interval(&k)),
                    }
                } else {
                    match &d {
                        None => Some(b.domain().clone()),
                        Some(iv) => b.preimage(iv),
                    }
                };
                match next {
                    Some(iv) => d = Some(iv),
                    None => {
                        d = None;
                        break;
                    }
                }
            }
            Span::from_option(d)
        }
    };
    let has_interior = domain.has_interior();
    Ok(WordDomain { word: w.clone(), domain, has_interior })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Applied {
    Point(SignedPoint),
    /// `prefix` letters applied before the first failure.
    NotAdmissible { prefix: usize },
}

/// Applies `w` letter by letter, tracking the side.
pub fn apply_word(spec: &SystemSpec, w: &Word, p: &SignedPoint) -> Applied {
    let mut cur = p.clone();
    for (k, l) in w.letters().iter().enumerate() {
        let b = spec.branch(l.branch);
        if l.inverse {
            if !b.accepts_inverse(&cur) {
                return Applied::NotAdmissible { prefix: k };
            }
            cur = SignedPoint::new(b.unapply(&cur.value), cur.side.flip(b.orientation()));
        } else {
            if !b.accepts(&cur) {
                return Applied::NotAdmissible { prefix: k };
            }
            cur = SignedPoint::new(b.apply(&cur.value), cur.side.flip(b.orientation()));
        }
    }
    Applied::Point(cur)
}

/// `f_w^-1(y)` for a forward word, walking back through the letters.
pub(crate) fn pull_back_value(spec: &SystemSpec, letters: &[usize], y: &Rational) -> Rational {
    let mut v = y.clone();
    for &i in letters.iter().rev() {
        v = spec.branch(i).unapply(&v);
    }
    v
}

#[derive(Clone, Debug)]
pub struct AdmissibleTree {
    /// levels[k] holds the words of length k + 1 in shortlex order.
    pub levels: Vec<Vec<WordDomain>>,
}

impl AdmissibleTree {
    pub fn counts(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.len() as u64).collect()
    }
}

/// A forward word with interior domain, its image and orientation.
#[derive(Clone, Debug)]
pub struct AdmissibleNode {
    pub letters: Vec<usize>,
    pub domain: ClosedInterval,
    pub image: ClosedInterval,
    pub orientation: i32,
}

/// Breadth-first tree of forward words whose domains have interior.
pub fn enumerate_admissible(spec: &SystemSpec, m: usize, budget: u64) -> Result<AdmissibleTree> {
    let levels = admissible_nodes(spec, m, budget)?
        .into_iter()
        .map(|level| {
            level
                .into_iter()
                .map(|n| WordDomain {
                    word: Word::forward(&n.letters),
                    domain: Span::Segment(n.domain),
                    has_interior: true,
                })
                .collect()
        })
        .collect();
    Ok(AdmissibleTree { levels })
}

/// Same enumeration as [`enumerate_admissible`], keeping images.
pub fn admissible_nodes(spec: &SystemSpec, m: usize, budget: u64) -> Result<Vec<Vec<AdmissibleNode>>> {
    let mut levels = Vec::with_capacity(m);
    visit_admissible_levels(spec, m, budget, |_, level| {
        levels.push(level.to_vec());
        Ok(())
    })?;
    Ok(levels)
}

/// Streams the levels 1..=m of the admissible tree, holding one level at a time.
pub fn visit_admissible_levels<F>(spec: &SystemSpec, m: usize, budget: u64, mut visit: F) -> Result<()>
where
    F: FnMut(usize, &[AdmissibleNode]) -> Result<()>,
{
    let mut frontier: Vec<AdmissibleNode> = Vec::new();
    let mut used = 0u64;
    let children = |node: &AdmissibleNode| -> Vec<AdmissibleNode> {
        let mut out = Vec::new();
        for (i, b) in spec.branches().iter().enumerate() {
            let Some(k) = node.image.intersect(b.domain()) else { continue };
            if !k.has_interior() {
                continue;
            }
            // pull k back through f_node; reuse endpoints that already match
            let end = |y: &Rational, img_end: &Rational, dom_end: &Rational| {
                if y == img_end {
                    dom_end.clone()
                } else {
                    pull_back_value(spec, &node.letters, y)
                }
            };
            let (lo_src, hi_src) = if node.orientation > 0 {
                (node.domain.lo(), node.domain.hi())
            } else {
                (node.domain.hi(), node.domain.lo())
            };
            let a = end(k.lo(), node.image.lo(), lo_src);
            let z = end(k.hi(), node.image.hi(), hi_src);
            let mut letters = node.letters.clone();
            letters.push(i);
            out.push(AdmissibleNode {
                letters,
                domain: ClosedInterval::hull(a, z),
                image: b.map_interval(&k),
                orientation: node.orientation * b.orientation(),
            });
        }
        out
    };
    for depth in 1..=m {
        let next: Vec<AdmissibleNode> = if depth == 1 {
            spec.branches()
                .iter()
                .enumerate()
                .filter(|(_, b)| b.domain().has_interior())
                .map(|(i, b)| AdmissibleNode {
                    letters: vec![i],
                    domain: b.domain().clone(),
                    image: b.image().clone(),
                    orientation: b.orientation(),
                })
                .collect()
        } else if frontier.len() >= 512 {
            frontier.par_iter().flat_map_iter(children).collect()
        } else {
            frontier.iter().flat_map(children).collect()
        };
        used += next.len() as u64;
        if used > budget {
            return Err(Error::BudgetExceeded { budget, completed_levels: depth - 1 });
        }
        visit(depth, &next)?;
        frontier = next;
    }
    Ok(())
}

/// A forward word followed by a base point `x`.
#[derive(Clone, Debug)]
pub struct PointNode {
    pub letters: Vec<usize>,
    /// f_word(x)
    pub value: Rational,
    pub sigma: i32,
    /// Points just to the right of x stay in the domain of the word.
    pub plus: bool,
    /// Points just to the left of x stay in the domain of the word.
    pub minus: bool,
}

/// Visits, level by level from the empty word, every forward word of length
/// <= m that points on the chosen sides of `x` follow.
pub fn walk_point<F>(spec: &SystemSpec, x: &Rational, plus: bool, minus: bool, m: usize, budget: u64, mut visit: F) -> Result<()>
where
    F: FnMut(usize, &[PointNode]) -> Result<()>,
{
    use crate::system::Side;
    let mut level = vec![PointNode { letters: Vec::new(), value: x.clone(), sigma: 1, plus, minus }];
    let mut used = 1u64;
    visit(0, &level)?;
    let children = |n: &PointNode| -> Vec<PointNode> {
        let mut out = Vec::new();
        for (i, b) in spec.branches().iter().enumerate() {
            let pl = n.plus && b.accepts(&SignedPoint::new(n.value.clone(), Side::Plus.flip(n.sigma)));
            let mi = n.minus && b.accepts(&SignedPoint::new(n.value.clone(), Side::Minus.flip(n.sigma)));
            if pl || mi {
                let mut letters = n.letters.clone();
                letters.push(i);
                out.push(PointNode {
                    letters,
                    value: b.apply(&n.value),
                    sigma: n.sigma * b.orientation(),
                    plus: pl,
                    minus: mi,
                });
            }
        }
        out
    };
    for depth in 1..=m {
        level = if level.len() >= 512 {
            level.par_iter().flat_map_iter(children).collect()
        } else {
            level.iter().flat_map(children).collect()
        };
        used += level.len() as u64;
        if used > budget {
            return Err(Error::BudgetExceeded { budget, completed_levels: depth - 1 });
        }
        if level.is_empty() {
            break;
        }
        visit(depth, &level)?;
    }
    Ok(())
}

/// ℓ(k|J) for k = 1..=m: forward words whose domain meets J in a set with interior.
pub fn lap_counts(spec: &SystemSpec, j: &Span, m: usize, budget: u64) -> Result<Vec<u64>> {
    let start = match j {
        Span::Line => None,
        Span::Empty => return Ok(vec![0; m]),
        Span::Segment(iv) => {
            if !iv.has_interior() {
                return Ok(vec![0; m]);
            }
            Some(iv.clone())
        }
    };
    // seeds: level-1 images, then fan out in parallel from a wider frontier
    let mut counts = vec![0u64; m];
    if m == 0 {
        return Ok(counts);
    }
    let mut frontier: Vec<ClosedInterval> = Vec::new();
    for b in spec.branches() {
        let k = match &start {
            None => Some(b.domain().clone()),
            Some(iv) => iv.intersect(b.domain()),
        };
        if let Some(k) = k.filter(ClosedInterval::has_interior) {
            frontier.push(b.map_interval(&k));
        }
    }
    counts[0] = frontier.len() as u64;
    let mut depth = 1;
    while depth < m && !frontier.is_empty() && frontier.len() < 256 {
        frontier = children(spec, &frontier);
        counts[depth] = frontier.len() as u64;
        depth += 1;
    }
    if depth >= m || frontier.is_empty() {
        return Ok(counts);
    }
    let used = AtomicU64::new(counts.iter().sum());
    let parts: Vec<Result<Vec<u64>>> = frontier
        .par_iter()
        .map(|iv| {
            let mut local = vec![0u64; m];
            let mut stack = vec![(iv.clone(), depth)];
            let mut since = 0u64;
            while let Some((img, d)) = stack.pop() {
                if d == m {
                    continue;
                }
                for b in spec.branches() {
                    if let Some(k) = img.intersect(b.domain()).filter(ClosedInterval::has_interior) {
                        local[d] += 1;
                        since += 1;
                        stack.push((b.map_interval(&k), d + 1));
                    }
                }
                if since >= 4096 {
                    if used.fetch_add(since, AtomicOrdering::Relaxed) + since > budget {
                        return Err(Error::BudgetExceeded { budget, completed_levels: depth });
                    }
                    since = 0;
                }
            }
            if used.fetch_add(since, AtomicOrdering::Relaxed) + since > budget {
                return Err(Error::BudgetExceeded { budget, completed_levels: depth });
            }
            Ok(local)
        })
        .collect();
    for part in parts {
        for (c, p) in counts.iter_mut().zip(part?) {
            *c += p;
        }
    }
    Ok(counts)
}

fn children(spec: &SystemSpec, frontier: &[ClosedInterval]) -> Vec<ClosedInterval> {
    let mut out = Vec::new();
    for img in frontier {
        for b in spec.branches() {
            if let Some(k) = img.intersect(b.domain()).filter(ClosedInterval::has_interior) {
                out.push(b.map_interval(&k));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointWord {
    pub word: Word,
    /// The point lies in the interior of Dom(f_word).
    pub interior: bool,
}

/// Forward words of length 1..=m admissible for `p`, level by level.
///
/// For an exact point a word is admissible when the point lies in the closed
/// domain; for a one-sided point the side rule applies at every letter.
pub fn admissible_for_point(spec: &SystemSpec, p: &SignedPoint, m: usize, budget: u64) -> Result<Vec<Vec<PointWord>>> {
    use crate::system::Side;
    // state: value, exact/plus/minus followers
    let mut levels: Vec<Vec<PointWord>> = Vec::with_capacity(m);
    let (plus0, minus0) = match p.side {
        Side::Exact => (true, true),
        Side::Plus => (true, false),
        Side::Minus => (false, true),
    };
    let exact0 = p.side == Side::Exact;
    // (letters, value, orientation, exact alive, plus alive, minus alive)
    let mut frontier: Vec<(Vec<usize>, Rational, i32, bool, bool, bool)> =
        vec![(Vec::new(), p.value.clone(), 1, exact0, plus0, minus0)];
    let mut used = 0u64;
    for depth in 1..=m {
        let mut next = Vec::new();
        let mut level = Vec::new();
        for (letters, v, o, ex, pl, mi) in &frontier {
            for (i, b) in spec.branches().iter().enumerate() {
                let d = b.domain();
                let ex2 = *ex && d.contains(v);
                // sides in the coordinates of the original point
                let side_ok = |s_orig: Side| {
                    let s = s_orig.flip(*o);
                    b.accepts(&SignedPoint::new(v.clone(), s))
                };
                let pl2 = *pl && side_ok(Side::Plus);
                let mi2 = *mi && side_ok(Side::Minus);
                if !(ex2 || pl2 || mi2) {
                    continue;
                }
                let mut l2 = letters.clone();
                l2.push(i);
                level.push(PointWord { word: Word::forward(&l2), interior: pl2 && mi2 });
                next.push((l2, b.apply(v), o * b.orientation(), ex2, pl2, mi2));
            }
        }
        used += next.len() as u64;
        if used > budget {
            return Err(Error::BudgetExceeded { budget, completed_levels: depth - 1 });
        }
        levels.push(level);
        frontier = next;
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use crate::system::{affine_system, Side};

    fn two_three() -> SystemSpec {
        affine_system(&[(int(-1), int(1), int(2), int(0)), (int(-1), int(1), int(3), int(0))]).unwrap()
    }

    fn tent() -> SystemSpec {
        affine_system(&[(int(0), rat(1, 2), int(2), int(0)), (rat(1, 2), int(1), int(-2), int(2))]).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let w: Word = "a1.a3.A2".parse().unwrap();
        assert_eq!(w.to_string(), "a1.a3.A2");
        assert_eq!(w.kind(), WordKind::Mixed);
        assert_eq!("a1.A1".parse::<Word>().unwrap(), Word::empty());
        assert_eq!(Word::empty().to_string(), "e");
        assert!("b1".parse::<Word>().is_err());
        assert!("a0".parse::<Word>().is_err());
        assert_eq!(w.inverse().to_string(), "a2.A3.A1");
    }

    #[test]
    fn shortlex() {
        let a: Word = "a2".parse().unwrap();
        let b: Word = "a1.a1".parse().unwrap();
        assert!(a < b);
        assert!("a1.a2".parse::<Word>().unwrap() < "a2.a1".parse::<Word>().unwrap());
    }

    #[test]
    fn sigma_of_words() {
        let s = tent();
        assert_eq!(sigma(&s, &Word::empty()), 1);
        assert_eq!(sigma(&s, &"a2".parse().unwrap()), -1);
        assert_eq!(sigma(&s, &"a2.a2".parse().unwrap()), 1);
        assert_eq!(sigma(&two_three(), &"a1.a2".parse().unwrap()), 1);
    }

    #[test]
    fn domains() {
        let s = two_three();
        let d = word_domain(&s, &"a1.a1".parse().unwrap()).unwrap();
        assert_eq!(d.domain, Span::Segment(ClosedInterval::new(rat(-1, 2), rat(1, 2)).unwrap()));
        assert_eq!(word_domain(&s, &Word::empty()).unwrap().domain, Span::Line);
        let inv = word_domain(&s, &"A1".parse().unwrap()).unwrap();
        assert_eq!(inv.domain, Span::Segment(ClosedInterval::new(int(-2), int(2)).unwrap()));
        assert!(word_domain(&s, &"a1.A2".parse().unwrap()).is_err());
    }

    #[test]
    fn apply() {
        let s = two_three();
        let r = apply_word(&s, &"a1".parse().unwrap(), &SignedPoint::exact(int(1)));
        assert_eq!(r, Applied::Point(SignedPoint::exact(int(2))));
        let r = apply_word(&s, &"a1.a1".parse().unwrap(), &SignedPoint::exact(int(1)));
        assert_eq!(r, Applied::NotAdmissible { prefix: 1 });
        let t = tent();
        let half = SignedPoint::new(rat(1, 2), Side::Plus);
        assert_eq!(apply_word(&t, &"a2".parse().unwrap(), &half), Applied::Point(SignedPoint::new(int(1), Side::Minus)));
        let left = SignedPoint::new(int(0), Side::Plus);
        assert_eq!(apply_word(&t, &"a1".parse().unwrap(), &left), Applied::Point(SignedPoint::new(int(0), Side::Plus)));
        assert_eq!(apply_word(&t, &Word::empty(), &half), Applied::Point(half.clone()));
    }

    #[test]
    fn counts() {
        let s = two_three();
        let c = lap_counts(&s, &Span::Line, 12, DEFAULT_BUDGET).unwrap();
        assert_eq!(c, (1..=12).map(|k| 1u64 << k).collect::<Vec<_>>());
        let tree = enumerate_admissible(&s, 8, DEFAULT_BUDGET).unwrap();
        assert_eq!(tree.counts(), (1..=8).map(|k| 1u64 << k).collect::<Vec<_>>());
        let id = affine_system(&[(int(0), int(1), int(1), int(0))]).unwrap();
        assert_eq!(lap_counts(&id, &Span::Line, 5, DEFAULT_BUDGET).unwrap(), vec![1; 5]);
    }

    #[test]
    fn budget() {
        let s = two_three();
        let e = enumerate_admissible(&s, 10, 100).unwrap_err();
        assert_eq!(e, Error::BudgetExceeded { budget: 100, completed_levels: 5 });
        assert!(matches!(lap_counts(&s, &Span::Line, 16, 1000), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn point_words() {
        let t = tent();
        let lv = admissible_for_point(&t, &SignedPoint::exact(rat(1, 3)), 6, DEFAULT_BUDGET).unwrap();
        assert!(lv.iter().all(|l| l.len() == 1 && l[0].interior));
        let lv = admissible_for_point(&two_three(), &SignedPoint::exact(int(0)), 6, DEFAULT_BUDGET).unwrap();
        assert_eq!(lv.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 4, 8, 16, 32, 64]);
        let lv = admissible_for_point(&t, &SignedPoint::exact(int(3)), 3, DEFAULT_BUDGET).unwrap();
        assert!(lv.iter().all(Vec::is_empty));
    }
}
