//! Branches, systems, the turning-point partition and addresses.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, int, parse_rational, sign, ClosedInterval, Rational, TruncatedSeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Affine { slope: Rational, intercept: Rational },
    /// Sample points with strictly increasing x, interpolated linearly.
    Table(Vec<(Rational, Rational)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    domain: ClosedInterval,
    shape: Shape,
    orientation: i32,
    image: ClosedInterval,
}

impl Branch {
    pub fn affine(domain: ClosedInterval, slope: Rational, intercept: Rational) -> Result<Self> {
        if slope.is_zero() {
            return Err(Error::InvalidSystem("affine branch with zero slope".into()));
        }
        let orientation = sign(&slope);
        let a = &slope * domain.lo() + &intercept;
        let b = &slope * domain.hi() + &intercept;
        Ok(Branch {
            image: ClosedInterval::hull(a, b),
            domain,
            shape: Shape::Affine { slope, intercept },
            orientation,
        })
    }

    pub fn table(points: Vec<(Rational, Rational)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidSystem("a table needs at least two points".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidSystem(format!(
                    "table x values not strictly increasing at {}",
                    fmt_rational(&w[1].0)
                )));
            }
        }
        let first = sign(&(&points[1].1 - &points[0].1));
        if first == 0 {
            return Err(Error::InvalidSystem("table is not strictly monotone".into()));
        }
        for w in points.windows(2) {
            if sign(&(&w[1].1 - &w[0].1)) != first {
                return Err(Error::InvalidSystem(format!(
                    "table is not strictly monotone near x = {}",
                    fmt_rational(&w[0].0)
                )));
            }
        }
        let n = points.len();
        let domain = ClosedInterval::new(points[0].0.clone(), points[n - 1].0.clone())?;
        let image = ClosedInterval::hull(points[0].1.clone(), points[n - 1].1.clone());
        Ok(Branch { domain, shape: Shape::Table(points), orientation: first, image })
    }

    pub fn domain(&self) -> &ClosedInterval {
        &self.domain
    }

    pub fn image(&self) -> &ClosedInterval {
        &self.image
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// +1 for increasing, -1 for decreasing.
    pub fn orientation(&self) -> i32 {
        self.orientation
    }

    pub fn is_degenerate(&self) -> bool {
        !self.domain.has_interior()
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain {
                x: fmt_rational(x),
                lo: fmt_rational(self.domain.lo()),
                hi: fmt_rational(self.domain.hi()),
            });
        }
        Ok(self.apply(x))
    }

    pub fn invert(&self, y: &Rational) -> Result<Rational> {
        if !self.image.contains(y) {
            return Err(Error::OutsideImage {
                y: fmt_rational(y),
                lo: fmt_rational(self.image.lo()),
                hi: fmt_rational(self.image.hi()),
            });
        }
        Ok(self.unapply(y))
    }

    // Unchecked forms; callers have already tested membership.
    pub(crate) fn apply(&self, x: &Rational) -> Rational {
        match &self.shape {
            Shape::Affine { slope, intercept } => slope * x + intercept,
            Shape::Table(pts) => {
                let k = pts.partition_point(|(px, _)| px <= x).clamp(1, pts.len() - 1);
                lerp(&pts[k - 1], &pts[k], x)
            }
        }
    }

    pub(crate) fn unapply(&self, y: &Rational) -> Rational {
        match &self.shape {
            Shape::Affine { slope, intercept } => {
                if self.is_degenerate() {
                    self.domain.lo().clone()
                } else {
                    (y - intercept) / slope
                }
            }
            Shape::Table(pts) => {
                let k = if self.orientation > 0 {
                    pts.partition_point(|(_, py)| py <= y)
                } else {
                    pts.partition_point(|(_, py)| py >= y)
                }
                .clamp(1, pts.len() - 1);
                let (a, b) = (&pts[k - 1], &pts[k]);
                lerp(&(a.1.clone(), a.0.clone()), &(b.1.clone(), b.0.clone()), y)
            }
        }
    }

    /// Image of a sub-interval of the domain.
    pub(crate) fn map_interval(&self, iv: &ClosedInterval) -> ClosedInterval {
        ClosedInterval::hull(self.apply(iv.lo()), self.apply(iv.hi()))
    }

    /// `{x in domain : f(x) in iv}`.
    pub fn preimage(&self, iv: &ClosedInterval) -> Option<ClosedInterval> {
        let k = self.image.intersect(iv)?;
        Some(ClosedInterval::hull(self.unapply(k.lo()), self.unapply(k.hi())))
    }

    fn conjugate(&self, a: &Rational, b: &Rational) -> Result<Branch> {
        let h = |x: &Rational| a * x + b;
        match &self.shape {
            Shape::Affine { slope, intercept } => {
                let dom = ClosedInterval::new(h(self.domain.lo()), h(self.domain.hi()))?;
                Branch::affine(dom, slope.clone(), a * intercept + b - slope * b)
            }
            Shape::Table(pts) => Branch::table(pts.iter().map(|(x, y)| (h(x), h(y))).collect()),
        }
    }

    /// Whether the branch applies to a signed point: exact points need the
    /// closed domain, one-sided points need a half-neighbourhood inside it.
    pub fn accepts(&self, p: &SignedPoint) -> bool {
        side_accepts(&self.domain, p)
    }

    pub(crate) fn accepts_inverse(&self, p: &SignedPoint) -> bool {
        side_accepts(&self.image, p)
    }
}

fn side_accepts(iv: &ClosedInterval, p: &SignedPoint) -> bool {
    let v = &p.value;
    match p.side {
        Side::Exact => iv.contains(v),
        Side::Plus => iv.lo() <= v && v < iv.hi(),
        Side::Minus => iv.lo() < v && v <= iv.hi(),
    }
}

fn lerp(a: &(Rational, Rational), b: &(Rational, Rational), x: &Rational) -> Rational {
    &a.1 + (&b.1 - &a.1) * (x - &a.0) / (&b.0 - &a.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Exact,
    Plus,
}

impl Side {
    pub fn flip(self, orientation: i32) -> Side {
        if orientation > 0 {
            return self;
        }
        match self {
            Side::Minus => Side::Plus,
            Side::Exact => Side::Exact,
            Side::Plus => Side::Minus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPoint {
    pub value: Rational,
    pub side: Side,
}

impl SignedPoint {
    pub fn new(value: Rational, side: Side) -> Self {
        SignedPoint { value, side }
    }

    pub fn exact(value: Rational) -> Self {
        SignedPoint { value, side: Side::Exact }
    }
}

impl fmt::Display for SignedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.side {
            Side::Minus => "-",
            Side::Exact => "",
            Side::Plus => "+",
        };
        write!(f, "{}{}", fmt_rational(&self.value), tag)
    }
}

/// Where a point sits in the partition P_0, c_1, P_1, ..., c_{l+1}, P_{l+1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Address {
    Cell(usize),
    /// 1-based turning-point index.
    Turning(usize),
}

impl Address {
    /// Position in the left-to-right order of cells and turning points.
    pub fn rank(self) -> usize {
        match self {
            Address::Cell(j) => 2 * j,
            Address::Turning(i) => 2 * i - 1,
        }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Address::Cell(j) => write!(f, "P{j}"),
            Address::Turning(i) => write!(f, "c{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    name: Option<String>,
    branches: Vec<Branch>,
    turning: Vec<Rational>,
    degenerate: bool,
    warnings: Vec<String>,
}

impl SystemSpec {
    pub fn new(branches: Vec<Branch>, degenerate: bool) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidSystem("empty branch list".into()));
        }
        for (i, b) in branches.iter().enumerate() {
            if b.is_degenerate() && !degenerate {
                return Err(Error::InvalidSystem(format!(
                    "branch a{} has a degenerate domain {} but the system is not flagged degenerate",
                    i + 1,
                    b.domain()
                )));
            }
        }
        let mut turning: Vec<Rational> =
            branches.iter().flat_map(|b| [b.domain.lo().clone(), b.domain.hi().clone()]).collect();
        turning.sort();
        turning.dedup();
        let mut warnings = Vec::new();
        for i in 0..branches.len() {
            for j in i + 1..branches.len() {
                if branches[i].domain.overlaps(&branches[j].domain) {
                    warnings.push(format!("domains of a{} and a{} have overlapping interiors", i + 1, j + 1));
                }
            }
        }
        Ok(SystemSpec { name: None, branches, turning, degenerate, warnings })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, i: usize) -> &Branch {
        &self.branches[i]
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    /// c_1 < ... < c_{l+1}.
    pub fn turning_points(&self) -> &[Rational] {
        &self.turning
    }

    /// The 1-based turning point c_i.
    pub fn turning(&self, i: usize) -> &Rational {
        &self.turning[i - 1]
    }

    /// l + 1.
    pub fn n_turning(&self) -> usize {
        self.turning.len()
    }

    /// l + 2.
    pub fn n_cells(&self) -> usize {
        self.turning.len() + 1
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn orientations(&self) -> Vec<i32> {
        self.branches.iter().map(Branch::orientation).collect()
    }

    /// [c_1, c_{l+1}].
    pub fn hull(&self) -> ClosedInterval {
        ClosedInterval::hull(self.turning[0].clone(), self.turning[self.turning.len() - 1].clone())
    }

    /// Largest number of table segments, if any branch is a table.
    pub fn table_resolution(&self) -> Option<usize> {
        self.branches
            .iter()
            .filter_map(|b| match &b.shape {
                Shape::Table(p) => Some(p.len() - 1),
                Shape::Affine { .. } => None,
            })
            .max()
    }

    pub fn is_affine(&self) -> bool {
        self.branches.iter().all(|b| matches!(b.shape, Shape::Affine { .. }))
    }

    /// 1-based index of the turning point equal to `x`.
    pub fn turning_index(&self, x: &Rational) -> Option<usize> {
        self.turning.binary_search(x).ok().map(|k| k + 1)
    }

    pub fn address(&self, p: &SignedPoint) -> Address {
        let below = self.turning.partition_point(|c| c < &p.value);
        match self.turning.get(below) {
            Some(c) if c == &p.value => match p.side {
                Side::Exact => Address::Turning(below + 1),
                Side::Minus => Address::Cell(below),
                Side::Plus => Address::Cell(below + 1),
            },
            _ => Address::Cell(below),
        }
    }

    /// The closed cell P_j for 1 <= j <= l; the outer cells are unbounded.
    pub fn cell_interval(&self, j: usize) -> Option<ClosedInterval> {
        if j == 0 || j >= self.n_turning() {
            return None;
        }
        Some(ClosedInterval::hull(self.turning[j - 1].clone(), self.turning[j].clone()))
    }

    /// e_j(t) = 1 - sum of orientations of the branches whose domain contains P_j.
    pub fn e_polys(&self, cap: usize) -> Vec<TruncatedSeries> {
        (0..self.n_cells())
            .map(|j| {
                let mut c1 = Rational::zero();
                if let Some(cell) = self.cell_interval(j) {
                    for b in &self.branches {
                        if cell.is_subset_of(&b.domain) {
                            c1 -= int(b.orientation as i64);
                        }
                    }
                }
                TruncatedSeries::from_coeffs(cap, &[Rational::one(), c1])
            })
            .collect()
    }

    /// The system h o F o h^-1 for h(x) = a x + b with a > 0.
    pub fn conjugate(&self, a: &Rational, b: &Rational) -> Result<SystemSpec> {
        if !a.is_positive() {
            return Err(Error::Precondition("conjugating map must be increasing".into()));
        }
        let branches = self.branches.iter().map(|br| br.conjugate(a, b)).collect::<Result<Vec<_>>>()?;
        let mut spec = SystemSpec::new(branches, self.degenerate)?;
        spec.name = self.name.as_ref().map(|n| format!("{n} (conjugated)"));
        Ok(spec)
    }

    pub fn to_config(&self) -> SystemConfig {
        SystemConfig {
            name: self.name.clone(),
            degenerate: self.degenerate.then_some(true),
            branches: self
                .branches
                .iter()
                .map(|b| match &b.shape {
                    Shape::Affine { slope, intercept } => BranchConfig {
                        domain: [fmt_rational(b.domain.lo()), fmt_rational(b.domain.hi())],
                        affine: Some(AffineConfig { slope: fmt_rational(slope), intercept: fmt_rational(intercept) }),
                        table: None,
                    },
                    Shape::Table(pts) => BranchConfig {
                        domain: [fmt_rational(b.domain.lo()), fmt_rational(b.domain.hi())],
                        affine: None,
                        table: Some(pts.iter().map(|(x, y)| [fmt_rational(x), fmt_rational(y)]).collect()),
                    },
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub branches: Vec<BranchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub domain: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<AffineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[String; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineConfig {
    pub slope: String,
    pub intercept: String,
}

impl SystemConfig {
    pub fn build(&self) -> Result<SystemSpec> {
        let degenerate = self.degenerate.unwrap_or(false);
        let mut branches = Vec::with_capacity(self.branches.len());
        for (i, bc) in self.branches.iter().enumerate() {
            let tag = |e: Error| Error::InvalidSystem(format!("branch a{}: {e}", i + 1));
            let lo = parse_rational(&bc.domain[0]).map_err(tag)?;
            let hi = parse_rational(&bc.domain[1]).map_err(tag)?;
            let domain = ClosedInterval::new(lo, hi).map_err(tag)?;
            let branch = match (&bc.affine, &bc.table) {
                (Some(a), None) => {
                    let slope = parse_rational(&a.slope).map_err(tag)?;
                    let intercept = parse_rational(&a.intercept).map_err(tag)?;
                    Branch::affine(domain, slope, intercept).map_err(tag)?
                }
                (None, Some(t)) => {
                    let pts = t
                        .iter()
                        .map(|[x, y]| Ok((parse_rational(x)?, parse_rational(y)?)))
                        .collect::<Result<Vec<_>>>()
                        .map_err(tag)?;
                    let b = Branch::table(pts).map_err(tag)?;
                    if b.domain != domain {
                        return Err(tag(Error::InvalidSystem(format!(
                            "table spans {} but the domain is {}",
                            b.domain, domain
                        ))));
                    }
                    b
                }
                _ => return Err(tag(Error::InvalidSystem("give exactly one of `affine` or `table`".into()))),
            };
            branches.push(branch);
        }
        let spec = SystemSpec::new(branches, degenerate)?;
        Ok(match &self.name {
            Some(n) => spec.with_name(n.clone()),
            None => spec,
        })
    }
}

/// Parses a JSON system description.
pub fn load_system(text: &str) -> Result<SystemSpec> {
    let cfg: SystemConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.build()
}

/// Convenience constructor: `(lo, hi, slope, intercept)` per branch.
pub fn affine_system(branches: &[(Rational, Rational, Rational, Rational)]) -> Result<SystemSpec> {
    let bs = branches
        .iter()
        .map(|(lo, hi, s, c)| Branch::affine(ClosedInterval::new(lo.clone(), hi.clone())?, s.clone(), c.clone()))
        .collect::<Result<Vec<_>>>()?;
    SystemSpec::new(bs, false)
}
