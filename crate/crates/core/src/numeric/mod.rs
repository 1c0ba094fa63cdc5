//! Exact rationals, closed intervals and truncated power series.

mod linalg;
mod roots;
mod series;

pub use linalg::{cofactor_det, series_det};
pub use roots::{simplest_between, smallest_root_in_unit_interval, smallest_root_with_grid, DEFAULT_GRID};
pub use series::{TruncatedSeries, VectorSeries};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "3", "-1/3", "0.75", "-2.5e-3". A leading U+2212 minus is accepted.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim().replace('\u{2212}', "-");
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    let bad = || Error::Parse(format!("not a number: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => {
            let e: i32 = s[k + 1..].parse().map_err(|_| bad())?;
            (&s[..k], e)
        }
        None => (&s[..], 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(digits);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Lowest-terms fraction string, "n" or "n/d".
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Fixed-point rendering with `digits` places, rounding half away from zero.
pub fn fmt_decimal(r: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = r * Rational::from_integer(scale.clone());
    let (q, rem) = scaled.numer().abs().div_rem(scaled.denom());
    let mut q = q;
    if rem * 2 >= *scaled.denom() {
        q += 1;
    }
    let neg = r.is_negative() && !q.is_zero();
    let mut s = q.to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        s.insert(s.len() - digits, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn sign(r: &Rational) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

pub fn mid(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

/// A closed interval `[lo, hi]` with `lo <= hi`; a single point is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosedInterval {
    lo: Rational,
    hi: Rational,
}

impl ClosedInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Precondition(format!(
                "interval endpoints out of order: [{}, {}]",
                fmt_rational(&lo),
                fmt_rational(&hi)
            )));
        }
        Ok(ClosedInterval { lo, hi })
    }

    /// Builds the interval spanned by two points in either order.
    pub fn hull(a: Rational, b: Rational) -> Self {
        if a <= b {
            ClosedInterval { lo: a, hi: b }
        } else {
            ClosedInterval { lo: b, hi: a }
        }
    }

    pub fn point(x: Rational) -> Self {
        ClosedInterval { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interior(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn has_interior(&self) -> bool {
        self.lo < self.hi
    }

    pub fn is_subset_of(&self, other: &ClosedInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersect(&self, other: &ClosedInterval) -> Option<ClosedInterval> {
        let lo = std::cmp::max(&self.lo, &other.lo);
        let hi = std::cmp::min(&self.hi, &other.hi);
        match lo.cmp(hi) {
            Ordering::Greater => None,
            _ => Some(ClosedInterval { lo: lo.clone(), hi: hi.clone() }),
        }
    }

    /// True when the intersection has non-empty interior.
    pub fn overlaps(&self, other: &ClosedInterval) -> bool {
        std::cmp::max(&self.lo, &other.lo) < std::cmp::min(&self.hi, &other.hi)
    }
}

impl fmt::Display for ClosedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_rational(&self.lo), fmt_rational(&self.hi))
    }
}

/// A subset of the line that is either everything, nothing, or a closed interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Span {
    Line,
    Empty,
    Segment(ClosedInterval),
}

impl Span {
    pub fn from_option(iv: Option<ClosedInterval>) -> Self {
        iv.map_or(Span::Empty, Span::Segment)
    }

    pub fn has_interior(&self) -> bool {
        match self {
            Span::Line => true,
            Span::Empty => false,
            Span::Segment(iv) => iv.has_interior(),
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            Span::Line => true,
            Span::Empty => false,
            Span::Segment(iv) => iv.contains(x),
        }
    }

    pub fn intersect(&self, iv: &ClosedInterval) -> Option<ClosedInterval> {
        match self {
            Span::Line => Some(iv.clone()),
            Span::Empty => None,
            Span::Segment(s) => s.intersect(iv),
        }
    }

    pub fn segment(&self) -> Option<&ClosedInterval> {
        match self {
            Span::Segment(iv) => Some(iv),
            _ => None,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Span::Line => write!(f, "(-inf, inf)"),
            Span::Empty => write!(f, "empty"),
            Span::Segment(iv) => iv.fmt(f),
        }
    }
}
