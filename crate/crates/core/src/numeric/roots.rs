use num_traits::{One, Signed, Zero};

use super::{int, sign, Rational, TruncatedSeries};
use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 1024;

/// Smallest root of `p` in `[lo, hi]`, located by an exact sign scan on a
/// 1024-step grid followed by bisection down to `tol`.
pub fn smallest_root_in_unit_interval(
    p: &TruncatedSeries,
    lo: &Rational,
    hi: &Rational,
    tol: &Rational,
) -> Result<Option<Rational>> {
    smallest_root_with_grid(p, lo, hi, tol, DEFAULT_GRID)
}

pub fn smallest_root_with_grid(
    p: &TruncatedSeries,
    lo: &Rational,
    hi: &Rational,
    tol: &Rational,
    grid: usize,
) -> Result<Option<Rational>> {
    if p.is_zero() {
        return Err(Error::DegenerateSeries { cap: p.cap() });
    }
    if !(lo.is_positive() && lo < hi && *hi <= Rational::one()) {
        return Err(Error::Precondition("root search needs 0 < lo < hi <= 1".into()));
    }
    if !tol.is_positive() || grid == 0 {
        return Err(Error::Precondition("root search needs tol > 0 and a non-empty grid".into()));
    }
    let step = (hi - lo) / int(grid as i64);
    let mut a = lo.clone();
    let mut sa = sign(&p.eval(&a));
    if sa == 0 {
        return Ok(Some(a));
    }
    for k in 1..=grid {
        let b = if k == grid { hi.clone() } else { lo + &step * int(k as i64) };
        let sb = sign(&p.eval(&b));
        if sb == 0 {
            return Ok(Some(b));
        }
        if sb != sa {
            return Ok(Some(bisect(p, a, b, sa, tol)));
        }
        a = b;
        sa = sb;
    }
    Ok(None)
}

fn bisect(p: &TruncatedSeries, mut a: Rational, mut b: Rational, sa: i32, tol: &Rational) -> Rational {
    while &b - &a > *tol {
        let m = (&a + &b) / int(2);
        let sm = sign(&p.eval(&m));
        if sm == 0 {
            return m;
        }
        if sm == sa {
            a = m;
        } else {
            b = m;
        }
    }
    // a root with small denominator inside the bracket is returned exactly
    let q = simplest_between(&a, &b);
    if p.eval(&q).is_zero() {
        return q;
    }
    (a + b) / int(2)
}

/// The rational with the smallest denominator in `[a, b]`, for `0 < a <= b`.
pub fn simplest_between(a: &Rational, b: &Rational) -> Rational {
    assert!(a.is_positive() && a <= b);
    let c = a.ceil();
    if &c <= b {
        return c;
    }
    let n = a.floor();
    let lo = (b - &n).recip();
    let hi = (a - &n).recip();
    &n + simplest_between(&lo, &hi).recip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn linear_root_is_exact() {
        let p = TruncatedSeries::from_ints(8, &[1, -2]);
        let r = smallest_root_in_unit_interval(&p, &rat(1, 100), &rat(99, 100), &rat(1, 1_000_000_000)).unwrap();
        assert_eq!(r, Some(rat(1, 2)));
    }

    #[test]
    fn golden_ratio_root() {
        let p = TruncatedSeries::from_ints(4, &[1, -1, -1]);
        let tol = rat(1, 1_000_000_000);
        let r = smallest_root_in_unit_interval(&p, &rat(1, 1000), &int(1), &tol).unwrap().unwrap();
        let exact = (5f64.sqrt() - 1.0) / 2.0;
        assert!((crate::numeric::to_f64(&r) - exact).abs() <= 1e-9);
        let left = p.eval(&(&r - &tol));
        let right = p.eval(&(&r + &tol));
        assert_eq!(sign(&left) * sign(&right), -1);
    }

    #[test]
    fn no_root() {
        let p = TruncatedSeries::from_ints(4, &[1, 1]);
        let r = smallest_root_in_unit_interval(&p, &rat(1, 1000), &int(1), &rat(1, 1000)).unwrap();
        assert_eq!(r, None);
    }

    #[test]
    fn degenerate() {
        let p = TruncatedSeries::zero(3);
        let r = smallest_root_in_unit_interval(&p, &rat(1, 1000), &int(1), &rat(1, 1000));
        assert_eq!(r, Err(Error::DegenerateSeries { cap: 3 }));
    }

    #[test]
    fn simplest() {
        assert_eq!(simplest_between(&rat(49, 100), &rat(51, 100)), rat(1, 2));
        assert_eq!(simplest_between(&rat(3, 10), &rat(34, 100)), rat(1, 3));
        assert_eq!(simplest_between(&rat(1, 2), &rat(1, 2)), rat(1, 2));
        assert_eq!(simplest_between(&rat(5, 2), &rat(7, 2)), int(3));
    }
}
