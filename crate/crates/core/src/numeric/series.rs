use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{fmt_rational, int, Rational};
use crate::error::{Error, Result};

/// A power series in `t` kept modulo `t^(cap+1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    pub fn zero(cap: usize) -> Self {
        TruncatedSeries { coeffs: vec![Rational::zero(); cap + 1] }
    }

    pub fn one(cap: usize) -> Self {
        Self::constant(cap, Rational::one())
    }

    pub fn constant(cap: usize, c: Rational) -> Self {
        let mut s = Self::zero(cap);
        s.coeffs[0] = c;
        s
    }

    /// Coefficients beyond `cap` are dropped, missing ones are zero.
    pub fn from_coeffs(cap: usize, coeffs: &[Rational]) -> Self {
        let mut s = Self::zero(cap);
        for (k, c) in coeffs.iter().enumerate().take(cap + 1) {
            s.coeffs[k] = c.clone();
        }
        s
    }

    pub fn from_ints(cap: usize, coeffs: &[i64]) -> Self {
        let v: Vec<Rational> = coeffs.iter().map(|&c| int(c)).collect();
        Self::from_coeffs(cap, &v)
    }

    pub fn monomial(cap: usize, k: usize, c: Rational) -> Self {
        let mut s = Self::zero(cap);
        if k <= cap {
            s.coeffs[k] = c;
        }
        s
    }

    /// `sum_k (r t)^k`, i.e. `1/(1 - r t)` truncated.
    pub fn geometric(cap: usize, r: &Rational) -> Self {
        let mut s = Self::zero(cap);
        let mut p = Rational::one();
        for k in 0..=cap {
            s.coeffs[k] = p.clone();
            p *= r;
        }
        s
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn add_to_coeff(&mut self, k: usize, c: &Rational) {
        if k <= self.cap() {
            self.coeffs[k] += c;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Highest index with a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    fn check_cap(&self, other: &Self) -> Result<()> {
        if self.cap() != other.cap() {
            return Err(Error::CapMismatch { left: self.cap(), right: other.cap() });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_cap(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(TruncatedSeries { coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_cap(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(TruncatedSeries { coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_cap(other)?;
        let cap = self.cap();
        let mut out = Self::zero(cap);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=cap - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiplicative inverse mod `t^(cap+1)`; needs a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::NotInvertible);
        }
        let cap = self.cap();
        let inv0 = c0.recip();
        let mut out = Self::zero(cap);
        out.coeffs[0] = inv0.clone();
        for k in 1..=cap {
            let mut acc = Rational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out.coeffs[k - j];
                }
            }
            out.coeffs[k] = -acc * &inv0;
        }
        Ok(out)
    }

    /// Keeps coefficients up to `cap` (which may not exceed the current cap).
    pub fn truncate(&self, cap: usize) -> Self {
        assert!(cap <= self.cap(), "cannot extend a truncated series");
        TruncatedSeries { coeffs: self.coeffs[..=cap].to_vec() }
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + super::to_f64(c);
        }
        acc
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(fmt_rational).collect()
    }

    pub fn from_strings(items: &[String]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Parse("empty coefficient list".into()));
        }
        let coeffs = items.iter().map(|s| super::parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Ok(TruncatedSeries { coeffs })
    }

    /// Renders like `1 - 2t + 1/2t^3`.
    pub fn to_poly_string(&self, decimal: Option<usize>) -> String {
        let render = |c: &Rational| match decimal {
            Some(d) => super::fmt_decimal(c, d),
            None => fmt_rational(c),
        };
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let neg = c.is_negative();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let var = match k {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            };
            if k == 0 || !mag.is_one() {
                out.push_str(&render(&mag));
            }
            out.push_str(&var);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_poly_string(None))
    }
}

// The operator forms panic on a cap mismatch; use the checked_* methods
// when the caps come from outside.
impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_add(rhs).expect("series cap mismatch")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_sub(rhs).expect("series cap mismatch")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_mul(rhs).expect("series cap mismatch")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

/// One series per partition cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorSeries {
    cells: Vec<TruncatedSeries>,
}

impl VectorSeries {
    pub fn zero(n_cells: usize, cap: usize) -> Self {
        VectorSeries { cells: vec![TruncatedSeries::zero(cap); n_cells] }
    }

    pub fn from_cells(cells: Vec<TruncatedSeries>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Precondition("vector series needs at least one cell".into()));
        }
        let cap = cells[0].cap();
        if let Some(bad) = cells.iter().find(|c| c.cap() != cap) {
            return Err(Error::CapMismatch { left: cap, right: bad.cap() });
        }
        Ok(VectorSeries { cells })
    }

    pub fn cap(&self) -> usize {
        self.cells[0].cap()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, j: usize) -> &TruncatedSeries {
        &self.cells[j]
    }

    pub fn cells(&self) -> &[TruncatedSeries] {
        &self.cells
    }

    pub fn add_term(&mut self, cell: usize, k: usize, c: &Rational) {
        self.cells[cell].add_to_coeff(k, c);
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(TruncatedSeries::is_zero)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, TruncatedSeries::checked_add)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, TruncatedSeries::checked_sub)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(&TruncatedSeries, &TruncatedSeries) -> Result<TruncatedSeries>,
    ) -> Result<Self> {
        if self.n_cells() != other.n_cells() {
            return Err(Error::StructuralMismatch(format!(
                "vector series with {} and {} cells",
                self.n_cells(),
                other.n_cells()
            )));
        }
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| op(a, b)).collect::<Result<_>>()?;
        Ok(VectorSeries { cells })
    }

    pub fn mul_series(&self, s: &TruncatedSeries) -> Result<Self> {
        let cells = self.cells.iter().map(|c| c.checked_mul(s)).collect::<Result<_>>()?;
        Ok(VectorSeries { cells })
    }

    pub fn truncate(&self, cap: usize) -> Self {
        VectorSeries { cells: self.cells.iter().map(|c| c.truncate(cap)).collect() }
    }

    /// Lexicographic comparison by degree; within a degree the difference
    /// vector is positive when its highest-index nonzero coordinate is.
    pub fn cmp_lex(&self, other: &Self) -> Ordering {
        assert_eq!(self.n_cells(), other.n_cells());
        let cap = self.cap().min(other.cap());
        for k in 0..=cap {
            for j in (0..self.n_cells()).rev() {
                let d = self.cells[j].coeff(k).cmp(other.cells[j].coeff(k));
                if d != Ordering::Equal {
                    return d;
                }
            }
        }
        Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn geometric_inverse() {
        let a = TruncatedSeries::from_ints(2, &[1, -2]);
        let b = TruncatedSeries::from_ints(2, &[1, 2, 4]);
        assert_eq!(&a * &b, TruncatedSeries::one(2));
        let c = TruncatedSeries::from_ints(5, &[1, -1]);
        let s = TruncatedSeries::geometric(5, &int(1));
        assert_eq!(&c * &s, TruncatedSeries::one(5));
        let sum = &TruncatedSeries::from_ints(3, &[1, -2]) + &TruncatedSeries::from_ints(3, &[0, 2]);
        assert_eq!(sum, TruncatedSeries::one(3));
    }

    #[test]
    fn cap_mismatch_is_an_error() {
        let a = TruncatedSeries::one(2);
        let b = TruncatedSeries::one(3);
        assert_eq!(a.checked_add(&b), Err(Error::CapMismatch { left: 2, right: 3 }));
        assert!(a.checked_mul(&b).is_err());
        assert!(VectorSeries::from_cells(vec![a, b]).is_err());
    }

    #[test]
    fn inverse_requires_constant_term() {
        let a = TruncatedSeries::from_ints(4, &[0, 1]);
        assert_eq!(a.inverse(), Err(Error::NotInvertible));
        let b = TruncatedSeries::from_ints(4, &[2, 1]);
        assert_eq!(&b * &b.inverse().unwrap(), TruncatedSeries::one(4));
    }

    #[test]
    fn poly_strings() {
        assert_eq!(TruncatedSeries::from_ints(8, &[1, -2]).to_string(), "1 - 2t");
        assert_eq!(TruncatedSeries::from_ints(3, &[-1, 2]).to_string(), "-1 + 2t");
        assert_eq!(TruncatedSeries::from_ints(3, &[0, -1, 0, 3]).to_string(), "-t + 3t^3");
        assert_eq!(TruncatedSeries::zero(3).to_string(), "0");
        let h = TruncatedSeries::from_coeffs(2, &[rat(1, 2), rat(-1, 3)]);
        assert_eq!(h.to_string(), "1/2 - 1/3t");
        assert_eq!(h.to_poly_string(Some(2)), "0.50 - 0.33t");
    }

    #[test]
    fn string_round_trip() {
        let h = TruncatedSeries::from_coeffs(2, &[rat(1, 2), rat(-1, 3)]);
        let back = TruncatedSeries::from_strings(&h.to_strings()).unwrap();
        assert_eq!(back, h);
        assert_eq!(h.to_strings(), vec!["1/2", "-1/3", "0"]);
    }

    #[test]
    fn lex_order_uses_highest_cell() {
        let mut a = VectorSeries::zero(3, 1);
        let mut b = VectorSeries::zero(3, 1);
        a.add_term(0, 0, &int(1));
        b.add_term(1, 0, &int(1));
        assert_eq!(a.cmp_lex(&b), Ordering::Less);
        // equal at degree 0, decided at degree 1
        let mut c = b.clone();
        c.add_term(2, 1, &int(-1));
        assert_eq!(c.cmp_lex(&b), Ordering::Less);
    }
}
