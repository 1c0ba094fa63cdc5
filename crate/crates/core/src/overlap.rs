//! Two increasing branches on [0, q] and [q, 1] with possibly overlapping
//! images: critical itineraries, the entropy root and the affine model.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::kneading::kneading_matrix;
use crate::numeric::{fmt_rational, int, smallest_root_in_unit_interval, ClosedInterval, Rational, TruncatedSeries};
use crate::system::SystemSpec;

/// Orbits longer than this are treated as aperiodic.
const PERIOD_SEARCH: usize = 256;
/// Lower end of the root search.
const ROOT_FLOOR: (i64, i64) = (1, 1000);

/// Checks the overlapping shape and returns q.
pub fn overlap_shape(spec: &SystemSpec) -> Result<Rational> {
    if spec.n_branches() != 2 {
        return Err(Error::ShapeViolation(format!("expected 2 branches, found {}", spec.n_branches())));
    }
    let (f0, f1) = (spec.branch(0), spec.branch(1));
    let q = f0.domain().hi().clone();
    if !f0.domain().lo().is_zero() || f1.domain().lo() != &q || !f1.domain().hi().is_one() || !(q > int(0) && q < int(1)) {
        return Err(Error::ShapeViolation("domains must be [0, q] and [q, 1] with 0 < q < 1".into()));
    }
    if f0.orientation() < 0 || f1.orientation() < 0 {
        return Err(Error::ShapeViolation("both branches must be increasing".into()));
    }
    let unit = ClosedInterval::new(int(0), int(1))?;
    if !f0.image().is_subset_of(&unit) || !f1.image().is_subset_of(&unit) {
        return Err(Error::ShapeViolation("branch images must lie in [0, 1]".into()));
    }
    Ok(q)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Itinerary {
    /// Symbols 0..=n.
    pub symbols: Vec<u8>,
    /// (preperiod, period) when the orbit of q repeats within the search.
    pub period: Option<(usize, usize)>,
}

impl Itinerary {
    /// Symbol i, read from the periodic tail past the stored prefix.
    pub fn symbol(&self, i: usize) -> u8 {
        match self.period {
            Some((k, p)) if i >= k => self.symbols[k + (i - k) % p],
            _ => self.symbols[i],
        }
    }

    /// Σ symbol_i t^i truncated at t^cap.
    pub fn series(&self, cap: usize) -> TruncatedSeries {
        let c: Vec<Rational> = (0..=cap).map(|i| int(self.symbol(i) as i64)).collect();
        TruncatedSeries::from_coeffs(cap, &c)
    }

    /// Numerator and denominator polynomials of Σ symbol_i t^i when periodic.
    fn rational_form(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let (k, p) = self.period?;
        // A(t)(1 - t^p) + t^k B(t) over 1 - t^p
        let mut num = vec![0i64; k + p + 1];
        for i in 0..k {
            num[i] += self.symbols[i] as i64;
            num[i + p] -= self.symbols[i] as i64;
        }
        for j in 0..p {
            num[k + j] += self.symbols[k + j] as i64;
        }
        let mut den = vec![0i64; p + 1];
        den[0] = 1;
        den[p] = -1;
        Some((num, den))
    }
}

fn itinerary(spec: &SystemSpec, q: &Rational, first: u8, tie: u8, n: usize) -> Itinerary {
    let mut symbols = vec![first];
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let mut z = spec.branch(first as usize).apply(q);
    let limit = n.max(PERIOD_SEARCH);
    let mut period = None;
    for i in 1..=limit {
        if let Some(&j) = seen.get(&z) {
            period = Some((j, i - j));
            break;
        }
        seen.insert(z.clone(), i);
        let a = match z.cmp(q) {
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => tie,
            std::cmp::Ordering::Greater => 1,
        };
        symbols.push(a);
        z = spec.branch(a as usize).apply(&z);
    }
    if period.is_none() {
        symbols.truncate(n + 1);
    }
    Itinerary { symbols, period }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapItineraries {
    pub q: Rational,
    pub alpha: Itinerary,
    pub beta: Itinerary,
}

/// α and β to at least index n; ties at q send α to 0 and β to 1.
pub fn overlap_itineraries(spec: &SystemSpec, n: usize) -> Result<OverlapItineraries> {
    let q = overlap_shape(spec)?;
    let alpha = itinerary(spec, &q, 0, 0, n);
    let beta = itinerary(spec, &q, 1, 1, n);
    Ok(OverlapItineraries { q, alpha, beta })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapModel {
    /// Smallest root of Σ(α_i - β_i)t^i in (0, 1).
    pub r: Rational,
    /// The root was taken from the closed form of periodic itineraries.
    pub exact: bool,
    /// Root of the series truncated at t^n.
    pub r_truncated: Rational,
    /// Truncated roots at n - 1 and n agree within tol.
    pub stable: bool,
    pub s: Rational,
    pub p: Rational,
    /// Bound on |p - p_n| for the truncated sum.
    pub p_tail_bound: Rational,
    /// U_0(x) = s x on [0, p], U_1(x) = s(x - 1) + 1 on [p, 1], when f_0(0) = 0 and f_1(1) = 1.
    pub model: Option<[(ClosedInterval, Rational, Rational); 2]>,
}

fn poly_from(coeffs: &[i64]) -> TruncatedSeries {
    TruncatedSeries::from_ints(coeffs.len().saturating_sub(1), coeffs)
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn truncated_root(it: &OverlapItineraries, n: usize, tol: &Rational) -> Result<Option<Rational>> {
    let d = &it.alpha.series(n) - &it.beta.series(n);
    if d.is_zero() {
        return Ok(None);
    }
    smallest_root_in_unit_interval(&d, &crate::numeric::rat(ROOT_FLOOR.0, ROOT_FLOOR.1), &int(1), tol)
}

/// Entropy root, p and the affine model from the critical itineraries.
pub fn overlap_entropy_model(spec: &SystemSpec, it: &OverlapItineraries, n: usize, tol: &Rational) -> Result<OverlapModel> {
    if n < 2 {
        return Err(Error::Precondition("truncation n must be at least 2".into()));
    }
    let r_truncated = truncated_root(it, n, tol)?
        .ok_or_else(|| Error::NotFound(format!("Σ(α_i - β_i)t^i has no root in (0, 1) at n = {n}")))?;
    let prev = truncated_root(it, n - 1, tol)?;
    let stable = prev.is_some_and(|r| (r - &r_truncated).abs() <= *tol);
    let closed = match (it.alpha.rational_form(), it.beta.rational_form()) {
        (Some((na, da)), Some((nb, db))) => {
            let poly: Vec<i64> = {
                let x = poly_mul(&na, &db);
                let y = poly_mul(&nb, &da);
                let len = x.len().max(y.len());
                (0..len).map(|i| x.get(i).unwrap_or(&0) - y.get(i).unwrap_or(&0)).collect()
            };
            let p = poly_from(&poly);
            // the factor (1 - t) in the common denominator makes t = 1 a root; stop short of it
            let hi = &int(1) - &crate::numeric::rat(1, 1 << 20);
            if p.is_zero() {
                None
            } else {
                smallest_root_in_unit_interval(&p, &crate::numeric::rat(ROOT_FLOOR.0, ROOT_FLOOR.1), &hi, tol)?
            }
        }
        _ => None,
    };
    let (r, exact) = match closed {
        Some(r) => (r, true),
        None => (r_truncated.clone(), false),
    };
    let s = r.recip();
    let p_sum = |upto: usize| {
        let mut acc = Rational::zero();
        let mut pw = Rational::one();
        for i in 0..=upto {
            if it.alpha.symbol(i) == 1 {
                acc += &pw;
            }
            pw *= &r;
        }
        acc
    };
    // closed form of Σ α_i r^i when α is periodic
    let alpha_at_r = match it.alpha.rational_form() {
        Some((num, den)) if exact => Some(poly_from(&num).eval(&r) / poly_from(&den).eval(&r)),
        _ => None,
    };
    let one_minus_r = &int(1) - &r;
    let p = match alpha_at_r {
        Some(v) => &one_minus_r * v,
        None => &one_minus_r * p_sum(n),
    };
    let p_tail_bound = num_traits::pow(r.clone(), n + 1);
    let (f0, f1) = (spec.branch(0), spec.branch(1));
    let model = if f0.apply(&int(0)).is_zero() && f1.apply(&int(1)).is_one() {
        Some([
            (ClosedInterval::new(int(0), p.clone())?, s.clone(), int(0)),
            (ClosedInterval::new(p.clone(), int(1))?, s.clone(), &int(1) - &s),
        ])
    } else {
        None
    };
    Ok(OverlapModel { r, exact, r_truncated, stable, s, p, p_tail_bound, model })
}

/// D (1 - t) + N_{2,1}, and N_{2,1} - Σ(α_i - β_i)t^i, both mod t^(cap+1).
pub fn overlap_determinant_check(spec: &SystemSpec, it: &OverlapItineraries, cap: usize, budget: u64) -> Result<(TruncatedSeries, TruncatedSeries)> {
    let km = kneading_matrix(spec, cap, budget)?;
    let d = km.determinant()?;
    let n21 = &km.rows[1][1];
    let one_minus_t = TruncatedSeries::from_ints(cap, &[1, -1]);
    let relation = &(&d * &one_minus_t) + n21;
    let series = &it.alpha.series(cap) - &it.beta.series(cap);
    Ok((relation, n21 - &series))
}

impl std::fmt::Display for OverlapModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "r = {}, s = {}, p = {}", fmt_rational(&self.r), fmt_rational(&self.s), fmt_rational(&self.p))
    }
}
