//! Invariant coordinates, kneading increments, the kneading matrix and
//! determinant, pre-turning counts and the identities tying them together.

use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, rat, series_det, ClosedInterval, Rational, Span, TruncatedSeries, VectorSeries};
use crate::system::{Address, Side, SignedPoint, SystemSpec};
use crate::words::{walk_point, Word};

/// θ(p) truncated at t^cap, in the cell basis P_0..P_{l+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaSeries {
    pub base: SignedPoint,
    pub value: VectorSeries,
}

impl ThetaSeries {
    pub fn cap(&self) -> usize {
        self.value.cap()
    }
}

/// A forward word `word` with `f_word(x) = c_turning`, no shorter prefix
/// sending `x` to a turning point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreTurningRecord {
    pub word: Word,
    pub x: Rational,
    pub turning: usize,
}

fn sides(p: &SignedPoint) -> (bool, bool) {
    match p.side {
        Side::Exact => (true, true),
        Side::Plus => (true, false),
        Side::Minus => (false, true),
    }
}

/// Adds σ·D(v) at degree k. For an exact point a turning point contributes
/// the half-sum of its two neighbouring cells.
fn add_address(acc: &mut VectorSeries, spec: &SystemSpec, v: &SignedPoint, sigma: i32, k: usize) {
    let s = Rational::from_integer(sigma.into());
    match spec.address(v) {
        Address::Cell(j) => acc.add_term(j, k, &s),
        Address::Turning(i) => {
            let h = s * rat(1, 2);
            acc.add_term(i - 1, k, &h);
            acc.add_term(i, k, &h);
        }
    }
}

fn theta_impl(spec: &SystemSpec, p: &SignedPoint, cap: usize, budget: u64, hits: Option<&mut Option<PreTurningRecord>>) -> Result<ThetaSeries> {
    let (plus, minus) = sides(p);
    let mut acc = VectorSeries::zero(spec.n_cells(), cap);
    let mut first_hit: Option<PreTurningRecord> = None;
    walk_point(spec, &p.value, plus, minus, cap, budget, |k, level| {
        for n in level {
            let side = match p.side {
                Side::Exact => Side::Exact,
                s => s.flip(n.sigma),
            };
            let v = SignedPoint::new(n.value.clone(), side);
            add_address(&mut acc, spec, &v, n.sigma, k);
            if first_hit.is_none() {
                if let Some(i) = spec.turning_index(&n.value) {
                    first_hit = Some(PreTurningRecord { word: Word::forward(&n.letters), x: p.value.clone(), turning: i });
                }
            }
        }
        Ok(())
    })?;
    if let Some(h) = hits {
        *h = first_hit;
    }
    Ok(ThetaSeries { base: p.clone(), value: acc })
}

/// θ(p) = Σ σ(f_g) D(f_g(p)) t^|g| over forward words followed by p.
pub fn theta(spec: &SystemSpec, p: &SignedPoint, cap: usize, budget: u64) -> Result<ThetaSeries> {
    theta_impl(spec, p, cap, budget, None)
}

/// Σ_j θ_j(p) e_j(t) - 1 truncated at t^cap; valid for any one-sided point.
pub fn ld_residual(spec: &SystemSpec, p: &SignedPoint, cap: usize, budget: u64) -> Result<TruncatedSeries> {
    let th = theta(spec, p, cap, budget)?;
    Ok(&contract_with_e(spec, &th.value) - &TruncatedSeries::one(cap))
}

fn contract_with_e(spec: &SystemSpec, v: &VectorSeries) -> TruncatedSeries {
    let e = spec.e_polys(v.cap());
    let mut sum = TruncatedSeries::zero(v.cap());
    for (c, ej) in v.cells().iter().zip(&e) {
        sum = &sum + &(c * ej);
    }
    sum
}

/// Residual of Σ_j θ_j(x) e_j(t) = 1 for a point that is not pre-turning
/// to depth `cap`.
pub fn verify_ld_identity(spec: &SystemSpec, x: &Rational, cap: usize, budget: u64) -> Result<TruncatedSeries> {
    let mut hit = None;
    let th = theta_impl(spec, &SignedPoint::exact(x.clone()), cap, budget, Some(&mut hit))?;
    if let Some(h) = hit {
        return Err(Error::Precondition(format!(
            "({}, {}) is pre-turning for c{}",
            h.word,
            fmt_rational(&h.x),
            h.turning
        )));
    }
    Ok(&contract_with_e(spec, &th.value) - &TruncatedSeries::one(cap))
}

/// Pre-turning pairs (g, x) with x in J and |g| <= m.
#[derive(Clone, Debug)]
pub struct PreTurning {
    pub records: Vec<PreTurningRecord>,
    /// counts[i - 1][k] = γ_{i,k}(J)
    pub counts: Vec<Vec<u64>>,
}

impl PreTurning {
    /// γ_i(J) as a series truncated at t^cap (cap <= m).
    pub fn gamma(&self, i: usize, cap: usize) -> TruncatedSeries {
        let c: Vec<Rational> = self.counts[i - 1].iter().take(cap + 1).map(|&n| Rational::from_integer(n.into())).collect();
        TruncatedSeries::from_coeffs(cap, &c)
    }
}

/// Walks the preimage tree of each turning point level by level. A preimage
/// that is itself a turning point ends its branch: every longer word through
/// it hits a turning point early.
#[allow(clippy::needless_range_loop)]
pub fn pre_turning_pairs(spec: &SystemSpec, j: &Span, m: usize, budget: u64) -> Result<PreTurning> {
    let nt = spec.n_turning();
    let mut counts = vec![vec![0u64; m + 1]; nt];
    let mut records = Vec::new();
    // (value, letters applied from value to the turning point, turning index)
    let mut frontier: Vec<(Rational, Vec<usize>, usize)> = Vec::new();
    for (k, c) in spec.turning_points().iter().enumerate() {
        if j.contains(c) {
            counts[k][0] += 1;
            records.push(PreTurningRecord { word: Word::empty(), x: c.clone(), turning: k + 1 });
        }
        frontier.push((c.clone(), Vec::new(), k));
    }
    let mut visited = 0u64;
    for d in 1..=m {
        let mut next = Vec::new();
        for (v, letters, k) in &frontier {
            for (b, br) in spec.branches().iter().enumerate() {
                if br.is_degenerate() || !br.image().contains(v) {
                    continue;
                }
                let x = br.unapply(v);
                if spec.turning_index(&x).is_some() {
                    continue;
                }
                let mut word = Vec::with_capacity(letters.len() + 1);
                word.push(b);
                word.extend_from_slice(letters);
                if j.contains(&x) {
                    counts[*k][d] += 1;
                    records.push(PreTurningRecord { word: Word::forward(&word), x: x.clone(), turning: k + 1 });
                }
                next.push((x, word, *k));
            }
        }
        visited += next.len() as u64;
        if visited > budget {
            return Err(Error::BudgetExceeded { budget, completed_levels: d - 1 });
        }
        frontier = next;
    }
    records.sort_by(|a, b| {
        let key = |r: &PreTurningRecord| (r.word.len(), r.word.letters().iter().map(|l| l.branch).collect::<Vec<_>>(), r.turning);
        key(a).cmp(&key(b))
    });
    Ok(PreTurning { records, counts })
}

/// ϑ_i = θ(c_i+) - θ(c_i-) for i = 1..=l+1.
pub fn kneading_increments(spec: &SystemSpec, cap: usize, budget: u64) -> Result<Vec<VectorSeries>> {
    spec.turning_points()
        .iter()
        .map(|c| {
            let plus = theta(spec, &SignedPoint::new(c.clone(), Side::Plus), cap, budget)?;
            let minus = theta(spec, &SignedPoint::new(c.clone(), Side::Minus), cap, budget)?;
            plus.value.checked_sub(&minus.value)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KneadingMatrix {
    pub cap: usize,
    /// rows[i - 1][j] = N_{i,j}
    pub rows: Vec<Vec<TruncatedSeries>>,
    pub e: Vec<TruncatedSeries>,
}

impl KneadingMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.e.len()
    }

    /// D_i: determinant with column i removed.
    pub fn minor(&self, i: usize) -> Result<TruncatedSeries> {
        let m: Vec<Vec<TruncatedSeries>> = self
            .rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, s)| s.clone()).collect())
            .collect();
        series_det(&m)
    }

    /// (-1)^i D_i / e_i.
    pub fn determinant_from_column(&self, i: usize) -> Result<TruncatedSeries> {
        if i >= self.n_cols() {
            return Err(Error::Precondition(format!("column {i} out of range 0..{}", self.n_cols())));
        }
        let di = self.minor(i)?;
        let signed = if i.is_multiple_of(2) { di } else { -&di };
        Ok(&signed * &self.e[i].inverse()?)
    }

    /// The kneading determinant, computed from every column and checked for agreement.
    pub fn determinant(&self) -> Result<TruncatedSeries> {
        let first = self.determinant_from_column(0)?;
        for i in 1..self.n_cols() {
            if self.determinant_from_column(i)? != first {
                return Err(Error::ColumnDependence { first: 0, second: i });
            }
        }
        Ok(first)
    }
}

pub fn kneading_matrix(spec: &SystemSpec, cap: usize, budget: u64) -> Result<KneadingMatrix> {
    let rows = kneading_increments(spec, cap, budget)?
        .into_iter()
        .map(|v| v.cells().to_vec())
        .collect();
    Ok(KneadingMatrix { cap, rows, e: spec.e_polys(cap) })
}

pub fn kneading_determinant(spec: &SystemSpec, cap: usize, delete_column: Option<usize>, budget: u64) -> Result<TruncatedSeries> {
    let km = kneading_matrix(spec, cap, budget)?;
    match delete_column {
        Some(i) => km.determinant_from_column(i),
        None => km.determinant(),
    }
}

/// Σ_j e_j Γ_j, one entry per row.
pub fn verify_column_relation(km: &KneadingMatrix) -> VectorSeries {
    let cells = km
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&km.e)
                .fold(TruncatedSeries::zero(km.cap), |acc, (n, e)| &acc + &(n * e))
        })
        .collect();
    VectorSeries::from_cells(cells).expect("caps agree")
}

/// θ(b+) - θ(a-) - Σ_i ϑ_i γ_i([a, b]) truncated at t^cap.
pub fn verify_increment_jump(spec: &SystemSpec, j: &ClosedInterval, cap: usize, budget: u64) -> Result<VectorSeries> {
    if !j.has_interior() {
        return Err(Error::Precondition("jump identity needs a < b".into()));
    }
    let right = theta(spec, &SignedPoint::new(j.hi().clone(), Side::Plus), cap, budget)?;
    let left = theta(spec, &SignedPoint::new(j.lo().clone(), Side::Minus), cap, budget)?;
    let mut residual = right.value.checked_sub(&left.value)?;
    let incs = kneading_increments(spec, cap, budget)?;
    let pt = pre_turning_pairs(spec, &Span::Segment(j.clone()), cap, budget)?;
    for (k, inc) in incs.iter().enumerate() {
        let g = pt.gamma(k + 1, cap);
        if g.is_zero() {
            continue;
        }
        residual = residual.checked_sub(&inc.mul_series(&g)?)?;
    }
    Ok(residual)
}

/// Smallest power of t at which θ of the two points differs, if any.
pub fn theta_agreement(a: &ThetaSeries, b: &ThetaSeries) -> Option<usize> {
    (0..=a.cap().min(b.cap())).find(|&k| a.value.cells().iter().zip(b.value.cells()).any(|(x, y)| x.coeff(k) != y.coeff(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;
    use crate::system::affine_system;
    use crate::words::DEFAULT_BUDGET;

    fn two_three() -> SystemSpec {
        affine_system(&[(int(-1), int(1), int(2), int(0)), (int(-1), int(1), int(3), int(0))]).unwrap()
    }

    fn identity() -> SystemSpec {
        affine_system(&[(int(0), int(1), int(1), int(0))]).unwrap()
    }

    fn tent() -> SystemSpec {
        affine_system(&[(int(0), rat(1, 2), int(2), int(0)), (rat(1, 2), int(1), int(-2), int(2))]).unwrap()
    }

    fn s(cap: usize, c: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_ints(cap, c)
    }

    #[test]
    fn blind_past_matrix_and_determinant() {
        for cap in [0, 1, 2, 6] {
            let km = kneading_matrix(&two_three(), cap, DEFAULT_BUDGET).unwrap();
            let want = vec![
                vec![s(cap, &[-1, 2]), s(cap, &[1]), s(cap, &[0])],
                vec![s(cap, &[0]), s(cap, &[-1]), s(cap, &[1, -2])],
            ];
            assert_eq!(km.rows, want, "cap {cap}");
            assert_eq!(km.determinant().unwrap(), s(cap, &[1, -2]));
            assert!(verify_column_relation(&km).is_zero());
        }
    }

    #[test]
    fn identity_theta_and_determinant() {
        let sp = identity();
        let cap = 6;
        let geo = TruncatedSeries::geometric(cap, &int(1));
        let p = theta(&sp, &SignedPoint::new(int(0), Side::Plus), cap, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.value.cell(1), &geo);
        assert!(p.value.cell(0).is_zero() && p.value.cell(2).is_zero());
        let m = theta(&sp, &SignedPoint::new(int(0), Side::Minus), cap, DEFAULT_BUDGET).unwrap();
        assert_eq!(m.value.cell(0), &TruncatedSeries::one(cap));
        let km = kneading_matrix(&sp, cap, DEFAULT_BUDGET).unwrap();
        assert_eq!(km.rows[0], vec![s(cap, &[-1]), geo.clone(), s(cap, &[0])]);
        assert_eq!(km.rows[1], vec![s(cap, &[0]), -&geo, s(cap, &[1])]);
        assert_eq!(km.determinant().unwrap(), geo);
    }

    #[test]
    fn ld_identity() {
        assert!(verify_ld_identity(&two_three(), &rat(1, 5), 8, DEFAULT_BUDGET).unwrap().is_zero());
        assert!(verify_ld_identity(&tent(), &rat(1, 5), 10, DEFAULT_BUDGET).unwrap().is_zero());
        assert!(verify_ld_identity(&tent(), &rat(1, 3), 0, DEFAULT_BUDGET).unwrap().is_zero());
        let err = verify_ld_identity(&tent(), &rat(1, 4), 5, DEFAULT_BUDGET).unwrap_err();
        assert_eq!(err, Error::Precondition("(a1, 1/4) is pre-turning for c2".into()));
    }

    #[test]
    fn tent_gamma_counts() {
        let pt = pre_turning_pairs(&tent(), &Span::Line, 8, DEFAULT_BUDGET).unwrap();
        for k in 0..=8 {
            assert_eq!(pt.counts[1][k], 1 << k);
        }
        assert_eq!(pt.counts[0], [1, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(pt.counts[2], [1, 0, 0, 0, 0, 0, 0, 0, 0]);
        let far = ClosedInterval::new(int(5), int(6)).unwrap();
        let pt = pre_turning_pairs(&tent(), &Span::Segment(far), 6, DEFAULT_BUDGET).unwrap();
        assert!(pt.counts.iter().flatten().all(|&c| c == 0));
    }

    #[test]
    fn jump_identity() {
        let j = ClosedInterval::new(int(0), int(1)).unwrap();
        assert!(verify_increment_jump(&tent(), &j, 8, DEFAULT_BUDGET).unwrap().is_zero());
        let j = ClosedInterval::new(int(-1), int(1)).unwrap();
        assert!(verify_increment_jump(&two_three(), &j, 6, DEFAULT_BUDGET).unwrap().is_zero());
        let j = ClosedInterval::new(rat(1, 5), rat(2, 9)).unwrap();
        assert!(verify_increment_jump(&tent(), &j, 3, DEFAULT_BUDGET).unwrap().is_zero());
    }

    #[test]
    fn theta_monotone_samples() {
        let sp = tent();
        let xs = [rat(0, 1), rat(1, 7), rat(1, 4), rat(1, 3), rat(1, 2), rat(3, 5), rat(1, 1)];
        for w in xs.windows(2) {
            let a = theta(&sp, &SignedPoint::exact(w[0].clone()), 8, DEFAULT_BUDGET).unwrap();
            let b = theta(&sp, &SignedPoint::exact(w[1].clone()), 8, DEFAULT_BUDGET).unwrap();
            assert!(a.value.cmp_lex(&b.value).is_le());
        }
    }
}
