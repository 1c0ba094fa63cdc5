//! Lap-count growth, boundary counts, determinant-root entropy and the
//! counting identities behind them.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::kneading::{kneading_determinant, pre_turning_pairs};
use crate::numeric::{from_f64, int, rat, smallest_root_in_unit_interval, to_f64, ClosedInterval, Rational, Span, TruncatedSeries};
use crate::system::SystemSpec;
use crate::words::{admissible_nodes, lap_counts, visit_admissible_levels, walk_point, word_domain, Word};

/// Lowest root searched for; systems with s above 1000 are out of scope.
const ROOT_FLOOR: f64 = 1e-3;
/// Margin below log s for the point-growth heuristic.
const A_MARGIN: f64 = 0.1;

/// ℓ'_{c_i}(k) for k = 1..=m, one vector per turning point.
pub fn boundary_counts(spec: &SystemSpec, m: usize, budget: u64) -> Result<Vec<Vec<u64>>> {
    spec.turning_points()
        .iter()
        .map(|c| {
            let mut counts = vec![0u64; m];
            walk_point(spec, c, true, true, m, budget, |k, level| {
                if k > 0 {
                    counts[k - 1] = level.iter().filter(|n| n.plus != n.minus).count() as u64;
                }
                Ok(())
            })?;
            Ok(counts)
        })
        .collect()
}

/// Words of S̊'_{c_i} of each length 1..=m.
fn boundary_words(spec: &SystemSpec, c: &Rational, m: usize, budget: u64) -> Result<Vec<Vec<Word>>> {
    let mut out = vec![Vec::new(); m];
    walk_point(spec, c, true, true, m, budget, |k, level| {
        if k > 0 {
            out[k - 1] = level.iter().filter(|n| n.plus != n.minus).map(|n| Word::forward(&n.letters)).collect();
        }
        Ok(())
    })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointGrowth {
    /// ℓ_x(k) for k = 1..=m
    pub counts: Vec<u64>,
    pub tail_slope: f64,
    /// Heuristic membership in the set of slowly growing points.
    pub in_a_hat: bool,
}

/// ℓ_x(k): words whose domain has x in its interior.
pub fn point_growth(spec: &SystemSpec, x: &Rational, m: usize, s_hat: f64, budget: u64) -> Result<PointGrowth> {
    let mut counts = vec![0u64; m];
    walk_point(spec, x, true, true, m, budget, |k, level| {
        if k > 0 {
            counts[k - 1] = level.iter().filter(|n| n.plus && n.minus).count() as u64;
        }
        Ok(())
    })?;
    let tail_slope = tail_rate(&counts).ln();
    let in_a_hat = tail_slope < s_hat.max(f64::MIN_POSITIVE).ln() - A_MARGIN;
    Ok(PointGrowth { counts, tail_slope, in_a_hat })
}

fn tail_window(m: usize) -> usize {
    m.div_ceil(4).max(1)
}

/// Geometric mean of the last ⌈m/4⌉ growth ratios; 0 when the tail vanishes.
pub fn tail_rate(counts: &[u64]) -> f64 {
    let m = counts.len();
    if m == 0 {
        return 0.0;
    }
    let q = tail_window(m).min(m - 1);
    let last = counts[m - 1] as f64;
    if last == 0.0 {
        return 0.0;
    }
    if q == 0 {
        return last;
    }
    let prev = counts[m - 1 - q] as f64;
    if prev == 0.0 {
        return last.powf(1.0 / m as f64);
    }
    (last / prev).powf(1.0 / q as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RootStatus {
    Found { root: Rational },
    NotApplicable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub depth: usize,
    pub cap: usize,
    /// ℓ(k) for k = 1..=m
    pub counts: Vec<u64>,
    pub s_hat: f64,
    pub s_nth_root: f64,
    pub s_last_ratio: f64,
    /// ℓ'_{c_i}(k), one vector per turning point.
    pub boundary: Vec<Vec<u64>>,
    pub s0_hat: f64,
    pub entropy_lap: f64,
    pub root: RootStatus,
    pub entropy_root: Option<f64>,
    pub discrepancy: Option<f64>,
    pub determinant: TruncatedSeries,
    pub warnings: Vec<String>,
}

impl GrowthReport {
    /// The preferred entropy: root-based when available.
    pub fn entropy(&self) -> f64 {
        self.entropy_root.unwrap_or(self.entropy_lap)
    }
}

/// Lap-count and determinant-root entropy side by side.
pub fn entropy_report(spec: &SystemSpec, m: usize, cap: usize, tol: &Rational, budget: u64) -> Result<GrowthReport> {
    if m < 2 {
        return Err(Error::Precondition("entropy needs depth m >= 2".into()));
    }
    let counts = lap_counts(spec, &Span::Line, m, budget)?;
    let last = counts[m - 1] as f64;
    let s_hat = tail_rate(&counts);
    let s_nth_root = last.powf(1.0 / m as f64);
    let s_last_ratio = if counts[m - 2] > 0 { last / counts[m - 2] as f64 } else { 0.0 };
    let boundary = boundary_counts(spec, m, budget)?;
    // the limsup of ℓ'^(1/m) directly; ratios of bounded counts are too noisy
    let s0_hat = boundary
        .iter()
        .map(|b| (b[m - 1] as f64).powf(1.0 / m as f64))
        .fold(0.0, f64::max);
    let entropy_lap = if s_hat > 1.0 { s_hat.ln() } else { 0.0 };
    let determinant = kneading_determinant(spec, cap, None, budget)?;
    let mut warnings = Vec::new();
    let gate = s_hat > 1.0 && s0_hat <= s_hat * (1.0 - 1.0 / m as f64);
    let root = if !gate {
        RootStatus::NotApplicable(format!("s0_hat = {s0_hat:.6} is not below s_hat = {s_hat:.6}"))
    } else {
        let hi = if s0_hat > 1.0 { from_f64(1.0 / s0_hat) } else { int(1) };
        match smallest_root_in_unit_interval(&determinant, &from_f64(ROOT_FLOOR), &hi, tol)? {
            Some(r) => RootStatus::Found { root: r },
            None => {
                return Err(Error::Inconsistency(format!(
                    "kneading determinant {} has no root below {:.6} although s_hat = {s_hat:.6}",
                    determinant.to_poly_string(Some(6)),
                    to_f64(&hi)
                )));
            }
        }
    };
    let entropy_root = match &root {
        RootStatus::Found { root } => Some(-to_f64(root).ln()),
        RootStatus::NotApplicable(_) => None,
    };
    if let RootStatus::Found { root } = &root {
        if to_f64(root) < 0.9 / s_hat {
            warnings.push(format!("determinant root {:.6} lies well below 1/s_hat = {:.6}", to_f64(root), 1.0 / s_hat));
        }
    }
    let discrepancy = entropy_root.map(|h| (h - entropy_lap).abs());
    Ok(GrowthReport {
        depth: m,
        cap,
        counts,
        s_hat,
        s_nth_root,
        s_last_ratio,
        boundary,
        s0_hat,
        entropy_lap,
        root,
        entropy_root,
        discrepancy,
        determinant,
        warnings,
    })
}

/// #𝔐_k - (ℓ(1) + ... + ℓ(k) + 1) for k = 1..=m, with cylinders counted
/// as strings over the letters and an end marker.
pub fn cylinder_identity_check(spec: &SystemSpec, m: usize, budget: u64) -> Result<Vec<i64>> {
    let laps = lap_counts(spec, &Span::Line, m, budget)?;
    // strings of length k ending in markers correspond to admissible words
    // of length j <= k followed by k - j markers
    let mut admissible_by_len = vec![0i64; m + 1];
    admissible_by_len[0] = 1;
    let mut stack: Vec<Word> = vec![Word::empty()];
    let mut used = 0u64;
    while let Some(w) = stack.pop() {
        if w.len() == m {
            continue;
        }
        for i in 0..spec.n_branches() {
            let w2 = w.pushed(crate::words::Letter::forward(i));
            if word_domain(spec, &w2)?.has_interior {
                admissible_by_len[w2.len()] += 1;
                stack.push(w2);
                used += 1;
                if used > budget {
                    return Err(Error::BudgetExceeded { budget, completed_levels: 0 });
                }
            }
        }
    }
    let mut out = Vec::with_capacity(m);
    for k in 1..=m {
        let cylinders: i64 = admissible_by_len[..=k].iter().sum();
        let formula: i64 = laps[..k].iter().map(|&c| c as i64).sum::<i64>() + 1;
        out.push(cylinders - formula);
    }
    Ok(out)
}

/// ℓ(k+1|J) - Σ_i ℓ(k|f_i(J)) for k = 0..m-1.
pub fn l_recursion_check(spec: &SystemSpec, j: &ClosedInterval, m: usize, budget: u64) -> Result<Vec<i64>> {
    // left side from pulled-back domains
    let mut left = vec![0i64; m];
    visit_admissible_levels(spec, m, budget, |depth, level| {
        left[depth - 1] = level.iter().filter(|n| n.domain.overlaps(j)).count() as i64;
        Ok(())
    })?;
    // right side from forward images of J
    let mut right = vec![0i64; m];
    for b in spec.branches() {
        let Some(k) = j.intersect(b.domain()).filter(ClosedInterval::has_interior) else { continue };
        let img = b.map_interval(&k);
        right[0] += 1;
        if m > 1 {
            for (r, c) in right[1..].iter_mut().zip(lap_counts(spec, &Span::Segment(img), m - 1, budget)?) {
                *r += c as i64;
            }
        }
    }
    Ok(left.iter().zip(&right).map(|(a, b)| a - b).collect())
}

/// L - ½ Σ L'_{c_i} γ_i with all series taken mod t^cap (cap >= 1).
#[allow(non_snake_case)]
pub fn L_gamma_identity_check(spec: &SystemSpec, cap: usize, budget: u64) -> Result<TruncatedSeries> {
    if cap == 0 {
        return Err(Error::Precondition("identity needs cap >= 1".into()));
    }
    let top = cap - 1;
    let laps = lap_counts(spec, &Span::Line, cap, budget)?;
    let boundary = boundary_counts(spec, cap, budget)?;
    let pt = pre_turning_pairs(spec, &Span::Line, top, budget)?;
    let series = |c: &[u64]| {
        let v: Vec<Rational> = c.iter().map(|&n| int(n as i64)).collect();
        TruncatedSeries::from_coeffs(top, &v)
    };
    let l = series(&laps);
    let mut rhs = TruncatedSeries::zero(top);
    for (i, b) in boundary.iter().enumerate() {
        rhs = &rhs + &(&series(b) * &pt.gamma(i + 1, top));
    }
    Ok(&l - &rhs.scale(&rat(1, 2)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriCheck {
    pub triples: u64,
    pub boundary_pairs: u64,
    /// Triples whose image is not a boundary pair.
    pub outside: u64,
    /// Boundary pairs hit by more than one triple.
    pub collisions: u64,
}

impl TriCheck {
    pub fn residual(&self) -> u64 {
        self.triples.abs_diff(self.boundary_pairs) + self.outside + self.collisions
    }
}

/// Checks the bijection (h, c_i, g) -> (h^-1 g, f_h(c_i)) between Tri(m)
/// and boundary points of length-m domains.
pub fn tri_bijection_check(spec: &SystemSpec, m: usize, budget: u64) -> Result<TriCheck> {
    if m == 0 {
        return Err(Error::Precondition("Tri(m) needs m >= 1".into()));
    }
    let levels = admissible_nodes(spec, m, budget)?;
    let mut targets: HashSet<(Word, Rational)> = HashSet::new();
    for n in &levels[m - 1] {
        let w = Word::forward(&n.letters);
        targets.insert((w.clone(), n.domain.lo().clone()));
        targets.insert((w, n.domain.hi().clone()));
    }
    let pt = pre_turning_pairs(spec, &Span::Line, m - 1, budget)?;
    let bwords: Vec<Vec<Vec<Word>>> = spec
        .turning_points()
        .iter()
        .map(|c| boundary_words(spec, c, m, budget))
        .collect::<Result<_>>()?;
    let mut hit: HashSet<(Word, Rational)> = HashSet::new();
    let (mut triples, mut outside, mut collisions) = (0u64, 0u64, 0u64);
    for rec in &pt.records {
        let k = rec.word.len();
        for g in &bwords[rec.turning - 1][m - k - 1] {
            triples += 1;
            let key = (rec.word.concat(g), rec.x.clone());
            if !targets.contains(&key) {
                outside += 1;
            } else if !hit.insert(key) {
                collisions += 1;
            }
        }
    }
    Ok(TriCheck { triples, boundary_pairs: targets.len() as u64, outside, collisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::affine_system;
    use crate::words::DEFAULT_BUDGET;

    fn two_three() -> SystemSpec {
        affine_system(&[(int(-1), int(1), int(2), int(0)), (int(-1), int(1), int(3), int(0))]).unwrap()
    }

    fn tent() -> SystemSpec {
        affine_system(&[(int(0), rat(1, 2), int(2), int(0)), (rat(1, 2), int(1), int(-2), int(2))]).unwrap()
    }

    fn identity() -> SystemSpec {
        affine_system(&[(int(0), int(1), int(1), int(0))]).unwrap()
    }

    #[test]
    fn tent_boundary_counts() {
        let b = boundary_counts(&tent(), 6, DEFAULT_BUDGET).unwrap();
        assert_eq!(b[0], [1; 6]);
        assert_eq!(b[1], [2; 6]);
        assert_eq!(b[2], [1; 6]);
        let b = boundary_counts(&identity(), 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(b, vec![vec![1; 4], vec![1; 4]]);
    }

    #[test]
    fn reports() {
        let tol = rat(1, 1_000_000_000);
        let r = entropy_report(&two_three(), 12, 8, &tol, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.root, RootStatus::Found { root: rat(1, 2) });
        assert!((r.entropy_lap - 2f64.ln()).abs() < 1e-12);
        // D = (1 - 2t)/(1 - t); its truncation has a root within 2^-cap of 1/2
        let r = entropy_report(&tent(), 12, 10, &tol, DEFAULT_BUDGET).unwrap();
        let RootStatus::Found { root } = &r.root else { panic!("no root") };
        assert!((to_f64(root) - 0.5).abs() < 1e-3);
        assert_eq!(r.determinant.coeff(3), &int(-1));
        let r = entropy_report(&identity(), 8, 8, &tol, DEFAULT_BUDGET).unwrap();
        assert!(matches!(r.root, RootStatus::NotApplicable(_)));
        assert_eq!(r.entropy(), 0.0);
    }

    #[test]
    fn point_growth_examples() {
        let g = point_growth(&two_three(), &int(0), 8, 2.0, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.counts, (1..=8).map(|k| 1u64 << k).collect::<Vec<_>>());
        assert!(!g.in_a_hat);
        let g = point_growth(&tent(), &rat(1, 5), 8, 2.0, DEFAULT_BUDGET).unwrap();
        assert!(g.counts.iter().all(|&c| c <= 1));
        assert!(g.in_a_hat);
        let g = point_growth(&tent(), &int(7), 8, 2.0, DEFAULT_BUDGET).unwrap();
        assert!(g.counts.iter().all(|&c| c == 0) && g.in_a_hat);
    }

    #[test]
    fn identities() {
        for sp in [two_three(), tent(), identity()] {
            assert!(cylinder_identity_check(&sp, 8, DEFAULT_BUDGET).unwrap().iter().all(|&r| r == 0));
            let j = ClosedInterval::new(int(0), rat(1, 3)).unwrap();
            assert!(l_recursion_check(&sp, &j, 8, DEFAULT_BUDGET).unwrap().iter().all(|&r| r == 0));
            assert!(L_gamma_identity_check(&sp, 8, DEFAULT_BUDGET).unwrap().is_zero());
            for m in 1..=6 {
                assert_eq!(tri_bijection_check(&sp, m, DEFAULT_BUDGET).unwrap().residual(), 0, "m = {m}");
            }
        }
    }
}
