//! Estimates of the self-similar measure Λ on intervals, the profile
//! φ(x) = Λ([c_1, x]) and the constant-slope model built from it.

use num_traits::Zero;

use crate::entropy::{boundary_counts, entropy_report, point_growth, tail_rate, RootStatus};
use crate::error::{Error, Result};
use crate::numeric::{from_f64, int, simplest_between, to_f64, ClosedInterval, Rational, Span};
use crate::system::SystemSpec;
use crate::words::visit_admissible_levels;

pub const ABEL_DELTAS: [f64; 3] = [0.1, 0.05, 0.02];
/// Depth used to test interval endpoints for slow growth.
const ENDPOINT_DEPTH: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub interval: Span,
    /// ℓ(m|J)/ℓ(m)
    pub ratio: Rational,
    pub value: f64,
    /// Spread of the ratio over the last three depths.
    pub bracket: (f64, f64),
    /// Abel-summed L(J)/L near t = 1/s, extrapolated to δ = 0.
    pub abel: f64,
    /// The Abel value falls outside the ratio bracket.
    pub unreliable: bool,
    pub endpoint_warnings: Vec<String>,
}

/// Domain endpoints of every level up to m, indexed for interval counts.
#[derive(Clone, Debug)]
pub struct MeasureContext {
    depth: usize,
    s_hat: f64,
    s0_hat: f64,
    totals: Vec<u64>,
    los: Vec<Vec<Rational>>,
    his: Vec<Vec<Rational>>,
    hull: ClosedInterval,
}

impl MeasureContext {
    /// Builds the index; fails unless the growth gate s0 < s holds.
    pub fn new(spec: &SystemSpec, m: usize, budget: u64) -> Result<Self> {
        if m < 3 {
            return Err(Error::Precondition("measure estimates need depth m >= 3".into()));
        }
        let mut los = Vec::with_capacity(m);
        let mut his = Vec::with_capacity(m);
        let mut totals = Vec::with_capacity(m);
        visit_admissible_levels(spec, m, budget, |_, level| {
            let mut lo: Vec<Rational> = level.iter().map(|n| n.domain.lo().clone()).collect();
            let mut hi: Vec<Rational> = level.iter().map(|n| n.domain.hi().clone()).collect();
            lo.sort();
            hi.sort();
            totals.push(level.len() as u64);
            los.push(lo);
            his.push(hi);
            Ok(())
        })?;
        let s_hat = tail_rate(&totals);
        let s0_hat = boundary_counts(spec, m, budget)?
            .iter()
            .map(|b| (b[m - 1] as f64).powf(1.0 / m as f64))
            .fold(0.0, f64::max);
        if !(s_hat > 1.0 && s0_hat < s_hat) {
            return Err(Error::NotApplicable(format!(
                "measure needs s0 < s with s > 1; got s0_hat = {s0_hat:.6}, s_hat = {s_hat:.6}"
            )));
        }
        Ok(MeasureContext { depth: m, s_hat, s0_hat, totals, los, his, hull: spec.hull() })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn s_hat(&self) -> f64 {
        self.s_hat
    }

    pub fn s0_hat(&self) -> f64 {
        self.s0_hat
    }

    /// ℓ(k|J): level-k domains meeting J in a set with interior.
    pub fn count(&self, k: usize, j: &Span) -> u64 {
        let iv = match j {
            Span::Line => return self.totals[k - 1],
            Span::Empty => return 0,
            Span::Segment(iv) => iv,
        };
        if !iv.has_interior() {
            return 0;
        }
        let lo = &self.los[k - 1];
        let hi = &self.his[k - 1];
        let right = lo.len() - lo.partition_point(|x| x < iv.hi());
        let left = hi.partition_point(|x| x <= iv.lo());
        self.totals[k - 1] - right as u64 - left as u64
    }

    fn ratio_at(&self, k: usize, j: &Span) -> Rational {
        let total = self.totals[k - 1];
        if total == 0 {
            return Rational::zero();
        }
        Rational::new((self.count(k, j) as i64).into(), (total as i64).into())
    }

    fn abel(&self, j: &Span) -> f64 {
        let eval = |t: f64| {
            let (mut num, mut den, mut p) = (0.0, 0.0, 1.0);
            for k in 1..=self.depth {
                num += self.count(k, j) as f64 * p;
                den += self.totals[k - 1] as f64 * p;
                p *= t;
            }
            if den == 0.0 {
                0.0
            } else {
                num / den
            }
        };
        let pts: Vec<(f64, f64)> = ABEL_DELTAS.iter().map(|&d| (d, eval((1.0 - d) / self.s_hat))).collect();
        // least-squares line in δ, read off at δ = 0
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        (my - slope * mx).clamp(0.0, 1.0)
    }

    /// Ratio and Abel estimates of Λ(J), without endpoint tests.
    pub fn estimate(&self, j: &Span) -> MeasureEstimate {
        let m = self.depth;
        let ratio = self.ratio_at(m, j);
        let spread: Vec<f64> = (m - 2..=m).map(|k| to_f64(&self.ratio_at(k, j))).collect();
        let lo = spread.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = spread.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let abel = self.abel(j);
        MeasureEstimate {
            interval: j.clone(),
            value: to_f64(&ratio).clamp(0.0, 1.0),
            ratio,
            bracket: (lo, hi),
            abel,
            unreliable: abel < lo - 1e-12 || abel > hi + 1e-12,
            endpoint_warnings: Vec::new(),
        }
    }

    /// φ(x) = Λ̂([c_1, x]) at depth m, exact.
    pub fn phi(&self, x: &Rational) -> Rational {
        if x <= self.hull.lo() {
            return Rational::zero();
        }
        let j = Span::Segment(ClosedInterval::hull(self.hull.lo().clone(), x.clone()));
        self.ratio_at(self.depth, &j)
    }

    pub fn phi_profile(&self, grid: &[Rational]) -> Vec<(Rational, Rational)> {
        grid.iter().map(|x| (x.clone(), self.phi(x))).collect()
    }

    /// |Λ̂(J) - (1/s) Σ Λ̂(f_i(J))| against the summed brackets.
    pub fn self_similarity(&self, spec: &SystemSpec, j: &ClosedInterval) -> SelfSimilarity {
        let lhs = self.estimate(&Span::Segment(j.clone()));
        let mut rhs = 0.0;
        let mut width = lhs.bracket.1 - lhs.bracket.0;
        for b in spec.branches() {
            let Some(k) = j.intersect(b.domain()) else { continue };
            let img = b.map_interval(&k);
            let e = self.estimate(&Span::Segment(img));
            rhs += e.value / self.s_hat;
            width += (e.bracket.1 - e.bracket.0) / self.s_hat;
        }
        SelfSimilarity { lhs: lhs.value, rhs, residual: (lhs.value - rhs).abs(), bracket: width }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfSimilarity {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub bracket: f64,
}

impl SelfSimilarity {
    pub fn holds(&self) -> bool {
        self.residual <= self.bracket + 1e-12
    }
}

/// Λ̂(J) with the slow-growth test applied to the endpoints of J.
pub fn measure_estimate(spec: &SystemSpec, j: &Span, m: usize, budget: u64) -> Result<MeasureEstimate> {
    let ctx = MeasureContext::new(spec, m, budget)?;
    let mut est = ctx.estimate(j);
    if let Span::Segment(iv) = j {
        let depth = ENDPOINT_DEPTH.min(m);
        for x in [iv.lo(), iv.hi()] {
            let g = point_growth(spec, x, depth, ctx.s_hat, budget)?;
            if !g.in_a_hat {
                est.endpoint_warnings.push(format!(
                    "endpoint {} grows like the whole system; the limit may not exist there",
                    crate::numeric::fmt_rational(x)
                ));
            }
        }
    }
    Ok(est)
}

/// `n` evenly spaced rationals across the hull, endpoints included.
pub fn hull_grid(spec: &SystemSpec, n: usize) -> Vec<Rational> {
    let h = spec.hull();
    if n < 2 {
        return vec![h.lo().clone()];
    }
    let step = h.width() / int(n as i64 - 1);
    (0..n).map(|k| h.lo() + &step * int(k as i64)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelBranch {
    pub domain: ClosedInterval,
    pub slope: Rational,
    pub intercept: Rational,
    /// φ collapses the branch domain to a point.
    pub degenerate: bool,
}

/// Affine branches of slope ±s on [0, 1] semiconjugate to the system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineModel {
    pub s: Rational,
    /// φ(c_i) for every turning point.
    pub breakpoints: Vec<Rational>,
    pub branches: Vec<ModelBranch>,
}

impl AffineModel {
    pub fn eval(&self, i: usize, y: &Rational) -> Rational {
        let b = &self.branches[i];
        &b.slope * y + &b.intercept
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Linearization {
    pub model: AffineModel,
    /// "root" when s comes from the determinant, "lap" otherwise.
    pub s_source: &'static str,
    /// (x, |φ(f_i(x)) - U_i(φ(x))|) for every grid point in Dom(f_i), all branches.
    pub residuals: Vec<(usize, Rational, f64)>,
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

/// Builds the constant-slope model from φ and measures the semiconjugacy defect.
pub fn linearize(spec: &SystemSpec, m: usize, cap: usize, tol: &Rational, grid_points: usize, budget: u64) -> Result<Linearization> {
    let ctx = MeasureContext::new(spec, m, budget)?;
    let report = entropy_report(spec, m, cap, tol, budget)?;
    let mut warnings = report.warnings.clone();
    let (s, s_source) = match &report.root {
        RootStatus::Found { root } => (root.recip(), "root"),
        RootStatus::NotApplicable(why) => {
            warnings.push(format!("slope from lap counts: {why}"));
            let lo = from_f64(report.s_hat - 1e-9);
            (simplest_between(&lo, &from_f64(report.s_hat + 1e-9)), "lap")
        }
    };
    if s <= int(1) {
        return Err(Error::NotApplicable("linearization needs positive entropy".into()));
    }
    let breakpoints: Vec<Rational> = spec.turning_points().iter().map(|c| ctx.phi(c)).collect();
    let mut branches = Vec::new();
    for b in spec.branches() {
        let (lo, hi) = (b.domain().lo(), b.domain().hi());
        let (plo, phi_hi) = (ctx.phi(lo), ctx.phi(hi));
        let slope = &s * int(b.orientation() as i64);
        let anchor = ctx.phi(&b.apply(lo));
        let intercept = &anchor - &slope * &plo;
        branches.push(ModelBranch {
            degenerate: plo == phi_hi,
            domain: ClosedInterval::hull(plo, phi_hi),
            slope,
            intercept,
        });
    }
    let model = AffineModel { s, breakpoints, branches };
    let grid = hull_grid(spec, grid_points);
    let mut residuals = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (i, b) in spec.branches().iter().enumerate() {
        for x in grid.iter().filter(|x| b.domain().contains(x)) {
            let lhs = ctx.phi(&b.apply(x));
            let rhs = model.eval(i, &ctx.phi(x));
            let r = to_f64(&(lhs - rhs)).abs();
            max_residual = max_residual.max(r);
            residuals.push((i, x.clone(), r));
        }
    }
    for (i, mb) in model.branches.iter().enumerate() {
        let (a, z) = (model.eval(i, mb.domain.lo()), model.eval(i, mb.domain.hi()));
        let slack = from_f64(0.05);
        let lo_ok = |v: &Rational| *v >= -slack.clone() && *v <= int(1) + slack.clone();
        if !lo_ok(&a) || !lo_ok(&z) {
            warnings.push(format!("model branch {} leaves [0, 1]", i + 1));
        }
        if mb.degenerate {
            warnings.push(format!("model branch {} is degenerate", i + 1));
        }
    }
    Ok(Linearization { model, s_source, residuals, max_residual, warnings })
}
