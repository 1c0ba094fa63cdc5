use std::fmt::Write as _;

use kneadlab::entropy::{
    cylinder_identity_check, entropy_report, l_recursion_check, tri_bijection_check, L_gamma_identity_check, RootStatus,
};
use kneadlab::itinerary::{check_separability, combinatorial_map, compare_kneading, itinerary as itinerary_tree};
use kneadlab::itinerary::{CombinatorialMap, KneadingComparison};
use kneadlab::kneading::{kneading_matrix, verify_column_relation, verify_increment_jump, verify_ld_identity};
use kneadlab::measure::{hull_grid, linearize as linearize_model, measure_estimate, MeasureContext};
use kneadlab::numeric::{parse_rational, rat};
use kneadlab::overlap::{overlap_determinant_check, overlap_entropy_model, overlap_itineraries};
use kneadlab::{ClosedInterval, Error, Rational, Side, SignedPoint, Span, SystemSpec, TruncatedSeries};
use serde_json::{json, Value};

use crate::report::{Report, Table};
use crate::{input_error, Failure, Run};

type Outcome = Result<Report, Failure>;

fn system_name(spec: &SystemSpec) -> Value {
    spec.name().map_or(Value::Null, Value::from)
}

/// "a x + b" with the sign of b folded into the operator.
fn affine_text(f: &crate::report::Fmt, slope: &Rational, intercept: &Rational, var: &str) -> String {
    use num_traits::{Signed, Zero};
    if intercept.is_zero() {
        return format!("{} {var}", f.q(slope));
    }
    let op = if intercept.is_negative() { "-" } else { "+" };
    format!("{} {var} {op} {}", f.q(slope), f.q(&intercept.abs()))
}

fn series_rows(table: &mut Table, prefix: &[String], s: &TruncatedSeries, run: &Run) {
    for (k, c) in run.fmt.coeffs(s).into_iter().enumerate() {
        let mut row = prefix.to_vec();
        row.push(k.to_string());
        row.push(c);
        table.rows.push(row);
    }
}

pub fn determinant(spec: &SystemSpec, column: Option<usize>, run: &Run) -> Outcome {
    let km = kneading_matrix(spec, run.cap, run.budget)?;
    let d = match column {
        Some(i) => km.determinant_from_column(i)?,
        None => km.determinant()?,
    };
    let doc = json!({
        "system": system_name(spec),
        "cap": run.cap,
        "column": column,
        "determinant": run.fmt.coeffs(&d),
    });
    let mut report = Report::new("determinant", doc, format!("{}\n", run.fmt.poly(&d)));
    let mut t = Table::new("determinant.csv", &["power", "coefficient"]);
    series_rows(&mut t, &[], &d, run);
    report.tables.push(t);
    Ok(report)
}

pub fn matrix(spec: &SystemSpec, run: &Run) -> Outcome {
    let km = kneading_matrix(spec, run.cap, run.budget)?;
    let relation = verify_column_relation(&km);
    let rows: Vec<Vec<String>> = km.rows.iter().map(|r| r.iter().map(|s| run.fmt.poly(s)).collect()).collect();
    let e: Vec<String> = km.e.iter().map(|s| run.fmt.poly(s)).collect();

    let mut labels: Vec<String> = (1..=km.n_rows()).map(|i| format!("c{i}")).collect();
    labels.push("e".into());
    let mut grid = rows.clone();
    grid.push(e.clone());
    let label_w = labels.iter().map(String::len).max().unwrap_or(1);
    let widths: Vec<usize> = (0..km.n_cols())
        .map(|j| grid.iter().map(|r| r[j].len()).max().unwrap_or(0).max(format!("P{j}").len()))
        .collect();
    let mut text = format!("{:label_w$}", "");
    for (j, w) in widths.iter().enumerate() {
        let _ = write!(text, "  {:>w$}", format!("P{j}"));
    }
    text.push('\n');
    for (label, row) in labels.iter().zip(&grid) {
        let _ = write!(text, "{label:label_w$}");
        for (cell, w) in row.iter().zip(&widths) {
            let _ = write!(text, "  {cell:>w$}");
        }
        text.push('\n');
    }
    let ok = relation.is_zero();
    let _ = writeln!(text, "column relation: {}", if ok { "zero" } else { "NONZERO" });

    let doc = json!({
        "system": system_name(spec),
        "cap": run.cap,
        "rows": km.rows.iter().map(|r| r.iter().map(|s| run.fmt.coeffs(s)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "e": km.e.iter().map(|s| run.fmt.coeffs(s)).collect::<Vec<_>>(),
        "column_relation": relation.cells().iter().map(|s| run.fmt.coeffs(s)).collect::<Vec<_>>(),
    });
    let mut report = Report::new("matrix", doc, text);
    let mut t = Table::new("matrix.csv", &["row", "column", "power", "coefficient"]);
    for (i, row) in km.rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            series_rows(&mut t, &[(i + 1).to_string(), j.to_string()], s, run);
        }
    }
    report.tables.push(t);
    if !ok {
        report.failure = Some("column relation sum_j e_j N_ij is not zero".into());
    }
    Ok(report)
}

pub fn entropy(spec: &SystemSpec, run: &Run) -> Outcome {
    let r = entropy_report(spec, run.m, run.cap, &run.tol, run.budget)?;
    let f = &run.fmt;
    let mut text = String::new();
    let _ = writeln!(text, "lap counts: {:?}", r.counts);
    let _ = writeln!(text, "growth rate s_hat: {}", f.f(r.s_hat));
    let _ = writeln!(text, "entropy (laps): {}", f.f(r.entropy_lap));
    match (&r.root, r.entropy_root) {
        (RootStatus::Found { root }, Some(h)) => {
            let _ = writeln!(text, "determinant root: {}", f.q(root));
            let _ = writeln!(text, "entropy (root): {}", f.f(h));
        }
        (RootStatus::NotApplicable(why), _) => {
            let _ = writeln!(text, "determinant root: none ({why})");
        }
        _ => {}
    }
    if let Some(d) = r.discrepancy {
        let _ = writeln!(text, "discrepancy: {}", f.f(d));
    }
    let _ = writeln!(text, "determinant: {}", f.poly(&r.determinant));
    for w in &r.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let root = match &r.root {
        RootStatus::Found { root } => json!({ "found": f.q(root) }),
        RootStatus::NotApplicable(why) => json!({ "not_applicable": why }),
    };
    let doc = json!({
        "system": system_name(spec),
        "depth": r.depth,
        "cap": r.cap,
        "lap_counts": r.counts,
        "boundary_counts": r.boundary,
        "s_hat": r.s_hat,
        "s_nth_root": r.s_nth_root,
        "s_last_ratio": r.s_last_ratio,
        "s0_hat": r.s0_hat,
        "entropy_lap": r.entropy_lap,
        "root": root,
        "entropy_root": r.entropy_root,
        "discrepancy": r.discrepancy,
        "determinant": f.coeffs(&r.determinant),
        "warnings": r.warnings,
    });
    let mut report = Report::new("entropy", doc, text);
    let mut header = vec!["level".to_string(), "laps".to_string()];
    header.extend((1..=r.boundary.len()).map(|i| format!("boundary_c{i}")));
    let mut t = Table { file: "growth.csv", header, rows: Vec::new() };
    for (k, l) in r.counts.iter().enumerate() {
        let mut row = vec![(k + 1).to_string(), l.to_string()];
        row.extend(r.boundary.iter().map(|b| b.get(k).map_or(String::new(), u64::to_string)));
        t.rows.push(row);
    }
    report.tables.push(t);
    Ok(report)
}

fn parse_point(text: &str) -> Result<SignedPoint, Failure> {
    let t = text.trim();
    let (body, side) = if let Some(b) = t.strip_suffix('+') {
        (b, Side::Plus)
    } else if let Some(b) = t.strip_suffix('-').filter(|b| !b.is_empty()) {
        (b, Side::Minus)
    } else {
        (t, Side::Exact)
    };
    let value = parse_rational(body).map_err(|e| input_error(format!("--point: {e}")))?;
    Ok(SignedPoint::new(value, side))
}

pub fn itinerary(spec: &SystemSpec, points: &[String], run: &Run) -> Outcome {
    let targets: Vec<(String, SignedPoint)> = if points.is_empty() {
        spec.turning_points()
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("c{}", i + 1), SignedPoint::exact(c.clone())))
            .collect()
    } else {
        points.iter().map(|p| parse_point(p).map(|sp| (sp.to_string(), sp))).collect::<Result<_, _>>()?
    };
    let mut text = String::new();
    let mut docs = Vec::new();
    let mut t = Table::new("itinerary.csv", &["point", "value", "word", "address"]);
    for (label, p) in &targets {
        if !spec.hull().contains(&p.value) {
            return Err(Error::OutsideDomain {
                x: p.to_string(),
                lo: spec.hull().lo().to_string(),
                hi: spec.hull().hi().to_string(),
            }
            .into());
        }
        let tree = itinerary_tree(spec, p, run.m, run.budget)?;
        let tag = match p.side {
            Side::Minus => "-",
            Side::Exact => "",
            Side::Plus => "+",
        };
        let value = format!("{}{tag}", run.fmt.q(&p.value));
        if *label == value {
            let _ = writeln!(text, "{label}");
        } else {
            let _ = writeln!(text, "{label} = {value}");
        }
        let mut entries = Vec::new();
        for (w, a) in &tree.entries {
            let _ = writeln!(text, "  {w}  {a}");
            entries.push(json!([w.to_string(), a.to_string()]));
            t.rows.push(vec![label.clone(), value.clone(), w.to_string(), a.to_string()]);
        }
        docs.push(json!({ "point": label, "value": value, "depth": tree.depth, "entries": entries }));
    }
    let doc = json!({ "system": system_name(spec), "depth": run.m, "itineraries": docs });
    let mut report = Report::new("itinerary", doc, text);
    report.tables.push(t);
    Ok(report)
}

pub fn compare(a: &SystemSpec, b: &SystemSpec, map: Option<usize>, run: &Run) -> Outcome {
    let cmp = compare_kneading(a, b, run.m, run.budget)?;
    let mut text = String::new();
    let mut failure = None;
    let kneading = match &cmp {
        KneadingComparison::Equal { depth } => {
            let _ = writeln!(text, "kneading equal to depth {depth}");
            json!({ "equal": true, "depth": depth })
        }
        KneadingComparison::Differ { turning, word, a: ka, b: kb } => {
            let show = |x: &Option<kneadlab::Address>| x.map_or("inadmissible".to_string(), |x| x.to_string());
            let msg = format!("kneading differs at c{turning}, word {word}: {} vs {}", show(ka), show(kb));
            let _ = writeln!(text, "{msg}");
            failure = Some(msg);
            json!({ "equal": false, "turning": turning, "word": word.to_string(), "a": show(ka), "b": show(kb) })
        }
    };
    let map_doc = match map {
        None => Value::Null,
        Some(depth) => match combinatorial_map(a, b, depth, run.budget)? {
            CombinatorialMap::Consistent { depth, pairs } => {
                let _ = writeln!(text, "combinatorial map consistent to depth {depth} ({} orbit points)", pairs.len());
                json!({ "consistent": true, "depth": depth, "orbit_points": pairs.len() })
            }
            CombinatorialMap::Violation { depth, witness } => {
                let msg = format!("combinatorial map fails at depth {depth}: {witness}");
                let _ = writeln!(text, "{msg}");
                failure.get_or_insert(msg);
                json!({ "consistent": false, "depth": depth, "witness": witness.to_string() })
            }
        },
    };
    let doc = json!({ "a": system_name(a), "b": system_name(b), "kneading": kneading, "map": map_doc });
    let mut report = Report::new("compare", doc, text);
    report.failure = failure;
    Ok(report)
}

pub fn separability(spec: &SystemSpec, run: &Run) -> Outcome {
    let r = check_separability(spec, run.m, run.budget)?;
    let f = &run.fmt;
    let pair = |p: &Option<(Rational, Rational)>| p.as_ref().map(|(x, y)| vec![f.q(x), f.q(y)]);
    let mut text = String::new();
    let _ = writeln!(
        text,
        "future: {} ({} orbit points, {} pairs, {} witnesses verified)",
        if r.future.certified { "separated" } else { "NOT separated" },
        r.future.orbit_points,
        r.future.pairs_checked,
        r.future.witnesses_verified
    );
    if let Some((x, y)) = &r.future.counterexample {
        let _ = writeln!(text, "  no separating word for {} and {}", f.q(x), f.q(y));
    }
    let _ = writeln!(
        text,
        "past: {} ({} of {} points{}, {} pairs, {} failures)",
        if r.past.failures == 0 { "separated" } else { "NOT separated" },
        r.past.points_checked,
        r.past.points,
        if r.past.sampled { ", sampled" } else { "" },
        r.past.pairs_checked,
        r.past.failures
    );
    if let Some((x, y)) = &r.past.first_failure {
        let _ = writeln!(text, "  {} and {} have the same backward itineraries", f.q(x), f.q(y));
    }
    for w in &r.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let doc = json!({
        "system": system_name(spec),
        "depth": r.depth,
        "future": {
            "certified": r.future.certified,
            "orbit_points": r.future.orbit_points,
            "pairs_checked": r.future.pairs_checked,
            "witnesses_verified": r.future.witnesses_verified,
            "counterexample": pair(&r.future.counterexample),
        },
        "past": {
            "points": r.past.points,
            "points_checked": r.past.points_checked,
            "sampled": r.past.sampled,
            "pairs_checked": r.past.pairs_checked,
            "failures": r.past.failures,
            "first_failure": pair(&r.past.first_failure),
        },
        "warnings": r.warnings,
    });
    let mut report = Report::new("separability", doc, text);
    if !r.future.certified {
        report.failure = Some("future separation".into());
    } else if r.past.failures > 0 {
        report.failure = Some(format!("past separation ({} pairs)", r.past.failures));
    }
    Ok(report)
}

fn parse_interval(text: &str) -> Result<ClosedInterval, Failure> {
    let (lo, hi) = text.split_once(',').ok_or_else(|| input_error(format!("--interval: expected lo,hi, got {text:?}")))?;
    let lo = parse_rational(lo).map_err(|e| input_error(format!("--interval: {e}")))?;
    let hi = parse_rational(hi).map_err(|e| input_error(format!("--interval: {e}")))?;
    ClosedInterval::new(lo, hi).map_err(|e| input_error(format!("--interval: {e}")))
}

pub fn measure(spec: &SystemSpec, interval: Option<&str>, grid: usize, run: &Run) -> Outcome {
    let j = match interval {
        Some(t) => parse_interval(t)?,
        None => spec.hull(),
    };
    let est = measure_estimate(spec, &Span::Segment(j.clone()), run.m, run.budget)?;
    let ctx = MeasureContext::new(spec, run.m, run.budget)?;
    let ss = ctx.self_similarity(spec, &j);
    let f = &run.fmt;
    let mut text = String::new();
    let _ = writeln!(text, "interval: [{}, {}]", f.q(j.lo()), f.q(j.hi()));
    let _ = writeln!(text, "ratio l(m|J)/l(m): {}", f.q(&est.ratio));
    let _ = writeln!(text, "estimate: {} (bracket {} .. {})", f.f(est.value), f.f(est.bracket.0), f.f(est.bracket.1));
    let _ = writeln!(text, "abel estimate: {}{}", f.f(est.abel), if est.unreliable { " (outside bracket)" } else { "" });
    let _ = writeln!(text, "self-similarity residual: {} (bracket {})", f.f(ss.residual), f.f(ss.bracket));
    for w in &est.endpoint_warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let doc = json!({
        "system": system_name(spec),
        "depth": run.m,
        "interval": [f.q(j.lo()), f.q(j.hi())],
        "ratio": f.q(&est.ratio),
        "value": est.value,
        "bracket": [est.bracket.0, est.bracket.1],
        "abel": est.abel,
        "unreliable": est.unreliable,
        "self_similarity": { "lhs": ss.lhs, "rhs": ss.rhs, "residual": ss.residual, "bracket": ss.bracket },
        "warnings": est.endpoint_warnings,
    });
    let mut report = Report::new("measure", doc, text);
    let mut t = Table::new("phi.csv", &["x", "phi"]);
    for (x, y) in ctx.phi_profile(&hull_grid(spec, grid)) {
        t.rows.push(vec![f.q(&x), f.q(&y)]);
    }
    report.tables.push(t);
    Ok(report)
}

pub fn linearize(spec: &SystemSpec, grid: usize, max_residual: Option<f64>, run: &Run) -> Outcome {
    let lin = linearize_model(spec, run.m, run.cap, &run.tol, grid, run.budget)?;
    let f = &run.fmt;
    let m = &lin.model;
    let mut text = String::new();
    let _ = writeln!(text, "s = {} (from {})", f.q(&m.s), lin.s_source);
    let bps: Vec<String> = m.breakpoints.iter().map(|b| f.q(b)).collect();
    let _ = writeln!(text, "breakpoints: {}", bps.join(", "));
    for (i, b) in m.branches.iter().enumerate() {
        let _ = writeln!(
            text,
            "U{} on [{}, {}]: {}{}",
            i + 1,
            f.q(b.domain.lo()),
            f.q(b.domain.hi()),
            affine_text(f, &b.slope, &b.intercept, "y"),
            if b.degenerate { " (collapsed)" } else { "" }
        );
    }
    let _ = writeln!(text, "max residual: {}", f.f(lin.max_residual));
    for w in &lin.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let branches: Vec<Value> = m
        .branches
        .iter()
        .map(|b| {
            json!({
                "domain": [f.q(b.domain.lo()), f.q(b.domain.hi())],
                "slope": f.q(&b.slope),
                "intercept": f.q(&b.intercept),
                "degenerate": b.degenerate,
            })
        })
        .collect();
    let doc = json!({
        "system": system_name(spec),
        "depth": run.m,
        "cap": run.cap,
        "s": f.q(&m.s),
        "s_source": lin.s_source,
        "breakpoints": bps,
        "branches": branches,
        "max_residual": lin.max_residual,
        "warnings": lin.warnings,
    });
    let mut report = Report::new("linearize", doc, text);
    let mut t = Table::new("residuals.csv", &["branch", "x", "residual"]);
    for (i, x, r) in &lin.residuals {
        t.rows.push(vec![(i + 1).to_string(), f.q(x), f.f(*r)]);
    }
    report.tables.push(t);
    if let Some(limit) = max_residual {
        if lin.max_residual > limit {
            report.failure = Some(format!("linearization residual {} > {limit}", lin.max_residual));
        }
    }
    Ok(report)
}

pub fn overlap(spec: &SystemSpec, terms: usize, run: &Run) -> Outcome {
    let it = overlap_itineraries(spec, terms)?;
    let model = overlap_entropy_model(spec, &it, terms, &run.tol)?;
    let (relation, n21) = overlap_determinant_check(spec, &it, run.cap, run.budget)?;
    let f = &run.fmt;
    let word = |k: &kneadlab::overlap::Itinerary| (0..=terms).map(|i| char::from(b'0' + k.symbol(i))).collect::<String>();
    let period = |k: &kneadlab::overlap::Itinerary| k.period.map(|(pre, per)| json!({ "preperiod": pre, "period": per }));
    let mut text = String::new();
    let _ = writeln!(text, "q = {}", f.q(&it.q));
    let _ = writeln!(text, "alpha = {}", word(&it.alpha));
    let _ = writeln!(text, "beta  = {}", word(&it.beta));
    let _ = writeln!(text, "r = {} ({})", f.q(&model.r), if model.exact { "closed form" } else { "truncated series" });
    let _ = writeln!(text, "s = {}", f.q(&model.s));
    let _ = writeln!(text, "entropy = {}", f.f(kneadlab::numeric::to_f64(&model.s).ln()));
    let _ = writeln!(text, "p = {} (tail bound {})", f.q(&model.p), f.q(&model.p_tail_bound));
    if !model.stable {
        let _ = writeln!(text, "warning: truncated roots at N-1 and N differ by more than tol");
    }
    if let Some(u) = &model.model {
        for (i, (dom, s, c)) in u.iter().enumerate() {
            let _ = writeln!(text, "U{i} on [{}, {}]: {}", f.q(dom.lo()), f.q(dom.hi()), affine_text(f, s, c, "x"));
        }
    }
    let rel_ok = relation.is_zero();
    let n21_ok = n21.is_zero();
    let _ = writeln!(text, "D(1-t) + N21 mod t^{}: {}", run.cap + 1, if rel_ok { "zero" } else { "NONZERO" });
    let _ = writeln!(text, "N21 - sum (alpha_i - beta_i) t^i: {}", if n21_ok { "zero" } else { "NONZERO" });
    let doc = json!({
        "system": system_name(spec),
        "terms": terms,
        "q": f.q(&it.q),
        "alpha": word(&it.alpha),
        "beta": word(&it.beta),
        "alpha_period": period(&it.alpha),
        "beta_period": period(&it.beta),
        "r": f.q(&model.r),
        "r_exact": model.exact,
        "r_truncated": f.q(&model.r_truncated),
        "stable": model.stable,
        "s": f.q(&model.s),
        "p": f.q(&model.p),
        "p_tail_bound": f.q(&model.p_tail_bound),
        "model": model.model.as_ref().map(|u| u.iter().map(|(dom, s, c)| json!({
            "domain": [f.q(dom.lo()), f.q(dom.hi())],
            "slope": f.q(s),
            "intercept": f.q(c),
        })).collect::<Vec<_>>()),
        "determinant_relation": f.coeffs(&relation),
        "n21_residual": f.coeffs(&n21),
    });
    let mut report = Report::new("overlap", doc, text);
    let mut t = Table::new("itineraries.csv", &["index", "alpha", "beta"]);
    for i in 0..=terms {
        t.rows.push(vec![i.to_string(), it.alpha.symbol(i).to_string(), it.beta.symbol(i).to_string()]);
    }
    report.tables.push(t);
    if !rel_ok {
        report.failure = Some("D(1-t) + N21 is not zero".into());
    } else if !n21_ok {
        report.failure = Some("N21 differs from sum (alpha_i - beta_i) t^i".into());
    }
    Ok(report)
}

/// Deterministic sample points spread over the hull, in a scrambled order.
fn sample_points(spec: &SystemSpec) -> Vec<Rational> {
    let h = spec.hull();
    (1..97).map(|i| h.lo() + h.width() * rat((37 * i) % 97, 97)).collect()
}

struct Check {
    name: &'static str,
    detail: String,
    residual: String,
    ok: bool,
}

pub fn verify(spec: &SystemSpec, run: &Run) -> Outcome {
    let (m, cap, budget) = (run.m, run.cap, run.budget);
    let zero_counts = |v: &[i64]| v.iter().all(|&r| r == 0);
    let mut checks = Vec::new();

    let mut tested = 0;
    let mut bad = Vec::new();
    let points = sample_points(spec);
    for x in &points {
        if tested == 20 {
            break;
        }
        match verify_ld_identity(spec, x, cap, budget) {
            Ok(r) => {
                tested += 1;
                if !r.is_zero() {
                    bad.push(run.fmt.q(x));
                }
            }
            Err(Error::Precondition(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    checks.push(Check {
        name: "ld_identity",
        detail: format!("{tested} points"),
        residual: if bad.is_empty() { "0".into() } else { format!("nonzero at {}", bad.join(" ")) },
        ok: bad.is_empty(),
    });

    let km = kneading_matrix(spec, cap, budget)?;
    let rel = verify_column_relation(&km);
    checks.push(Check {
        name: "column_relation",
        detail: format!("{} rows", km.n_rows()),
        residual: if rel.is_zero() { "0".into() } else { "nonzero".into() },
        ok: rel.is_zero(),
    });

    let d0 = km.determinant_from_column(0)?;
    let mut differing = Vec::new();
    for i in 1..km.n_cols() {
        if km.determinant_from_column(i)? != d0 {
            differing.push(i.to_string());
        }
    }
    checks.push(Check {
        name: "column_independence",
        detail: format!("{} columns", km.n_cols()),
        residual: if differing.is_empty() { "0".into() } else { format!("columns {} differ", differing.join(" ")) },
        ok: differing.is_empty(),
    });

    let mut bad = Vec::new();
    for k in 0..5 {
        let j = ClosedInterval::hull(points[2 * k].clone(), points[2 * k + 1].clone());
        if !verify_increment_jump(spec, &j, cap, budget)?.is_zero() {
            bad.push(format!("[{}, {}]", run.fmt.q(j.lo()), run.fmt.q(j.hi())));
        }
    }
    checks.push(Check {
        name: "jump_identity",
        detail: "5 intervals".into(),
        residual: if bad.is_empty() { "0".into() } else { format!("nonzero on {}", bad.join(" ")) },
        ok: bad.is_empty(),
    });

    let rec = l_recursion_check(spec, &spec.hull(), m, budget)?;
    checks.push(Check {
        name: "l_recursion",
        detail: format!("k <= {m}"),
        residual: format!("{rec:?}"),
        ok: zero_counts(&rec),
    });

    let cyl = cylinder_identity_check(spec, m, budget)?;
    checks.push(Check {
        name: "cylinder_identity",
        detail: format!("m <= {m}"),
        residual: format!("{cyl:?}"),
        ok: zero_counts(&cyl),
    });

    let lg = L_gamma_identity_check(spec, cap, budget)?;
    checks.push(Check {
        name: "l_gamma_identity",
        detail: format!("mod t^{}", cap + 1),
        residual: run.fmt.poly(&lg),
        ok: lg.is_zero(),
    });

    let tri = tri_bijection_check(spec, m, budget)?;
    checks.push(Check {
        name: "tri_bijection",
        detail: format!("{} triples, {} boundary pairs", tri.triples, tri.boundary_pairs),
        residual: tri.residual().to_string(),
        ok: tri.residual() == 0,
    });

    let name_w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut text = String::new();
    for c in &checks {
        let _ = writeln!(
            text,
            "{:name_w$}  {}  {} (residual {})",
            c.name,
            if c.ok { "ok  " } else { "FAIL" },
            c.detail,
            c.residual
        );
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.ok).map(|c| c.name).collect();
    if failed.is_empty() {
        text.push_str("all residuals zero\n");
    }
    let doc = json!({
        "system": system_name(spec),
        "depth": m,
        "cap": cap,
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "detail": c.detail,
            "residual": c.residual,
            "ok": c.ok,
        })).collect::<Vec<_>>(),
    });
    let mut report = Report::new("verify", doc, text);
    let mut t = Table::new("verify.csv", &["check", "detail", "residual", "ok"]);
    for c in &checks {
        t.rows.push(vec![c.name.into(), c.detail.clone(), c.residual.clone(), c.ok.to_string()]);
    }
    report.tables.push(t);
    if !failed.is_empty() {
        report.failure = Some(format!("nonzero residual in {}", failed.join(", ")));
    }
    Ok(report)
}
