//! Python bindings for kneadlab.
//!
//! Numbers cross the boundary as exact fraction strings ("-1/3"); wrap them
//! in `fractions.Fraction` on the Python side when arithmetic is needed.

use kneadlab::entropy::{entropy_report, RootStatus};
use kneadlab::itinerary::{check_separability, combinatorial_map, compare_kneading, itinerary, CombinatorialMap, KneadingComparison};
use kneadlab::kneading::kneading_matrix;
use kneadlab::measure::{linearize as linearize_model, measure_estimate};
use kneadlab::numeric::{fmt_rational, parse_rational};
use kneadlab::overlap::{overlap_determinant_check, overlap_entropy_model, overlap_itineraries};
use kneadlab::words::DEFAULT_BUDGET;
use kneadlab::{load_system, ClosedInterval, Error, Rational, Side, SignedPoint, Span, SystemSpec, TruncatedSeries};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(kneadlab_py, CheckError, PyException, "An internal consistency check failed.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::ColumnDependence { .. } | Error::Inconsistency(_) => CheckError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn q(text: &str) -> PyResult<Rational> {
    parse_rational(text).map_err(to_py)
}

fn coeffs(s: &TruncatedSeries) -> Vec<String> {
    s.to_strings()
}

/// A system of monotone interval maps loaded from a JSON description.
#[pyclass(frozen, module = "kneadlab_py")]
struct System {
    spec: SystemSpec,
}

#[pymethods]
impl System {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(System { spec: load_system(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        Self::from_json(&text)
    }

    /// Conjugate by h(x) = a x + b with a > 0.
    fn conjugate(&self, a: &str, b: &str) -> PyResult<Self> {
        Ok(System { spec: self.spec.conjugate(&q(a)?, &q(b)?).map_err(to_py)? })
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.spec.name().map(str::to_string)
    }

    #[getter]
    fn n_branches(&self) -> usize {
        self.spec.n_branches()
    }

    #[getter]
    fn turning_points(&self) -> Vec<String> {
        self.spec.turning_points().iter().map(fmt_rational).collect()
    }

    #[getter]
    fn hull(&self) -> (String, String) {
        let h = self.spec.hull();
        (fmt_rational(h.lo()), fmt_rational(h.hi()))
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.spec.warnings().to_vec()
    }

    /// f_i(x) for the 1-based branch index i.
    fn apply(&self, branch: usize, x: &str) -> PyResult<String> {
        if branch == 0 || branch > self.spec.n_branches() {
            return Err(PyValueError::new_err(format!("no branch a{branch}")));
        }
        Ok(fmt_rational(&self.spec.branch(branch - 1).eval(&q(x)?).map_err(to_py)?))
    }

    fn __repr__(&self) -> String {
        format!("System(name={:?}, branches={})", self.spec.name().unwrap_or(""), self.spec.n_branches())
    }
}

/// Rows N_{i,j} of the kneading matrix, each a coefficient list up to t^cap.
#[pyfunction]
#[pyo3(name = "kneading_matrix", signature = (system, cap=16))]
fn kneading_matrix_py(py: Python<'_>, system: &System, cap: usize) -> PyResult<Vec<Vec<Vec<String>>>> {
    let km = py.detach(|| kneading_matrix(&system.spec, cap, DEFAULT_BUDGET)).map_err(to_py)?;
    Ok(km.rows.iter().map(|r| r.iter().map(coeffs).collect()).collect())
}

/// Kneading determinant coefficients up to t^cap, checked across all columns.
#[pyfunction]
#[pyo3(signature = (system, cap=16))]
fn kneading_determinant(py: Python<'_>, system: &System, cap: usize) -> PyResult<Vec<String>> {
    let d = py
        .detach(|| kneading_matrix(&system.spec, cap, DEFAULT_BUDGET).and_then(|km| km.determinant()))
        .map_err(to_py)?;
    Ok(coeffs(&d))
}

#[pyfunction]
#[pyo3(signature = (system, m=14, cap=16, tol="1e-9"))]
fn entropy<'py>(py: Python<'py>, system: &System, m: usize, cap: usize, tol: &str) -> PyResult<Bound<'py, PyDict>> {
    let tol = q(tol)?;
    let r = py.detach(|| entropy_report(&system.spec, m, cap, &tol, DEFAULT_BUDGET)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lap_counts", r.counts.clone())?;
    d.set_item("boundary_counts", r.boundary.clone())?;
    d.set_item("s_hat", r.s_hat)?;
    d.set_item("s0_hat", r.s0_hat)?;
    d.set_item("entropy_lap", r.entropy_lap)?;
    d.set_item("entropy_root", r.entropy_root)?;
    d.set_item("discrepancy", r.discrepancy)?;
    d.set_item(
        "root",
        match &r.root {
            RootStatus::Found { root } => Some(fmt_rational(root)),
            RootStatus::NotApplicable(_) => None,
        },
    )?;
    d.set_item("determinant", coeffs(&r.determinant))?;
    d.set_item("warnings", r.warnings.clone())?;
    Ok(d)
}

fn signed_point(text: &str) -> PyResult<SignedPoint> {
    let t = text.trim();
    if let Some(b) = t.strip_suffix('+') {
        return Ok(SignedPoint::new(q(b)?, Side::Plus));
    }
    if let Some(b) = t.strip_suffix('-').filter(|b| !b.is_empty()) {
        return Ok(SignedPoint::new(q(b)?, Side::Minus));
    }
    Ok(SignedPoint::exact(q(t)?))
}

/// (word, address) pairs in shortlex order, e.g. [("e", "P1"), ("a1", "c2")].
/// A trailing "+" or "-" on the point selects a one-sided limit.
#[pyfunction]
#[pyo3(name = "itinerary", signature = (system, point, m=6))]
fn itinerary_py(py: Python<'_>, system: &System, point: &str, m: usize) -> PyResult<Vec<(String, String)>> {
    let p = signed_point(point)?;
    let tree = py.detach(|| itinerary(&system.spec, &p, m, DEFAULT_BUDGET)).map_err(to_py)?;
    Ok(tree.entries.iter().map(|(w, a)| (w.to_string(), a.to_string())).collect())
}

type Difference = (usize, String, Option<String>, Option<String>);

/// None when the kneading data agree to depth m, else (turning index, word, address in a, address in b).
#[pyfunction]
#[pyo3(signature = (a, b, m=14))]
fn compare(
    py: Python<'_>,
    a: &System,
    b: &System,
    m: usize,
) -> PyResult<Option<Difference>> {
    match py.detach(|| compare_kneading(&a.spec, &b.spec, m, DEFAULT_BUDGET)).map_err(to_py)? {
        KneadingComparison::Equal { .. } => Ok(None),
        KneadingComparison::Differ { turning, word, a, b } => {
            Ok(Some((turning, word.to_string(), a.map(|x| x.to_string()), b.map(|x| x.to_string()))))
        }
    }
}

/// None when the combinatorial map is consistent, else a description of the witness.
#[pyfunction]
#[pyo3(signature = (a, b, m=6))]
fn combinatorial_map_witness(py: Python<'_>, a: &System, b: &System, m: usize) -> PyResult<Option<String>> {
    match py.detach(|| combinatorial_map(&a.spec, &b.spec, m, DEFAULT_BUDGET)).map_err(to_py)? {
        CombinatorialMap::Consistent { .. } => Ok(None),
        CombinatorialMap::Violation { witness, .. } => Ok(Some(witness.to_string())),
    }
}

#[pyfunction]
#[pyo3(signature = (system, m=8))]
fn separability<'py>(py: Python<'py>, system: &System, m: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| check_separability(&system.spec, m, DEFAULT_BUDGET)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("future", r.future.certified)?;
    d.set_item("past_failures", r.past.failures)?;
    d.set_item("passes", r.passes())?;
    d.set_item("warnings", r.warnings.clone())?;
    Ok(d)
}

/// Estimate of the self-similar measure of [lo, hi].
#[pyfunction]
#[pyo3(signature = (system, lo, hi, m=14))]
fn measure<'py>(py: Python<'py>, system: &System, lo: &str, hi: &str, m: usize) -> PyResult<Bound<'py, PyDict>> {
    let j = ClosedInterval::new(q(lo)?, q(hi)?).map_err(to_py)?;
    let est = py.detach(|| measure_estimate(&system.spec, &Span::Segment(j), m, DEFAULT_BUDGET)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("ratio", fmt_rational(&est.ratio))?;
    d.set_item("value", est.value)?;
    d.set_item("bracket", est.bracket)?;
    d.set_item("abel", est.abel)?;
    d.set_item("warnings", est.endpoint_warnings.clone())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (system, m=14, cap=16, tol="1e-9", grid=200))]
fn linearize<'py>(
    py: Python<'py>,
    system: &System,
    m: usize,
    cap: usize,
    tol: &str,
    grid: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let tol = q(tol)?;
    let lin = py.detach(|| linearize_model(&system.spec, m, cap, &tol, grid, DEFAULT_BUDGET)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("s", fmt_rational(&lin.model.s))?;
    d.set_item("breakpoints", lin.model.breakpoints.iter().map(fmt_rational).collect::<Vec<_>>())?;
    let branches: Vec<(String, String, String, String)> = lin
        .model
        .branches
        .iter()
        .map(|b| (fmt_rational(b.domain.lo()), fmt_rational(b.domain.hi()), fmt_rational(&b.slope), fmt_rational(&b.intercept)))
        .collect();
    d.set_item("branches", branches)?;
    d.set_item("max_residual", lin.max_residual)?;
    d.set_item("warnings", lin.warnings.clone())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (system, n=32, cap=10, tol="1e-9"))]
fn overlap<'py>(py: Python<'py>, system: &System, n: usize, cap: usize, tol: &str) -> PyResult<Bound<'py, PyDict>> {
    let tol = q(tol)?;
    let (it, model, (relation, n21)) = py
        .detach(|| {
            let it = overlap_itineraries(&system.spec, n)?;
            let model = overlap_entropy_model(&system.spec, &it, n, &tol)?;
            let check = overlap_determinant_check(&system.spec, &it, cap, DEFAULT_BUDGET)?;
            Ok((it, model, check))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("q", fmt_rational(&it.q))?;
    d.set_item("alpha", (0..=n).map(|i| it.alpha.symbol(i)).collect::<Vec<_>>())?;
    d.set_item("beta", (0..=n).map(|i| it.beta.symbol(i)).collect::<Vec<_>>())?;
    d.set_item("r", fmt_rational(&model.r))?;
    d.set_item("exact", model.exact)?;
    d.set_item("s", fmt_rational(&model.s))?;
    d.set_item("p", fmt_rational(&model.p))?;
    d.set_item("p_tail_bound", fmt_rational(&model.p_tail_bound))?;
    d.set_item("determinant_relation_zero", relation.is_zero())?;
    d.set_item("n21_matches", n21.is_zero())?;
    Ok(d)
}

#[pymodule]
fn kneadlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<System>()?;
    m.add("CheckError", m.py().get_type::<CheckError>())?;
    m.add_function(wrap_pyfunction!(kneading_matrix_py, m)?)?;
    m.add_function(wrap_pyfunction!(kneading_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(itinerary_py, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(combinatorial_map_witness, m)?)?;
    m.add_function(wrap_pyfunction!(separability, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(linearize, m)?)?;
    m.add_function(wrap_pyfunction!(overlap, m)?)?;
    Ok(())
}
