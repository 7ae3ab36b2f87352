//! Python bindings. Functions and sets are passed as the same JSON documents the CLI reads.

use dcext::counterexamples::{self, BlowupOptions};
use dcext::dc_calculus::ConvexFn;
use dcext::extension_ops::lipschitz_convex_extend;
use dcext::geometry::ConvexSet;
use dcext::{Tolerances, Vector};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(dcext_py, CertificationError, PyException);

fn to_py(e: dcext::Error) -> PyErr {
    match e {
        dcext::Error::CertificationFailed(c) => CertificationError::new_err(c.report_line()),
        dcext::Error::InvalidInput(_) | dcext::Error::DimensionMismatch { .. } | dcext::Error::OutsideDomain { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn vector(x: Vec<f64>) -> PyResult<Vector> {
    Vector::new(x).map_err(to_py)
}

/// The strip function at `(x, y)`, `-1 <= y <= 0`.
#[pyfunction]
fn strip_eval(x: f64, y: f64) -> PyResult<f64> {
    counterexamples::strip_eval(x, y).map_err(to_py)
}

/// Lower bounds `(tau, lb)` any convex extension must take at `target`, and whether they certify non-extendability.
#[pyfunction]
#[pyo3(signature = (tau_list, target = (0.0, 3.0)))]
fn strip_bounds(tau_list: Vec<f64>, target: (f64, f64)) -> PyResult<(bool, Vec<(f64, f64)>)> {
    let (cert, rows) =
        counterexamples::no_convex_extension_certificate(&tau_list, &Vector::from_slice(&[target.0, target.1]), None).map_err(to_py)?;
    Ok((cert.passed(), rows.iter().map(|r| (r.tau, r.lb)).collect()))
}

/// Rows `(n, k, norm, g_value, cluster_diam)` of the truncated ℓ₂ example, and the blow-up verdict.
#[pyfunction]
fn elltwo_rows(n: usize) -> PyResult<(bool, Vec<(usize, usize, f64, f64, f64)>)> {
    let ex = counterexamples::build_elltwo(n).map_err(to_py)?;
    let (cert, rows) = counterexamples::elltwo_blowup_report(&ex, &BlowupOptions::default()).map_err(to_py)?;
    Ok((cert.passed(), rows.iter().map(|r| (r.n, r.k, r.norm, r.g_value, r.cluster_diam)).collect()))
}

#[pyfunction]
fn eval_convex(function: &str, x: Vec<f64>) -> PyResult<f64> {
    ConvexFn::from_json(function).map_err(to_py)?.eval(&vector(x)?).map_err(to_py)
}

/// Nearest point of the set and the distance to it.
#[pyfunction]
fn project(set: &str, x: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
    let s = ConvexSet::from_json(set).map_err(to_py)?;
    let p = s.project(&vector(x)?, Tolerances::global().dist).map_err(to_py)?;
    Ok((p.point.into_inner(), p.dist))
}

/// Values at `points` of the `lipschitz`-Lipschitz convex extension of `function` from `domain`.
/// Raises `CertificationError` when the sampled hypotheses fail.
#[pyfunction]
#[pyo3(signature = (function, domain, lipschitz, points, samples = 1000, seed = 0))]
fn lipschitz_extend(function: &str, domain: &str, lipschitz: f64, points: Vec<Vec<f64>>, samples: usize, seed: u64) -> PyResult<Vec<f64>> {
    let f = ConvexFn::from_json(function).map_err(to_py)?;
    let d = ConvexSet::from_json(domain).map_err(to_py)?;
    let (ext, _) = lipschitz_convex_extend(&f, &d, lipschitz, samples, seed).map_err(to_py)?;
    points.into_iter().map(|p| ext.eval(&vector(p)?).map_err(to_py)).collect()
}

#[pymodule]
fn dcext_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(strip_eval, m)?)?;
    m.add_function(wrap_pyfunction!(strip_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(elltwo_rows, m)?)?;
    m.add_function(wrap_pyfunction!(eval_convex, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(lipschitz_extend, m)?)?;
    m.add("CertificationError", m.py().get_type::<CertificationError>())?;
    Ok(())
}
