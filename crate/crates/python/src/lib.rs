//! Python bindings. Point sets are passed as lists of coordinate rows with
//! optional masses (unit masses by default).

use kerneldist::align::{best_rigid_motion, best_translation, Alignment, Rotation};
use kerneldist::coreset::coreset_random;
use kerneldist::features::{kernel_distance_ifgt, kernel_distance_rff};
use kerneldist::wspd::kernel_distance_wspd_checked;
use kerneldist::{kernel_distance_sq_exact, GaussianKernel, WeightedPointSet};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: kerneldist::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn point_set(points: Vec<Vec<f64>>, masses: Option<Vec<f64>>) -> PyResult<WeightedPointSet> {
    let d = points.first().map_or(1, Vec::len);
    if points.iter().any(|p| p.len() != d) {
        return Err(PyValueError::new_err(
            "all points must have the same dimension",
        ));
    }
    let masses = masses.unwrap_or_else(|| vec![1.0; points.len()]);
    WeightedPointSet::new(d, points.concat(), masses).map_err(value_error)
}

fn kernel(sigma: f64) -> PyResult<GaussianKernel> {
    GaussianKernel::new(sigma).map_err(value_error)
}

/// Squared kernel distance between two weighted point sets.
#[pyfunction]
#[pyo3(signature = (p, q, sigma=1.0, method="exact", eps=0.1, delta=0.1, seed=0, p_masses=None, q_masses=None))]
#[allow(clippy::too_many_arguments)]
fn squared_distance(
    p: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    sigma: f64,
    method: &str,
    eps: f64,
    delta: f64,
    seed: u64,
    p_masses: Option<Vec<f64>>,
    q_masses: Option<Vec<f64>>,
) -> PyResult<f64> {
    let k = kernel(sigma)?;
    let (p, q) = (point_set(p, p_masses)?, point_set(q, q_masses)?);
    let value = match method {
        "exact" => kernel_distance_sq_exact(&k, &p, &q),
        "wspd" => kernel_distance_wspd_checked(&k, &p, &q, eps),
        "rff" => kernel_distance_rff(&k, &p, &q, eps, delta, seed).map(|(u, _)| u),
        "ifgt" => kernel_distance_ifgt(&k, &p, &q, eps).map(|e| e.value),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method {other:?} (expected exact, wspd, rff or ifgt)"
            )))
        }
    };
    value.map_err(value_error)
}

fn alignment_dict<'py>(py: Python<'py>, a: &Alignment) -> PyResult<Bound<'py, PyDict>> {
    let m = &a.motion;
    let d = m.dim;
    let rotation: Vec<Vec<f64>> = match &m.rotation {
        Rotation::Angle(t) => vec![vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]],
        Rotation::Matrix(r) => r.chunks(d).map(<[f64]>::to_vec).collect(),
    };
    let out = PyDict::new(py);
    out.set_item("rotation", rotation)?;
    out.set_item("anchor", m.anchor.clone())?;
    out.set_item("translation", m.translation.clone())?;
    out.set_item("squared_distance", a.squared_distance)?;
    out.set_item("evaluated", a.evaluated)?;
    Ok(out)
}

/// Motion `x -> R (x - anchor) + anchor + translation` applied to `q` that
/// approximately minimizes the kernel distance to `p`.
#[pyfunction]
#[pyo3(signature = (p, q, sigma=1.0, mode="translate", eps=0.1, p_masses=None, q_masses=None))]
fn align<'py>(
    py: Python<'py>,
    p: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    sigma: f64,
    mode: &str,
    eps: f64,
    p_masses: Option<Vec<f64>>,
    q_masses: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let k = kernel(sigma)?;
    let (p, q) = (point_set(p, p_masses)?, point_set(q, q_masses)?);
    let a = match mode {
        "translate" => best_translation(&k, &p, &q, eps),
        "rigid" => best_rigid_motion(&k, &p, &q, eps),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown mode {other:?} (expected translate or rigid)"
            )))
        }
    }
    .map_err(value_error)?;
    alignment_dict(py, &a)
}

/// Random coreset of `size` draws, merged. Returns `(points, masses)`.
#[pyfunction]
#[pyo3(signature = (p, size, seed=0, masses=None))]
fn coreset(
    p: Vec<Vec<f64>>,
    size: usize,
    seed: u64,
    masses: Option<Vec<f64>>,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let p = point_set(p, masses)?;
    let s = coreset_random(&p, size, seed)
        .map_err(value_error)?
        .merged();
    let points = s.iter().map(|(x, _)| x.to_vec()).collect();
    Ok((points, s.masses().to_vec()))
}

#[pymodule]
fn kerneldist_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(squared_distance, m)?)?;
    m.add_function(wrap_pyfunction!(align, m)?)?;
    m.add_function(wrap_pyfunction!(coreset, m)?)?;
    Ok(())
}
