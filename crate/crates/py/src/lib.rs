//! Python module `ladder_ent`. Results come back as plain dicts.

use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use ladder_ent::analysis::{compare_exact_rvb, fit_scaling as fit, Trend};
use ladder_ent::rvb::{build_rvb_enumerated, build_rvb_recursive, RecursionCache, MAX_RVB_STATE_SITES};
use ladder_ent::{build_ladder, compute_ggm, ground_state, Boundary, HamiltonianSpec, LadderGeometry, LanczosOptions, Strategy};

fn py_err(e: ladder_ent::Error) -> PyErr {
    match e.category() {
        "domain" => PyValueError::new_err(e.to_string()),
        "resource" => PyMemoryError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn geometry(legs: usize, rungs: usize, boundary: &str) -> PyResult<LadderGeometry> {
    let b: Boundary = boundary.parse().map_err(py_err)?;
    build_ladder(legs, rungs, b).map_err(py_err)
}

fn strategy(s: &str) -> PyResult<Strategy> {
    s.parse().map_err(py_err)
}

/// Ground-state energy of the XXZ ladder.
#[pyfunction]
#[pyo3(signature = (legs, rungs, boundary = "periodic", delta = 1.0))]
fn ground_energy(legs: usize, rungs: usize, boundary: &str, delta: f64) -> PyResult<f64> {
    let spec = HamiltonianSpec::new(geometry(legs, rungs, boundary)?, 1.0, delta).map_err(py_err)?;
    Ok(ground_state(&spec, &LanczosOptions::default()).map_err(py_err)?.energy)
}

/// GGM of the exact ground state.
#[pyfunction]
#[pyo3(signature = (legs, rungs, boundary = "periodic", delta = 1.0, strategy = "restricted"))]
fn exact_ggm<'py>(
    py: Python<'py>,
    legs: usize,
    rungs: usize,
    boundary: &str,
    delta: f64,
    strategy: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let g = geometry(legs, rungs, boundary)?;
    let s = self::strategy(strategy)?;
    let spec = HamiltonianSpec::new(g.clone(), 1.0, delta).map_err(py_err)?;
    let gs = ground_state(&spec, &LanczosOptions::default()).map_err(py_err)?;
    let ggm = compute_ggm(&gs.state, s, Some(&g)).map_err(py_err)?;
    let out = to_py(py, &ggm)?;
    out.set_item("energy", gs.energy)?;
    out.set_item("degeneracy_warning", gs.degeneracy_warning)?;
    Ok(out)
}

/// GGM of the RVB state, by enumeration or by the rung recursion. Past
/// 24 spins only the recursion with the restricted strategy works.
#[pyfunction]
#[pyo3(signature = (legs, rungs, boundary = "periodic", strategy = "restricted", recursive = false))]
fn rvb_ggm<'py>(
    py: Python<'py>,
    legs: usize,
    rungs: usize,
    boundary: &str,
    strategy: &str,
    recursive: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let g = geometry(legs, rungs, boundary)?;
    let s = self::strategy(strategy)?;
    if recursive && g.n() > MAX_RVB_STATE_SITES && s == Strategy::Restricted2xL {
        let ggm = RecursionCache::new().restricted_ggm(&g).map_err(py_err)?;
        return to_py(py, &ggm);
    }
    let state = if recursive {
        build_rvb_recursive(&g)
    } else {
        build_rvb_enumerated(&g)
    }
    .map_err(py_err)?;
    let psi = state.normalized().map_err(py_err)?;
    let out = to_py(py, &compute_ggm(&psi, s, Some(&g)).map_err(py_err)?)?;
    out.set_item("covering_count", state.covering_count)?;
    Ok(out)
}

/// Exact ground state against the RVB state.
#[pyfunction]
#[pyo3(signature = (legs, rungs, boundary = "periodic", j = 1.0))]
fn compare<'py>(py: Python<'py>, legs: usize, rungs: usize, boundary: &str, j: f64) -> PyResult<Bound<'py, PyAny>> {
    let rec = compare_exact_rvb(&geometry(legs, rungs, boundary)?, j).map_err(py_err)?;
    to_py(py, &rec)
}

/// Fits `G = G_c ± k n^(-x)` to `(n, G)` points. `sign` is `"+"`, `"-"`
/// or `None` to read it from the data.
#[pyfunction]
#[pyo3(signature = (points, sign = None))]
fn fit_scaling<'py>(py: Python<'py>, points: Vec<(usize, f64)>, sign: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let hint: Option<Trend> = sign.map(str::parse).transpose().map_err(py_err)?;
    to_py(py, &fit(&points, hint).map_err(py_err)?)
}

#[pymodule(name = "ladder_ent")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ground_energy, m)?)?;
    m.add_function(wrap_pyfunction!(exact_ggm, m)?)?;
    m.add_function(wrap_pyfunction!(rvb_ggm, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
