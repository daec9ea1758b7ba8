//! Python module `workbench`: set families, sunflower search, the φ and S_*
//! solvers, the extremal constructions and the spectral checkers.

use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use workbench_core::construct;
use workbench_core::lowdim::{self, LayeredCandidate};
use workbench_core::search::{self, Budget, SearchResult, WitnessMode};
use workbench_core::spectral;
use workbench_core::sunflower::{self, CertJson, CoreConstraint};
use workbench_core::{Error, SetWord};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Budget(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn budget(nodes: Option<u64>, secs: Option<f64>) -> Budget {
    let d = Budget::default();
    Budget::new(nodes.unwrap_or(d.max_nodes), secs.unwrap_or(d.max_secs))
}

fn core(spec: &str) -> PyResult<CoreConstraint> {
    spec.parse().map_err(py_err)
}

/// An immutable family of subsets of `range(n)`.
#[pyclass(name = "Family", module = "workbench", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Hash)]
pub struct PyFamily {
    inner: workbench_core::Family,
}

impl From<workbench_core::Family> for PyFamily {
    fn from(inner: workbench_core::Family) -> Self {
        PyFamily { inner }
    }
}

#[pymethods]
impl PyFamily {
    #[new]
    fn new(n: usize, sets: Vec<Vec<usize>>) -> PyResult<Self> {
        let words = sets
            .into_iter()
            .map(SetWord::from_elements)
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?;
        Ok(workbench_core::Family::new(n, words).map_err(py_err)?.into())
    }

    /// Parses the text format (`n=<int> k=<int|->` header, one set per line).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(workbench_core::Family::parse(text).map_err(py_err)?.into())
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.ground_n()
    }

    #[getter]
    fn uniformity(&self) -> Option<usize> {
        self.inner.uniformity()
    }

    fn members(&self) -> Vec<Vec<usize>> {
        self.inner.members().iter().map(|m| m.elements()).collect()
    }

    fn support(&self) -> Vec<usize> {
        self.inner.support().elements()
    }

    fn layer(&self, h: usize) -> Self {
        self.inner.layer(h).into()
    }

    fn shadow(&self, h: usize) -> Self {
        self.inner.shadow(h).0.into()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, set: Vec<usize>) -> PyResult<bool> {
        Ok(self.inner.contains(SetWord::from_elements(set).map_err(py_err)?))
    }

    fn __repr__(&self) -> String {
        format!("Family(n={}, members={:?})", self.inner.ground_n(), self.members())
    }
}

/// A sunflower with `s` petals and an allowed core, as a dict, or None.
#[pyfunction]
#[pyo3(signature = (family, s, core_spec = "any"))]
fn find_sunflower<'py>(py: Python<'py>, family: &PyFamily, s: usize, core_spec: &str) -> PyResult<Option<Bound<'py, PyDict>>> {
    let cc = core(core_spec)?;
    let Some(cert) = sunflower::find_sunflower(&family.inner, s, cc).map_err(py_err)? else {
        return Ok(None);
    };
    let j = CertJson::new(&family.inner, &cert, s, cc);
    let d = PyDict::new(py);
    d.set_item("s", j.s)?;
    d.set_item("core", j.core)?;
    d.set_item("members", j.members)?;
    d.set_item("indices", cert.member_indices)?;
    d.set_item("constraint", cc.to_string())?;
    Ok(Some(d))
}

#[pyfunction]
#[pyo3(signature = (family, s, core_spec = "any"))]
fn is_admissible(family: &PyFamily, s: usize, core_spec: &str) -> PyResult<bool> {
    sunflower::is_admissible(&family.inner, s, core(core_spec)?).map_err(py_err)
}

fn result_dict<'py>(py: Python<'py>, r: &SearchResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("best_size", r.best_size)?;
    d.set_item("status", if r.is_proved() { "proved" } else { "lower_bound_only" })?;
    d.set_item("upper_bound", r.upper_bound)?;
    d.set_item("witnesses", r.witnesses.iter().cloned().map(PyFamily::from).collect::<Vec<_>>())?;
    d.set_item("witness_count", r.witness_count)?;
    d.set_item("witnesses_complete", r.witnesses_complete)?;
    d.set_item("nodes", r.nodes)?;
    Ok(d)
}

/// Largest `t`-uniform family with no `s`-petal sunflower.
#[pyfunction]
#[pyo3(signature = (s, t, all_witnesses = false, budget_nodes = None, budget_secs = None))]
fn phi<'py>(
    py: Python<'py>,
    s: usize,
    t: usize,
    all_witnesses: bool,
    budget_nodes: Option<u64>,
    budget_secs: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = if all_witnesses { WitnessMode::All } else { WitnessMode::Value };
    let b = budget(budget_nodes, budget_secs);
    let r = py.detach(|| search::phi(s, t, b, mode)).map_err(py_err)?;
    result_dict(py, &r)
}

/// Largest k-uniform family on `range(n)` with no `s`-sunflower whose core
/// has `t - 1` elements.
#[pyfunction]
#[pyo3(signature = (n, k, s, t, budget_nodes = None, budget_secs = None))]
fn oracle<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    s: usize,
    t: usize,
    budget_nodes: Option<u64>,
    budget_secs: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let b = budget(budget_nodes, budget_secs);
    let r = py.detach(|| search::duke_erdos_oracle(n, k, s, t, b)).map_err(py_err)?;
    result_dict(py, &r)
}

/// Lexicographic optimum of the layered problem.
#[pyfunction]
#[pyo3(signature = (s, t, budget_nodes = None, budget_secs = None))]
fn solve_sstar<'py>(
    py: Python<'py>,
    s: usize,
    t: usize,
    budget_nodes: Option<u64>,
    budget_secs: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let b = budget(budget_nodes, budget_secs);
    let sol = py.detach(|| lowdim::solve_sstar(s, t, b)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("phitilde", sol.phitilde.components().to_vec())?;
    d.set_item("optima", sol.optima.iter().map(|c| PyFamily::from(c.family.clone())).collect::<Vec<_>>())?;
    d.set_item("count_truncated", sol.count_truncated)?;
    d.set_item("optimal", sol.optimal)?;
    d.set_item("phi", sol.phi.best_size)?;
    Ok(d)
}

fn candidate(family: &PyFamily, s: usize, t: usize, phi_st: usize) -> LayeredCandidate {
    LayeredCandidate::new(family.inner.clone(), s, t, phi_st)
}

#[pyfunction]
fn phitilde(family: &PyFamily, s: usize, t: usize, phi_st: usize) -> PyResult<Vec<BigUint>> {
    Ok(lowdim::phitilde(&candidate(family, s, t, phi_st)).map_err(py_err)?.components().to_vec())
}

#[pyfunction]
fn gis_count(family: &PyFamily, s: usize, t: usize, phi_st: usize, i: usize) -> PyResult<u64> {
    lowdim::gis_count(&candidate(family, s, t, phi_st), i).map_err(py_err)
}

#[pyfunction]
fn build_basic(family: &PyFamily, n: usize, k: usize) -> PyResult<PyFamily> {
    Ok(construct::build_basic(&family.inner, n, k).map_err(py_err)?.into())
}

/// `{F : F ∩ support(S^(t)) ∈ S}` for the layered family `family`.
#[pyfunction]
fn build_fs(family: &PyFamily, t: usize, n: usize, k: usize) -> PyResult<PyFamily> {
    Ok(construct::build_fs(&candidate(family, 0, t, 1), n, k).map_err(py_err)?.into())
}

#[pyfunction]
fn count_fs(family: &PyFamily, t: usize, n: usize, k: usize) -> PyResult<BigUint> {
    construct::count_fs(&candidate(family, 0, t, 1), n, k).map_err(py_err)
}

#[pyfunction]
fn build_theorem13(s: usize, n: usize, k: usize) -> PyResult<PyFamily> {
    Ok(construct::build_theorem13(s, n, k).map_err(py_err)?.into())
}

/// Second smallest Laplacian eigenvalue of the Johnson graph J(n, m).
#[pyfunction]
fn johnson_lambda2(n: usize, m: usize) -> PyResult<f64> {
    Ok(spectral::lambda2(&spectral::johnson(n, m).map_err(py_err)?).value)
}

/// Cheeger bound on J(n, m) for the vertices (m-subsets) in `subset`.
#[pyfunction]
fn cheeger_check(n: usize, m: usize, subset: Vec<Vec<usize>>) -> PyResult<bool> {
    let g = spectral::johnson(n, m).map_err(py_err)?;
    let idx = subset
        .into_iter()
        .map(|s| {
            let w = SetWord::from_elements(s).map_err(py_err)?;
            g.labels().binary_search(&w).map_err(|_| PyValueError::new_err(format!("{{{w}}} is not a vertex of J({n},{m})")))
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(spectral::cheeger_check(&g, &idx).map_err(py_err)?.holds)
}

#[pyfunction]
fn kk_check(family: &PyFamily, h: usize) -> PyResult<bool> {
    Ok(spectral::kk_check(&family.inner, h).map_err(py_err)?.holds)
}

#[pymodule]
fn workbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFamily>()?;
    m.add_function(wrap_pyfunction!(find_sunflower, m)?)?;
    m.add_function(wrap_pyfunction!(is_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sstar, m)?)?;
    m.add_function(wrap_pyfunction!(phitilde, m)?)?;
    m.add_function(wrap_pyfunction!(gis_count, m)?)?;
    m.add_function(wrap_pyfunction!(build_basic, m)?)?;
    m.add_function(wrap_pyfunction!(build_fs, m)?)?;
    m.add_function(wrap_pyfunction!(count_fs, m)?)?;
    m.add_function(wrap_pyfunction!(build_theorem13, m)?)?;
    m.add_function(wrap_pyfunction!(johnson_lambda2, m)?)?;
    m.add_function(wrap_pyfunction!(cheeger_check, m)?)?;
    m.add_function(wrap_pyfunction!(kk_check, m)?)?;
    Ok(())
}
