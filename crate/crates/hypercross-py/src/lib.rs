//! Python bindings: cross specifications, counting, bounds, ε-dimensions and the SPDE demo.
//!
//! Reports come back as plain Python dicts and lists; counts are Python ints of any size.

use pyo3::create_exception;
use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use engine::approx::{eps_dimension as eps_dim, log_grid, rate_study as study};
use engine::bounds::{analytic_constant as analytic_m, korobov_constants as korobov_c, sandwich_report as sandwich};
use engine::spde::{run_demo, SpdeConfig};
use engine::{ErrorKind, MultiIndex, SparseIndex, ValidatedSpec};

create_exception!(hypercross, HypothesisError, PyValueError, "A theorem hypothesis does not hold.");

fn to_py_err(e: engine::Error) -> PyErr {
    match e.kind() {
        ErrorKind::Validation => PyValueError::new_err(e.to_string()),
        ErrorKind::Hypothesis => HypothesisError::new_err(e.to_string()),
        ErrorKind::Overflow => PyOverflowError::new_err(e.to_string()),
    }
}

trait IntoPyResult<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for engine::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

/// Converts any serializable report into Python objects through JSON.
fn to_python<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A validated cross specification.
#[pyclass(name = "CrossSpec", module = "hypercross", frozen)]
struct PyCrossSpec {
    inner: ValidatedSpec,
}

fn index(m: u32, k: Vec<u64>, s: Vec<(u32, u64)>) -> PyResult<MultiIndex> {
    if k.len() != m as usize {
        return Err(PyValueError::new_err(format!("k must have {m} entries")));
    }
    Ok(MultiIndex::new(k, SparseIndex::new(s).py_err()?))
}

#[pymethods]
impl PyCrossSpec {
    /// Parses and validates a JSON specification.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = engine::CrossSpec::from_json(text).py_err()?.validate().py_err()?;
        Ok(Self { inner })
    }

    /// One of the reference specs `"k1"`, `"k2"`, `"a1"`, `"a2"`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        use engine::fixtures::*;
        let inner = match name {
            "k1" => spec_k1(),
            "k2" => spec_k2(),
            "a1" => spec_a1(),
            "a2" => spec_a2(),
            other => return Err(PyValueError::new_err(format!("unknown fixture `{other}`"))),
        };
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// The same spec with other sign conventions.
    fn with_signs(&self, x_signed: bool, y_signed: bool) -> PyResult<Self> {
        let inner = self.inner.spec().clone().with_signs(x_signed, y_signed).validate().py_err()?;
        Ok(Self { inner })
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn variant(&self) -> &'static str {
        if self.inner.is_korobov() {
            "korobov"
        } else {
            "analytic"
        }
    }

    #[getter]
    fn x_signed(&self) -> bool {
        self.inner.x_signed
    }

    #[getter]
    fn y_signed(&self) -> bool {
        self.inner.y_signed
    }

    /// Whether the upper-bound theorem applies, and why not if it does not.
    #[getter]
    fn hypotheses(&self) -> (bool, Option<String>) {
        let h = self.inner.hypotheses();
        (h.upper_bound, h.reason.clone())
    }

    /// Rate `r_j`, or `None` past the end of a finite sequence.
    fn rate(&self, j: u32) -> Option<f64> {
        self.inner.rate(j)
    }

    /// Log of the cross weight at `(k, s)`; `s` is a list of `(coordinate, value)` pairs.
    #[pyo3(signature = (k, s=Vec::new()))]
    fn log_weight(&self, k: Vec<u64>, s: Vec<(u32, u64)>) -> PyResult<f64> {
        self.inner.log_weight(&index(self.inner.m, k, s)?).py_err()
    }

    #[pyo3(signature = (k, s, t))]
    fn contains(&self, k: Vec<u64>, s: Vec<(u32, u64)>, t: f64) -> PyResult<bool> {
        self.inner.contains(&index(self.inner.m, k, s)?, t).py_err()
    }

    fn active_dimension(&self, t: f64) -> PyResult<u32> {
        self.inner.active_dimension(t).py_err()
    }

    fn __repr__(&self) -> String {
        format!("CrossSpec({})", self.inner.to_json())
    }
}

/// Exact cardinality: `{"total", "records", "active_dim", "T"}`.
#[pyfunction]
#[pyo3(signature = (spec, t, dim_cap=None))]
fn count_cross(py: Python<'_>, spec: &PyCrossSpec, t: f64, dim_cap: Option<u32>) -> PyResult<Py<PyAny>> {
    let count = py.detach(|| engine::count_cross(&spec.inner, t, dim_cap)).py_err()?;
    to_python(py, &count)
}

/// Cardinality by scanning a bounding box.
#[pyfunction]
fn brute_force_count(py: Python<'_>, spec: &PyCrossSpec, t: f64) -> PyResult<Py<PyAny>> {
    let count = py.detach(|| engine::brute_force_count(&spec.inner, t, None)).py_err()?;
    to_python(py, &count)
}

/// Compressed records `{"s": [[j, v], ...], "K", "s_sign_multiplicity"}` in traversal order.
#[pyfunction]
#[pyo3(signature = (spec, t, dim_cap=None))]
fn enumerate_records(py: Python<'_>, spec: &PyCrossSpec, t: f64, dim_cap: Option<u32>) -> PyResult<Py<PyAny>> {
    let records = py.detach(|| engine::cross_records(&spec.inner, t, dim_cap)).py_err()?;
    to_python(py, &records)
}

/// Unsigned indices as `(k, s)` pairs, `s` a list of `(coordinate, value)` pairs.
#[pyfunction]
fn expand_cross(spec: &PyCrossSpec, t: f64) -> PyResult<Vec<(Vec<u64>, Vec<(u32, u64)>)>> {
    engine::enumerate_cross(&spec.inner, t, None)
        .py_err()?
        .expand()
        .map(|idx| idx.map(|i| (i.k, i.s.entries().to_vec())))
        .collect::<engine::Result<_>>()
        .py_err()
}

/// Lower bound, exact count and certified upper bound at `t`.
#[pyfunction]
fn sandwich_report(py: Python<'_>, spec: &PyCrossSpec, t: f64) -> PyResult<Py<PyAny>> {
    let report = py.detach(|| sandwich(&spec.inner, t)).py_err()?;
    to_python(py, &report)
}

#[pyfunction]
fn korobov_constants(py: Python<'_>, spec: &PyCrossSpec) -> PyResult<Py<PyAny>> {
    to_python(py, &korobov_c(&spec.inner).py_err()?)
}

#[pyfunction]
fn analytic_constant(spec: &PyCrossSpec) -> PyResult<f64> {
    analytic_m(&spec.inner).py_err()
}

/// `{"n", "bracket"}` for the ε-dimension.
#[pyfunction]
#[pyo3(signature = (spec, eps, dim_cap=None))]
fn eps_dimension(py: Python<'_>, spec: &PyCrossSpec, eps: f64, dim_cap: Option<u32>) -> PyResult<Py<PyAny>> {
    let dim = py.detach(|| eps_dim(&spec.inner, eps, dim_cap)).py_err()?;
    to_python(py, &dim)
}

/// ε-dimensions on a logarithmic grid from `first` down to `last`, with the fitted slope.
#[pyfunction]
fn rate_study(py: Python<'_>, spec: &PyCrossSpec, first: f64, last: f64, points: usize) -> PyResult<Py<PyAny>> {
    let grid = log_grid(first, last, points).py_err()?;
    let report = py.detach(|| study(&spec.inner, &grid)).py_err()?;
    to_python(py, &report)
}

/// Number of `s ∈ Z^d_+` with `Σ r_j s_j ≤ log_budget`.
#[pyfunction]
fn simplex_count(rates: Vec<f64>, log_budget: f64) -> PyResult<u128> {
    engine::simplex_count(&rates, log_budget).py_err()
}

/// Runs the diffusion demo. `config` is a JSON object; missing fields take defaults.
#[pyfunction]
#[pyo3(signature = (config=None, max_degree=3, n_q=None))]
fn spde_demo(py: Python<'_>, config: Option<&str>, max_degree: usize, n_q: Option<usize>) -> PyResult<Py<PyAny>> {
    let config: SpdeConfig = match config {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => SpdeConfig::default(),
    };
    let report = py.detach(|| run_demo(&config, max_degree, n_q)).py_err()?;
    to_python(py, &report)
}

#[pymodule]
fn hypercross(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCrossSpec>()?;
    m.add("HypothesisError", m.py().get_type::<HypothesisError>())?;
    m.add("MEMBERSHIP_TOL", engine::MEMBERSHIP_TOL)?;
    m.add_function(wrap_pyfunction!(count_cross, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_count, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_records, m)?)?;
    m.add_function(wrap_pyfunction!(expand_cross, m)?)?;
    m.add_function(wrap_pyfunction!(sandwich_report, m)?)?;
    m.add_function(wrap_pyfunction!(korobov_constants, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_constant, m)?)?;
    m.add_function(wrap_pyfunction!(eps_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(rate_study, m)?)?;
    m.add_function(wrap_pyfunction!(simplex_count, m)?)?;
    m.add_function(wrap_pyfunction!(spde_demo, m)?)?;
    Ok(())
}
