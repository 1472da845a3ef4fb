//! Python bindings: the invariant systems with their point operations, and
//! the job pipeline behind the command line, returning artifacts as plain
//! Python objects.

use std::str::FromStr;

use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict, PyList};
use pyo3::IntoPyObjectExt;

use invlift::error::Error;
use invlift::invariants::{Family, InvariantSystem, Membership};
use invlift::jobs::{self, JobKind, JobOutput, JobSpec};
use invlift::scalar::Scalar;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Input(_) | Error::UnsupportedFamily(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_family(text: &str) -> PyResult<Family> {
    match text {
        "symmetric_complex" => Ok(Family::SymmetricComplex),
        "signed_perm_real" => Ok(Family::SignedPermReal),
        "symmetric_real_trace_zero" => Ok(Family::SymmetricRealTraceZero),
        other => Err(PyValueError::new_err(format!(
            "unknown family {other:?}; choose symmetric_complex, signed_perm_real, \
             or symmetric_real_trace_zero"
        ))),
    }
}

fn membership_name(m: Membership) -> &'static str {
    match m {
        Membership::Inside => "inside",
        Membership::Outside => "outside",
        Membership::Indeterminate => "indeterminate",
    }
}

/// Exact coordinate from an int, a float (read as the exact binary
/// rational it stores), or a rational literal like "-3/4".
fn scalar_from_py(v: &Bound<'_, PyAny>) -> PyResult<Scalar> {
    if let Ok(s) = v.extract::<String>() {
        let q = BigRational::from_str(s.trim()).map_err(|e| {
            PyValueError::new_err(format!("expected an integer or p/q rational, got {s:?}: {e}"))
        })?;
        return Ok(Scalar::from_rational(q));
    }
    if let Ok(i) = v.extract::<i64>() {
        return Ok(Scalar::from_int(i));
    }
    if let Ok(f) = v.extract::<f64>() {
        let q = BigRational::from_float(f)
            .ok_or_else(|| PyValueError::new_err(format!("coordinate {f} is not finite")))?;
        return Ok(Scalar::from_rational(q));
    }
    Err(PyTypeError::new_err(
        "expected an int, a float, or a rational string",
    ))
}

fn point_from_py(v: &Bound<'_, PyAny>) -> PyResult<Vec<Scalar>> {
    v.try_iter()?.map(|item| scalar_from_py(&item?)).collect()
}

fn complex_list<'py>(py: Python<'py>, vals: &[Scalar]) -> PyResult<Bound<'py, PyList>> {
    let out = PyList::empty(py);
    for v in vals {
        let c = v.to_c64();
        out.append(PyComplex::from_doubles(py, c.re, c.im))?;
    }
    Ok(out)
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    match v {
        serde_json::Value::Null => Ok(py.None()),
        serde_json::Value::Bool(b) => b.into_py_any(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else if let Some(u) = n.as_u64() {
                u.into_py_any(py)
            } else {
                n.as_f64()
                    .expect("JSON number is integral or finite")
                    .into_py_any(py)
            }
        }
        serde_json::Value::String(s) => s.into_py_any(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn py_to_json(v: &Bound<'_, PyAny>) -> PyResult<serde_json::Value> {
    if v.is_none() {
        return Ok(serde_json::Value::Null);
    }
    if let Ok(b) = v.cast::<pyo3::types::PyBool>() {
        return Ok(serde_json::Value::Bool(b.is_true()));
    }
    if let Ok(i) = v.extract::<i64>() {
        return Ok(serde_json::Value::from(i));
    }
    if let Ok(f) = v.extract::<f64>() {
        return Ok(serde_json::Value::from(f));
    }
    if let Ok(s) = v.extract::<String>() {
        return Ok(serde_json::Value::String(s));
    }
    if let Ok(d) = v.cast::<PyDict>() {
        let mut map = serde_json::Map::new();
        for (k, item) in d.iter() {
            map.insert(k.extract::<String>()?, py_to_json(&item)?);
        }
        return Ok(serde_json::Value::Object(map));
    }
    if let Ok(iter) = v.try_iter() {
        let items: PyResult<Vec<serde_json::Value>> =
            iter.map(|item| py_to_json(&item?)).collect();
        return Ok(serde_json::Value::Array(items?));
    }
    Err(PyTypeError::new_err(format!(
        "cannot encode {} as JSON",
        v.get_type().name()?
    )))
}

fn output_to_py(py: Python<'_>, out: &JobOutput) -> PyResult<Py<PyAny>> {
    let dict = PyDict::new(py);
    dict.set_item("artifact", out.artifact.name())?;
    dict.set_item("summary", &out.summary)?;
    dict.set_item("result", json_to_py(py, &out.json)?)?;
    dict.into_py_any(py)
}

fn run_to_py(py: Python<'_>, spec: &JobSpec) -> PyResult<Py<PyAny>> {
    let out = jobs::run_job(spec).map_err(py_err)?;
    output_to_py(py, &out)
}

/// One of the supported group actions, fixed family and dimension.
#[pyclass(frozen)]
struct System {
    inner: InvariantSystem,
}

#[pymethods]
impl System {
    #[new]
    fn new(family: &str, n: usize) -> PyResult<Self> {
        let inner = InvariantSystem::new(parse_family(family)?, n).map_err(py_err)?;
        Ok(System { inner })
    }

    #[getter]
    fn family(&self) -> String {
        self.inner.family.to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn num_invariants(&self) -> usize {
        self.inner.num_invariants()
    }

    #[getter]
    fn fiber_degree(&self) -> usize {
        self.inner.fiber_degree()
    }

    #[getter]
    fn degrees(&self) -> Vec<u32> {
        self.inner.degrees()
    }

    #[getter]
    fn real(&self) -> bool {
        self.inner.is_real()
    }

    fn generators(&self) -> Vec<String> {
        self.inner.generator_strings()
    }

    /// Evaluate the generator tuple at a point of the ambient space.
    fn sigma<'py>(&self, py: Python<'py>, point: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyList>> {
        let v = point_from_py(point)?;
        let vals = self.inner.sigma_eval(&v).map_err(py_err)?;
        complex_list(py, &vals)
    }

    /// Certified image test for the real families.
    fn membership(&self, z: &Bound<'_, PyAny>) -> PyResult<String> {
        let zv = point_from_py(z)?;
        let verdict = self.inner.membership_test(&zv).map_err(py_err)?;
        Ok(membership_name(verdict).to_string())
    }

    /// Fiber over an invariant point, as midpoints of the isolating balls.
    #[pyo3(signature = (z, precision=128))]
    fn fiber<'py>(
        &self,
        py: Python<'py>,
        z: &Bound<'py, PyAny>,
        precision: u32,
    ) -> PyResult<Bound<'py, PyList>> {
        let zv = point_from_py(z)?;
        let roots = self
            .inner
            .roots_from_invariants(&zv, precision)
            .map_err(py_err)?;
        complex_list(py, &roots)
    }

    fn __repr__(&self) -> String {
        format!("System({:?}, {})", self.inner.family.to_string(), self.inner.n)
    }
}

fn lift_spec(
    kind: JobKind,
    system: &System,
    components: Vec<String>,
    trunc: Option<u32>,
    precision: Option<u32>,
    budget: Option<usize>,
) -> JobSpec {
    let mut spec = JobSpec::new(kind);
    spec.family = Some(system.inner.family);
    spec.n = Some(system.inner.n);
    spec.components = components;
    spec.trunc = trunc;
    spec.precision = precision;
    spec.budget = budget;
    spec
}

/// Lift invariant series in one parameter to per-chart root curves.
#[pyfunction]
#[pyo3(signature = (system, components, *, trunc=None, precision=None, budget=None))]
fn lift_curve(
    py: Python<'_>,
    system: PyRef<'_, System>,
    components: Vec<String>,
    trunc: Option<u32>,
    precision: Option<u32>,
    budget: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let spec = lift_spec(JobKind::LiftCurve, &system, components, trunc, precision, budget);
    run_to_py(py, &spec)
}

/// Lift invariant series in two parameters through desingularization.
#[pyfunction]
#[pyo3(signature = (system, components, *, trunc=None, precision=None, budget=None))]
fn lift_surface(
    py: Python<'_>,
    system: PyRef<'_, System>,
    components: Vec<String>,
    trunc: Option<u32>,
    precision: Option<u32>,
    budget: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let spec = lift_spec(JobKind::LiftSurface, &system, components, trunc, precision, budget);
    run_to_py(py, &spec)
}

/// Desingularize tracked plane polynomials by point blow-ups.
#[pyfunction]
#[pyo3(signature = (components, *, budget=None, precision=None, radius=None))]
fn resolve(
    py: Python<'_>,
    components: Vec<String>,
    budget: Option<usize>,
    precision: Option<u32>,
    radius: Option<String>,
) -> PyResult<Py<PyAny>> {
    let mut spec = JobSpec::new(JobKind::Resolve);
    spec.components = components;
    spec.budget = budget;
    spec.precision = precision;
    spec.radius = radius;
    run_to_py(py, &spec)
}

/// Build a measurable section of the orbit map on a dyadic grid.
#[pyfunction]
#[pyo3(signature = (system, *, radius=None, level=None, precision=None))]
fn section(
    py: Python<'_>,
    system: PyRef<'_, System>,
    radius: Option<String>,
    level: Option<u32>,
    precision: Option<u32>,
) -> PyResult<Py<PyAny>> {
    let mut spec = JobSpec::new(JobKind::Section);
    spec.family = Some(system.inner.family);
    spec.n = Some(system.inner.n);
    spec.radius = radius;
    spec.level = level;
    spec.precision = precision;
    run_to_py(py, &spec)
}

/// Lift, glue, and run the full verification report.
#[pyfunction]
#[pyo3(signature = (system, components, *, nvars=1, grid_levels=None, tol=None,
                    trunc=None, precision=None, budget=None))]
#[allow(clippy::too_many_arguments)]
fn verify_lift(
    py: Python<'_>,
    system: PyRef<'_, System>,
    components: Vec<String>,
    nvars: u8,
    grid_levels: Option<Vec<u32>>,
    tol: Option<f64>,
    trunc: Option<u32>,
    precision: Option<u32>,
    budget: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let mut spec = lift_spec(JobKind::VerifyLift, &system, components, trunc, precision, budget);
    spec.nvars = Some(nvars);
    spec.grid_levels = grid_levels;
    spec.tol = tol;
    run_to_py(py, &spec)
}

/// Run one job described as a dict or a JSON string, exactly as the
/// command line would.
#[pyfunction]
fn run_job(py: Python<'_>, spec: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let parsed: JobSpec = if let Ok(text) = spec.extract::<String>() {
        JobSpec::from_json(&text).map_err(py_err)?
    } else {
        serde_json::from_value(py_to_json(spec)?)
            .map_err(|e| PyValueError::new_err(format!("bad job description: {e}")))?
    };
    run_to_py(py, &parsed)
}

#[pymodule]
fn invlift_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<System>()?;
    m.add_function(wrap_pyfunction!(lift_curve, m)?)?;
    m.add_function(wrap_pyfunction!(lift_surface, m)?)?;
    m.add_function(wrap_pyfunction!(resolve, m)?)?;
    m.add_function(wrap_pyfunction!(section, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lift, m)?)?;
    m.add_function(wrap_pyfunction!(run_job, m)?)?;
    Ok(())
}
