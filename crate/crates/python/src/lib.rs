//! Python bindings for `ecmfit`.
//!
//! ```python
//! import pyecmfit as ef
//! problem = ef.FitProblem.synthetic()
//! report = ef.fit(problem, "pso", seed=42)
//! print(report.mse, report.best_params)
//! ```

use std::collections::BTreeMap;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use ecmfit::bench::{self, LoadOptions};
use ecmfit::dataset::DischargeSegment;
use ecmfit::ecm;
use ecmfit::optimize::{self, Method, OptimizerConfig};
use ecmfit::synthetic;

fn to_py(err: ecmfit::Error) -> PyErr {
    match err {
        ecmfit::Error::Io { .. } => PyOSError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Second-order RC circuit constants (ohm, farad).
#[pyclass(name = "EcmParams", from_py_object)]
#[derive(Clone)]
struct PyEcmParams(ecm::EcmParams);

#[pymethods]
impl PyEcmParams {
    #[new]
    fn new(r0: f64, r1: f64, c1: f64, r2: f64, c2: f64) -> PyResult<Self> {
        ecm::EcmParams::new(r0, r1, c1, r2, c2)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn r0(&self) -> f64 {
        self.0.r0
    }

    #[getter]
    fn r1(&self) -> f64 {
        self.0.r1
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.0.c1
    }

    #[getter]
    fn r2(&self) -> f64 {
        self.0.r2
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.0.c2
    }

    #[getter]
    fn tau1(&self) -> f64 {
        self.0.tau1()
    }

    #[getter]
    fn tau2(&self) -> f64 {
        self.0.tau2()
    }

    /// Branches ordered so that tau1 <= tau2.
    fn canonical(&self) -> Self {
        Self(self.0.canonical())
    }

    fn swapped(&self) -> Self {
        Self(self.0.swapped())
    }

    fn to_list(&self) -> Vec<f64> {
        self.0.to_array().to_vec()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "EcmParams(r0={}, r1={}, c1={}, r2={}, c2={})",
            p.r0, p.r1, p.c1, p.r2, p.c2
        )
    }
}

/// Nominal capacity (Ah) and starting state of charge.
#[pyclass(name = "CellSpec", from_py_object)]
#[derive(Clone)]
struct PyCellSpec(ecm::CellSpec);

#[pymethods]
impl PyCellSpec {
    #[new]
    #[pyo3(signature = (capacity, soc_init=1.0))]
    fn new(capacity: f64, soc_init: f64) -> PyResult<Self> {
        ecm::CellSpec::new(capacity, soc_init)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn capacity(&self) -> f64 {
        self.0.capacity
    }

    #[getter]
    fn soc_init(&self) -> f64 {
        self.0.soc_init
    }

    fn __repr__(&self) -> String {
        format!(
            "CellSpec(capacity={}, soc_init={})",
            self.0.capacity, self.0.soc_init
        )
    }
}

/// Open-circuit voltage polynomial in SOC, lowest degree first.
#[pyclass(name = "OcvCurve", from_py_object)]
#[derive(Clone)]
struct PyOcvCurve(ecm::OcvCurve);

#[pymethods]
impl PyOcvCurve {
    #[new]
    #[pyo3(signature = (coefficients, valid_range=(0.0, 1.0)))]
    fn new(coefficients: Vec<f64>, valid_range: (f64, f64)) -> PyResult<Self> {
        ecm::OcvCurve::new(coefficients, valid_range)
            .map(Self)
            .map_err(to_py)
    }

    /// The degree-5 curve used by the synthetic problems.
    #[staticmethod]
    fn reference() -> Self {
        Self(synthetic::reference_ocv())
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        ecm::OcvCurve::read(path).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ecm::OcvCurve::parse(text).map(Self).map_err(to_py)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn write(&self, path: &str) -> PyResult<()> {
        self.0.write(path).map_err(to_py)
    }

    fn __call__(&self, soc: f64) -> f64 {
        self.0.eval(soc)
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.0.coefficients().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    #[getter]
    fn valid_range(&self) -> (f64, f64) {
        self.0.valid_range()
    }

    fn __repr__(&self) -> String {
        format!("OcvCurve({:?})", self.0.coefficients())
    }
}

/// One discharge window plus its OCV handling and search box.
#[pyclass(name = "FitProblem", from_py_object)]
#[derive(Clone)]
struct PyFitProblem(optimize::FitProblem);

#[pymethods]
impl PyFitProblem {
    /// Without `ocv` the OCV polynomial of `degree` is identified jointly.
    #[new]
    #[pyo3(signature = (time, current, voltage, capacity, soc_start=1.0, ocv=None, degree=5))]
    fn new(
        time: Vec<f64>,
        current: Vec<f64>,
        voltage: Vec<f64>,
        capacity: f64,
        soc_start: f64,
        ocv: Option<PyOcvCurve>,
        degree: usize,
    ) -> PyResult<Self> {
        let seg = DischargeSegment::new("python", 1, time, current, voltage, soc_start, capacity)
            .map_err(to_py)?;
        let problem = match ocv {
            Some(c) => optimize::FitProblem::fixed_ocv(seg, c.0),
            None => optimize::FitProblem::joint_ocv(seg, degree),
        };
        problem.map(Self).map_err(to_py)
    }

    /// Noiseless 1 A, 300 s discharge at 1 Hz from the reference circuit
    /// and OCV, with the OCV held fixed.
    #[staticmethod]
    #[pyo3(signature = (params=None))]
    fn synthetic(params: Option<PyEcmParams>) -> PyResult<Self> {
        let params = params.map_or_else(synthetic::reference_params, |p| p.0);
        let ocv = synthetic::reference_ocv();
        let cell = ecm::CellSpec::new(2.0, 1.0).map_err(to_py)?;
        let seg = synthetic::constant_current_segment(&params, &ocv, &cell, 1.0, 300.0, 1.0)
            .map_err(to_py)?;
        optimize::FitProblem::fixed_ocv(seg, ocv)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn is_joint(&self) -> bool {
        self.0.is_joint()
    }

    #[getter]
    fn cycle_index(&self) -> i64 {
        self.0.segment().cycle_index
    }

    #[getter]
    fn time(&self) -> Vec<f64> {
        self.0.segment().time.clone()
    }

    #[getter]
    fn current(&self) -> Vec<f64> {
        self.0.segment().current.clone()
    }

    #[getter]
    fn voltage(&self) -> Vec<f64> {
        self.0.segment().voltage.clone()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.0.space().lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.0.space().upper().to_vec()
    }

    /// Mean squared voltage residual at `theta`.
    fn mse(&self, theta: Vec<f64>) -> PyResult<f64> {
        optimize::objective_mse(&theta, &self.0).map_err(to_py)
    }

    fn predict(&self, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.predict(&theta).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.segment().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "FitProblem(samples={}, dim={}, joint={})",
            self.0.segment().len(),
            self.0.dim(),
            self.0.is_joint()
        )
    }
}

/// Outcome of one identification run.
#[pyclass(name = "FitReport", from_py_object)]
#[derive(Clone)]
struct PyFitReport(optimize::FitReport);

#[pymethods]
impl PyFitReport {
    #[getter]
    fn method(&self) -> &'static str {
        self.0.method.key()
    }

    #[getter]
    fn best_params(&self) -> PyEcmParams {
        PyEcmParams(self.0.best_params)
    }

    #[getter]
    fn ocv_coefficients(&self) -> Option<Vec<f64>> {
        self.0.ocv_coefficients.clone()
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.0.theta.clone()
    }

    #[getter]
    fn mse(&self) -> f64 {
        self.0.mse
    }

    #[getter]
    fn execution_time(&self) -> f64 {
        self.0.execution_time
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn evaluations(&self) -> usize {
        self.0.evaluations
    }

    #[getter]
    fn trace(&self) -> Vec<f64> {
        self.0.trace.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    /// Equality ignoring wall-clock time.
    fn same_result(&self, other: &Self) -> bool {
        self.0.same_result(&other.0)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        optimize::FitReport::from_json(text)
            .map(Self)
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "FitReport(method={}, mse={:e}, converged={})",
            self.0.method, self.0.mse, self.0.converged
        )
    }
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse::<Method>().map_err(to_py)
}

fn optimizer_config(config: Option<BTreeMap<String, String>>) -> PyResult<OptimizerConfig> {
    let c = match config {
        Some(kv) => OptimizerConfig::from_kv(&kv).map_err(to_py)?,
        None => OptimizerConfig::default(),
    };
    c.validate().map_err(to_py)?;
    Ok(c)
}

/// Simulate terminal voltage for a current profile (discharge positive).
#[pyfunction]
fn simulate(
    params: &PyEcmParams,
    ocv: &PyOcvCurve,
    cell: &PyCellSpec,
    time: Vec<f64>,
    current: Vec<f64>,
) -> PyResult<Vec<f64>> {
    ecm::simulate_terminal_voltage(&params.0, &ocv.0, &cell.0, &time, &current)
        .map(|s| s.voltage)
        .map_err(to_py)
}

/// Least-squares polynomial through (soc, voltage) points.
#[pyfunction]
fn fit_ocv(points: Vec<(f64, f64)>, degree: usize) -> PyResult<PyOcvCurve> {
    ecm::fit_ocv(&points, degree).map(PyOcvCurve).map_err(to_py)
}

/// Run one optimizer. `config` takes the same `key=value` pairs as the
/// command-line configuration file, e.g. `{"pso.swarm_size": "40"}`.
#[pyfunction]
#[pyo3(signature = (problem, method, seed=42, workers=1, config=None))]
fn fit(
    py: Python<'_>,
    problem: &PyFitProblem,
    method: &str,
    seed: u64,
    workers: usize,
    config: Option<BTreeMap<String, String>>,
) -> PyResult<PyFitReport> {
    let method = parse_method(method)?;
    let config = optimizer_config(config)?;
    let problem = problem.0.clone();
    py.detach(move || optimize::fit(method, &problem, &config, seed, workers))
        .map(PyFitReport)
        .map_err(to_py)
}

/// Exhaustive log-spaced grid search; returns `(theta, mse)`.
#[pyfunction]
#[pyo3(signature = (problem, points_per_dim=6))]
fn grid_oracle(problem: &PyFitProblem, points_per_dim: usize) -> PyResult<(Vec<f64>, f64)> {
    optimize::grid_oracle(&problem.0, points_per_dim)
        .map(|g| (g.theta, g.mse))
        .map_err(to_py)
}

/// One problem per usable discharge cycle of a cycler CSV.
#[pyfunction]
#[pyo3(signature = (path, capacity, soc_init=1.0, ocv=None, cell_id="cell"))]
fn load_problems(
    path: &str,
    capacity: f64,
    soc_init: f64,
    ocv: Option<PyOcvCurve>,
    cell_id: &str,
) -> PyResult<Vec<PyFitProblem>> {
    let cell = ecm::CellSpec::new(capacity, soc_init).map_err(to_py)?;
    let options = LoadOptions {
        ocv: ocv.map(|c| c.0),
        ..LoadOptions::default()
    };
    bench::load_problems(path, cell_id, &cell, &options)
        .map(|v| v.into_iter().map(PyFitProblem).collect())
        .map_err(to_py)
}

/// Published comparison rows as `(method, mse, et_seconds)`.
#[pyfunction]
fn reference_table() -> Vec<(String, f64, f64)> {
    bench::reference_table()
        .into_iter()
        .map(|e| (e.method, e.mse, e.et))
        .collect()
}

/// Names accepted by `fit`.
#[pyfunction]
fn methods() -> Vec<&'static str> {
    Method::ALL.iter().map(|m| m.key()).collect()
}

#[pymodule]
fn pyecmfit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEcmParams>()?;
    m.add_class::<PyCellSpec>()?;
    m.add_class::<PyOcvCurve>()?;
    m.add_class::<PyFitProblem>()?;
    m.add_class::<PyFitReport>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ocv, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(grid_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(load_problems, m)?)?;
    m.add_function(wrap_pyfunction!(reference_table, m)?)?;
    m.add_function(wrap_pyfunction!(methods, m)?)?;
    Ok(())
}
