//! Python bindings: quadrature, HBVM methods, benchmark problems, single
//! steps, and full runs driven by a TOML config.

use std::sync::Arc;

use boussinesq_core::harness::config::RunConfig;
use boussinesq_core::integrator::shbvm_select as core_shbvm_select;
use boussinesq_core::problems::{default_problem, solitary_wave, wave_collision, wave_spread};
use boussinesq_core::system::Dynamics;
use boussinesq_core::{harness, Error, ProblemSpec, SpectralState, Stepper, StepperConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Gauss-Legendre rule on [0, 1]: `(nodes, weights)`.
#[pyfunction]
fn gauss_rule(k: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let r = boussinesq_core::gauss_rule(k).map_err(to_py)?;
    Ok((r.nodes, r.weights))
}

/// HBVM(k, s); `k = s` is the s-stage Gauss method.
#[pyclass(name = "HbvmMethod", frozen)]
struct PyHbvmMethod {
    inner: Arc<boussinesq_core::HbvmMethod>,
}

#[pymethods]
impl PyHbvmMethod {
    #[new]
    fn new(k: usize, s: usize) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(boussinesq_core::HbvmMethod::new(k, s).map_err(to_py)?) })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn s(&self) -> usize {
        self.inner.s()
    }

    #[getter]
    fn rho_s(&self) -> f64 {
        self.inner.rho_s()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.rule().nodes.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.rule().weights.clone()
    }

    /// Runge-Kutta matrix as a list of rows.
    fn butcher_a(&self) -> Vec<Vec<f64>> {
        let a = self.inner.butcher_a();
        (0..a.nrows()).map(|i| a.row(i).iter().cloned().collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("HbvmMethod(k={}, s={})", self.inner.k(), self.inner.s())
    }
}

/// One of the benchmark problems.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: ProblemSpec,
}

#[pymethods]
impl PyProblem {
    /// Problem by name ("solitary", "spread", "collision") with default
    /// parameters.
    #[staticmethod]
    #[pyo3(signature = (name, amplitude=None))]
    fn by_name(name: &str, amplitude: Option<f64>) -> PyResult<Self> {
        let kind = name.parse().map_err(to_py)?;
        Ok(Self { inner: default_problem(kind, amplitude).map_err(to_py)? })
    }

    #[staticmethod]
    #[pyo3(signature = (amplitude=0.375, xi0=0.0, speed_sign=1.0))]
    fn solitary(amplitude: f64, xi0: f64, speed_sign: f64) -> PyResult<Self> {
        Ok(Self { inner: solitary_wave(amplitude, xi0, speed_sign).map_err(to_py)? })
    }

    #[staticmethod]
    #[pyo3(signature = (amplitude=0.09375))]
    fn spread(amplitude: f64) -> PyResult<Self> {
        Ok(Self { inner: wave_spread(amplitude).map_err(to_py)? })
    }

    #[staticmethod]
    #[pyo3(signature = (amplitude=0.369, xi1=50.0, xi2=-50.0))]
    fn collision(amplitude: f64, xi1: f64, xi2: f64) -> PyResult<Self> {
        Ok(Self { inner: wave_collision(amplitude, xi1, xi2).map_err(to_py)? })
    }

    fn with_modes(&self, n_modes: usize) -> Self {
        Self { inner: self.inner.clone().with_modes(n_modes) }
    }

    fn with_final_time(&self, t_final: f64) -> Self {
        Self { inner: self.inner.clone().with_final_time(t_final) }
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn interval(&self) -> (f64, f64) {
        (self.inner.a, self.inner.b)
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.inner.t_final
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.n_modes
    }

    /// `u₀(x)`.
    fn u0(&self, xs: Vec<f64>) -> Vec<f64> {
        xs.iter().map(|&x| (self.inner.u0)(x)).collect()
    }

    /// Exact solution where one is known, else `None`.
    fn exact(&self, xs: Vec<f64>, t: f64) -> Option<Vec<f64>> {
        self.inner.exact.as_ref().map(|f| xs.iter().map(|&x| f(x, t)).collect())
    }

    /// Spectral projection of the initial data.
    fn initial_state(&self) -> PyResult<PyState> {
        Ok(PyState { inner: self.inner.initial_state().map_err(to_py)? })
    }
}

/// Fourier coefficients `(q, p)` and the conserved means.
#[pyclass(name = "State", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: SpectralState,
}

#[pymethods]
impl PyState {
    #[getter]
    fn q(&self) -> Vec<f64> {
        self.inner.q.clone()
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.inner.p.clone()
    }

    #[getter]
    fn uhat0(&self) -> f64 {
        self.inner.uhat0
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.grid.n_modes()
    }

    fn hamiltonian(&self) -> f64 {
        self.inner.hamiltonian()
    }

    fn momentum(&self) -> f64 {
        self.inner.momentum()
    }

    /// `(dq/dt, dp/dt)`.
    fn rhs(&self) -> (Vec<f64>, Vec<f64>) {
        self.inner.rhs()
    }

    /// `(u, v)` at the given points.
    fn reconstruct(&self, xs: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
        self.inner.reconstruct(&xs)
    }

    /// Advances by one HBVM step of size `h`.
    #[pyo3(signature = (method, h, iter_tol=1e-14, max_iters=100))]
    fn step(&self, method: &PyHbvmMethod, h: f64, iter_tol: f64, max_iters: usize) -> PyResult<PyState> {
        let mut cfg = StepperConfig::new(h, method.inner.clone());
        cfg.iter_tol = iter_tol;
        cfg.max_iters = max_iters;
        let stepper = Stepper::new(cfg, &self.inner.grid).map_err(to_py)?;
        Ok(PyState { inner: stepper.step(&self.inner).map_err(to_py)?.state })
    }
}

/// Spectral HBVM order selection from `state` with step `h`: `(s, k)`.
#[pyfunction]
#[pyo3(signature = (state, h, tol=1e-11, s_max=20))]
fn shbvm_select(state: &PyState, h: f64, tol: f64, s_max: usize) -> PyResult<(usize, usize)> {
    let c = core_shbvm_select(&state.inner, h, tol, s_max, Dynamics::Full).map_err(to_py)?;
    Ok((c.s, c.k))
}

/// Runs a TOML configuration and returns the report as a dict.
#[pyfunction]
fn run<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::from_toml_str(config).map_err(to_py)?;
    let out = py.detach(|| harness::run(&cfg)).map_err(to_py)?;
    json_to_py(py, &serde_json::to_string(&out.report).expect("report serializes"))
}

/// Convergence sweep of a TOML configuration over `n_list`.
#[pyfunction]
fn sweep<'py>(py: Python<'py>, config: &str, n_list: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::from_toml_str(config).map_err(to_py)?;
    let rows = py.detach(|| harness::convergence_sweep(&cfg, &n_list)).map_err(to_py)?;
    json_to_py(py, &serde_json::to_string(&rows).expect("rows serialize"))
}

/// `[(name, passed, detail)]` from the built-in consistency checks.
#[pyfunction]
fn selftest() -> Vec<(String, bool, String)> {
    harness::selftest::selftest()
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
fn boussinesq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHbvmMethod>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(gauss_rule, m)?)?;
    m.add_function(wrap_pyfunction!(shbvm_select, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
