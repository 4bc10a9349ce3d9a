//! Python module `boussinesq_waves`.
//!
//! Solves run with the interpreter lock released. Reports come back as plain
//! dicts; configuration and parameter errors raise `ValueError`, numerical
//! failures raise `RuntimeError`.

use std::path::PathBuf;

use boussinesq_core::cli::{run_homogeneous, run_nonhomogeneous};
use boussinesq_core::functionals::eval_all;
use boussinesq_core::io::{load_profile, profile_csv};
use boussinesq_core::propagator::{propagate as core_propagate, verify_translation};
use boussinesq_core::{Error, Grid, RunConfig, Spectral, WaveProfile};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pythonize::pythonize;

fn py_err(e: Error) -> PyErr {
    if e.exit_code() == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Parsed and validated run configuration.
#[pyclass(name = "Config", frozen)]
struct PyConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        RunConfig::from_toml_str(text)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        RunConfig::load(&path).map(|inner| Self { inner }).map_err(py_err)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    /// Copy with a different wave speed and, optionally, power.
    #[pyo3(signature = (omega, p=None))]
    fn with_point(&self, omega: f64, p: Option<u32>) -> PyResult<Self> {
        let inner = self.inner.with_point(omega, p);
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn length(&self) -> f64 {
        self.inner.length
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points
    }

    /// Upper bound on the wave speed for which the linear operator stays
    /// invertible at every wavenumber.
    fn admissible_velocity_bound(&self) -> PyResult<f64> {
        self.inner
            .params()
            .and_then(|p| p.admissible_velocity_bound())
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(omega={}, L={}, N={})",
            self.inner.omega, self.inner.length, self.inner.n_points
        )
    }
}

/// Pair of fields `(psi, v)` sampled on a uniform periodic grid.
#[pyclass(name = "Profile", frozen)]
struct PyProfile {
    inner: WaveProfile,
}

#[pymethods]
impl PyProfile {
    #[new]
    fn new(length: f64, psi: Vec<f64>, v: Vec<f64>) -> PyResult<Self> {
        let grid = Grid::new(length, psi.len()).map_err(py_err)?;
        WaveProfile::new(grid, psi, v)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// Reads `x,psi,v` CSV or a coefficients JSON file on the grid of `config`.
    #[staticmethod]
    fn load(path: PathBuf, config: &PyConfig) -> PyResult<Self> {
        let grid = config.inner.grid().map_err(py_err)?;
        load_profile(&path, &grid).map(|inner| Self { inner }).map_err(py_err)
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.grid().points()
    }

    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.inner.psi().to_vec()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.inner.v().to_vec()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.inner.grid().length()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.grid().n_points()
    }

    fn max_norm(&self) -> f64 {
        self.inner.max_norm()
    }

    fn to_csv(&self) -> String {
        profile_csv(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.grid().n_points()
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile(L={}, N={}, max={:.6e})",
            self.length(),
            self.n_points(),
            self.inner.max_norm()
        )
    }
}

/// Stabilized fixed-point solve. Returns `(profile, report)`.
#[pyfunction]
fn solve_homogeneous<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<(PyProfile, Bound<'py, PyAny>)> {
    let (profile, report) = py.detach(|| run_homogeneous(&config.inner)).map_err(py_err)?;
    Ok((PyProfile { inner: profile }, pythonize(py, &report)?))
}

/// Collocation Newton solve. Returns `(profile, coefficients, report)`.
#[pyfunction]
fn solve_nonhomogeneous<'py>(
    py: Python<'py>,
    config: &PyConfig,
) -> PyResult<(PyProfile, Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let (expansion, report) = py.detach(|| run_nonhomogeneous(&config.inner)).map_err(py_err)?;
    Ok((
        PyProfile {
            inner: expansion.to_profile(),
        },
        pythonize(py, &expansion)?,
        pythonize(py, &report)?,
    ))
}

/// Functionals and residual norms of `profile` under the model of `config`.
#[pyfunction]
fn functionals<'py>(py: Python<'py>, config: &PyConfig, profile: &PyProfile) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| {
            let params = config.inner.params()?;
            let nl = config.inner.build_nonlinearity()?;
            eval_all(&Spectral::new(*profile.inner.grid()), &profile.inner, &params, &nl)
        })
        .map_err(py_err)?;
    Ok(pythonize(py, &report)?)
}

/// Time-steps `profile` with the `[propagation]` settings of `config`.
/// Returns `(final_profile, diagnostics)`.
#[pyfunction]
fn propagate<'py>(py: Python<'py>, config: &PyConfig, profile: &PyProfile) -> PyResult<(PyProfile, Bound<'py, PyAny>)> {
    let run = py
        .detach(|| {
            let params = config.inner.params()?;
            let nl = config.inner.build_nonlinearity()?;
            core_propagate(&profile.inner, &params, &nl, &config.inner.propagation)
        })
        .map_err(py_err)?;
    Ok((PyProfile { inner: run.final_state }, pythonize(py, &run.diagnostics)?))
}

/// Relative errors of `computed` against `reference` translated by `omega * t`.
#[pyfunction]
fn translation_error<'py>(
    py: Python<'py>,
    computed: &PyProfile,
    reference: &PyProfile,
    omega: f64,
    t: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let err = verify_translation(&computed.inner, &reference.inner, omega, t).map_err(py_err)?;
    Ok(pythonize(py, &err)?)
}

#[pymodule]
fn boussinesq_waves(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyProfile>()?;
    m.add_function(wrap_pyfunction!(solve_homogeneous, m)?)?;
    m.add_function(wrap_pyfunction!(solve_nonhomogeneous, m)?)?;
    m.add_function(wrap_pyfunction!(functionals, m)?)?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(translation_error, m)?)?;
    Ok(())
}
