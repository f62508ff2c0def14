//! Python bindings: settings, observables, states and the Bell evaluators.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::stokes_bell as sb;
use sb::bell::{self, Critical, Inequality, SettingsQuad};
use sb::fock::{ModeSplit, PolarizationSetting};
use sb::observables::ObservableKind;

fn err(e: sb::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind(name: &str) -> PyResult<ObservableKind> {
    name.parse().map_err(|e: sb::Error| err(e))
}

fn inequality(name: &str) -> PyResult<Inequality> {
    name.parse().map_err(|e: sb::Error| err(e))
}

fn critical(c: Critical) -> Option<f64> {
    c.value()
}

#[pyclass(name = "PolarizationSetting", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PySetting(PolarizationSetting);

#[pymethods]
impl PySetting {
    #[new]
    #[pyo3(signature = (theta, phi = 0.0))]
    fn new(theta: f64, phi: f64) -> PyResult<Self> {
        PolarizationSetting::new(theta, phi).map(Self).map_err(err)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.0.phi
    }

    fn complementary(&self) -> Self {
        Self(self.0.complementary())
    }

    fn __repr__(&self) -> String {
        format!("PolarizationSetting(theta={}, phi={})", self.0.theta, self.0.phi)
    }
}

#[pyclass(name = "SettingsQuad", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyQuad(SettingsQuad);

#[pymethods]
impl PyQuad {
    /// Linear analyzers at the given angles; no arguments gives the standard quad.
    #[new]
    #[pyo3(signature = (theta = None, theta_prime = None, phi = None, phi_prime = None))]
    fn new(theta: Option<f64>, theta_prime: Option<f64>, phi: Option<f64>, phi_prime: Option<f64>) -> PyResult<Self> {
        match (theta, theta_prime, phi, phi_prime) {
            (None, None, None, None) => Ok(Self(SettingsQuad::default())),
            (Some(a), Some(b), Some(c), Some(d)) => Ok(Self(SettingsQuad::from_angles(a, b, c, d))),
            _ => Err(PyValueError::new_err("give all four angles or none")),
        }
    }

    fn __repr__(&self) -> String {
        let q = &self.0;
        format!(
            "SettingsQuad(theta={}, theta_prime={}, phi={}, phi_prime={})",
            q.theta.theta, q.theta_prime.theta, q.phi.theta, q.phi_prime.theta
        )
    }
}

fn quad_or_default(q: Option<PyQuad>) -> SettingsQuad {
    q.map(|q| q.0).unwrap_or_default()
}

#[pyclass(name = "InequalityReport", frozen, get_all)]
struct PyReport {
    inequality: String,
    lhs: f64,
    signed: f64,
    vacuum_term: f64,
    cutoff: usize,
    eta: f64,
    gamma: Option<f64>,
    tail: f64,
    violated: bool,
    /// `(n, weight, value)` per sector.
    per_sector: Vec<(usize, f64, f64)>,
}

impl From<sb::InequalityReport> for PyReport {
    fn from(r: sb::InequalityReport) -> Self {
        Self {
            inequality: r.inequality.to_string(),
            violated: r.violated(),
            lhs: r.lhs,
            signed: r.signed,
            vacuum_term: r.vacuum_term,
            cutoff: r.cutoff,
            eta: r.eta,
            gamma: r.gamma,
            tail: r.tail,
            per_sector: r.per_sector.iter().map(|t| (t.n, t.weight, t.value)).collect(),
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("InequalityReport({}, lhs={}, cutoff={})", self.inequality, self.lhs, self.cutoff)
    }
}

/// `<j_out, n - j_out | U(setting) | j_in, n - j_in>` as `complex`.
#[pyfunction]
fn transform_coefficient(n: usize, j_in: usize, j_out: usize, setting: PySetting) -> PyResult<num_complex::Complex64> {
    sb::transform_coefficient(n, j_in, j_out, setting.0).map_err(err)
}

/// Transform matrix of sector `n` as a list of rows.
#[pyfunction]
fn transform_matrix(n: usize, setting: PySetting) -> Vec<Vec<num_complex::Complex64>> {
    let m = sb::build_transform(n, setting.0);
    (0..=n).map(|r| (0..=n).map(|c| m.get(r, c)).collect()).collect()
}

#[pyfunction]
fn outcome_value(kind_name: &str, j: usize, k: usize) -> PyResult<f64> {
    Ok(sb::outcome_value(kind(kind_name)?, ModeSplit::new(j, k)))
}

/// Stokes-vector norm of `|j, k>` rotated by `angle` about the circular axis.
#[pyfunction]
#[pyo3(signature = (j, k, kind_name, angle = 0.0))]
fn fock_stokes_norm(j: usize, k: usize, kind_name: &str, angle: f64) -> PyResult<f64> {
    let state = sb::observables::rotate_state(&sb::fock_product_state(j, k), angle).map_err(err)?;
    sb::stokes_vector_norm(&state, kind(kind_name)?).map_err(err)
}

#[pyfunction]
fn bsv_weights(gamma: f64, cutoff: usize) -> PyResult<(Vec<f64>, f64)> {
    sb::bsv_weights(gamma, cutoff).map(|w| (w.weights, w.tail)).map_err(err)
}

/// Triple-photon amplitudes and truncation leakage of the bright GHZ state.
#[pyfunction]
fn bghz_coefficients(gamma: f64, cutoff: usize) -> PyResult<(Vec<f64>, f64)> {
    sb::bghz_coefficients(gamma, cutoff).map(|c| (c.c, c.leakage)).map_err(err)
}

/// CHSH expression on the squeezed vacuum; sign kinds count vacuum as `-1`.
#[pyfunction]
#[pyo3(signature = (gamma, kind_name = "sign", cutoff = 100, eta = 1.0, quad = None))]
fn chsh(gamma: f64, kind_name: &str, cutoff: usize, eta: f64, quad: Option<PyQuad>) -> PyResult<PyReport> {
    let e = sb::bsv_ensemble(gamma, cutoff).map_err(err)?;
    let k = kind(kind_name)?.vacuum_subtracted();
    sb::chsh_lhs(&e, quad_or_default(quad), k, eta).map(Into::into).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (gamma, kind_name = "projector", cutoff = 50, eta = 1.0, quad = None))]
fn ch(gamma: f64, kind_name: &str, cutoff: usize, eta: f64, quad: Option<PyQuad>) -> PyResult<PyReport> {
    let e = sb::bsv_ensemble(gamma, cutoff).map_err(err)?;
    sb::ch_lhs(&e, quad_or_default(quad), kind(kind_name)?, eta).map(Into::into).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (gamma, kind_name = "sign", cutoff = 40, eta = 1.0))]
fn mermin(gamma: f64, kind_name: &str, cutoff: usize, eta: f64) -> PyResult<PyReport> {
    let c = sb::bghz_coefficients(gamma, cutoff).map_err(err)?;
    sb::mermin_lhs(&c, kind(kind_name)?.vacuum_subtracted(), eta).map(Into::into).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, kind_name = "sign", quad = None))]
fn per_sector_chsh(n: usize, kind_name: &str, quad: Option<PyQuad>) -> PyResult<f64> {
    bell::per_sector_chsh(n, quad_or_default(quad), kind(kind_name)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, kind_name = "projector", quad = None))]
fn per_sector_ch(n: usize, kind_name: &str, quad: Option<PyQuad>) -> PyResult<f64> {
    bell::per_sector_ch(n, quad_or_default(quad), kind(kind_name)?).map_err(err)
}

/// Weighted mean of per-sector CHSH over block `block`; `gamma = None` is the infinite-gain limit.
#[pyfunction]
#[pyo3(signature = (block, gamma = None))]
fn block_average(block: usize, gamma: Option<f64>) -> PyResult<f64> {
    let gain = gamma.map_or(bell::BlockGain::Infinite, bell::BlockGain::Finite);
    bell::block_average(block, gain, SettingsQuad::default()).map_err(err)
}

/// First gain at which the inequality stops being violated, or `None`.
#[pyfunction]
#[pyo3(signature = (kind_name = "sign", inequality_name = "chsh", cutoff = 150, tol = bell::DEFAULT_TOLERANCE))]
fn gamma_threshold(kind_name: &str, inequality_name: &str, cutoff: usize, tol: f64) -> PyResult<Option<f64>> {
    bell::gamma_threshold(kind(kind_name)?, inequality(inequality_name)?, cutoff, tol)
        .map(|t| t.gamma)
        .map_err(err)
}

/// Critical detector efficiency, or `None` when the lossless state does not violate.
#[pyfunction]
#[pyo3(signature = (gamma, kind_name = "sign", inequality_name = "chsh", cutoff = 150, tol = bell::DEFAULT_TOLERANCE))]
fn critical_efficiency(
    gamma: f64,
    kind_name: &str,
    inequality_name: &str,
    cutoff: usize,
    tol: f64,
) -> PyResult<Option<f64>> {
    bell::critical_efficiency(gamma, inequality(inequality_name)?, kind(kind_name)?, cutoff, tol)
        .map(critical)
        .map_err(err)
}

/// Critical signal fraction against four-state white noise, or `None`.
#[pyfunction]
#[pyo3(signature = (gamma, kind_name = "sign", cutoff = 150))]
fn critical_noise(gamma: f64, kind_name: &str, cutoff: usize) -> PyResult<Option<f64>> {
    bell::critical_noise(gamma, SettingsQuad::default(), kind(kind_name)?, cutoff)
        .map(|t| critical(t.q_c))
        .map_err(err)
}

#[pymodule]
fn stokes_bell(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySetting>()?;
    m.add_class::<PyQuad>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(transform_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(transform_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(outcome_value, m)?)?;
    m.add_function(wrap_pyfunction!(fock_stokes_norm, m)?)?;
    m.add_function(wrap_pyfunction!(bsv_weights, m)?)?;
    m.add_function(wrap_pyfunction!(bghz_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(chsh, m)?)?;
    m.add_function(wrap_pyfunction!(ch, m)?)?;
    m.add_function(wrap_pyfunction!(mermin, m)?)?;
    m.add_function(wrap_pyfunction!(per_sector_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(per_sector_ch, m)?)?;
    m.add_function(wrap_pyfunction!(block_average, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(critical_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(critical_noise, m)?)?;
    Ok(())
}
