//! Python bindings: configuration, channel draws, beamforming, power
//! allocation, the analytical service probability and Monte Carlo runs.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use underlay_mimo::analytics;
use underlay_mimo::beamforming::{self, BeamformingSolution};
use underlay_mimo::channel::{self, ChannelRealization};
use underlay_mimo::montecarlo;
use underlay_mimo::power::{self, PowerAllocation};
use underlay_mimo::{special, wishart, Error, NetworkConfig, Policy, Scheme};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(msg) => PyIOError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn scheme(name: &str) -> PyResult<Scheme> {
    Scheme::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown scheme `{name}`")))
}

fn policy(name: &str) -> PyResult<Policy> {
    Policy::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown policy `{name}`")))
}

/// Network parameters in linear units. Defaults to the baseline setting.
#[pyclass(name = "NetworkConfig", module = "underlay_mimo_py")]
struct PyNetworkConfig {
    inner: NetworkConfig,
}

macro_rules! accessors {
    ($($get:ident, $set:ident, $field:ident: $ty:ty);* $(;)?) => {
        #[pymethods]
        impl PyNetworkConfig {
            $(
                #[getter]
                fn $get(&self) -> $ty {
                    self.inner.$field
                }
                #[setter]
                fn $set(&mut self, value: $ty) {
                    self.inner.$field = value;
                }
            )*
        }
    };
}

accessors! {
    m_b, set_m_b, m_b: usize;
    m_u, set_m_u, m_u: usize;
    k_su, set_k_su, k_su: usize;
    l_tx, set_l_tx, l_tx: usize;
    l_rx, set_l_rx, l_rx: usize;
    sigma2_h, set_sigma2_h, sigma2_h: f64;
    sigma2_delta, set_sigma2_delta, sigma2_delta: f64;
    sigma2_w, set_sigma2_w, sigma2_w: f64;
    p_p, set_p_p, p_p: f64;
    p0, set_p0, p0: f64;
    i0, set_i0, i0: f64;
    r0, set_r0, r0: f64;
}

#[pymethods]
impl PyNetworkConfig {
    /// Keyword arguments override baseline fields (`p0_db` and friends are
    /// accepted too).
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = NetworkConfig::baseline();
        if let Some(kw) = overrides {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let value = v.str()?.to_string();
                inner.set(&key, &value).map_err(to_py)?;
            }
        }
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_kv_str(text: &str) -> PyResult<Self> {
        NetworkConfig::from_kv_str(text)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn to_kv_string(&self) -> String {
        self.inner.to_kv_string()
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(to_py)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    fn sinr_threshold(&self) -> f64 {
        self.inner.sinr_threshold()
    }

    fn copy(&self) -> Self {
        Self {
            inner: self.inner.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkConfig({})",
            self.inner.to_kv_string().trim().replace('\n', ", ")
        )
    }
}

/// One draw of every true and estimated channel.
#[pyclass(name = "ChannelRealization", module = "underlay_mimo_py")]
struct PyChannelRealization {
    inner: ChannelRealization,
}

#[pymethods]
impl PyChannelRealization {
    #[getter]
    fn k_su(&self) -> usize {
        self.inner.k_su()
    }

    #[getter]
    fn m_b(&self) -> usize {
        self.inner.m_b()
    }

    #[getter]
    fn m_u(&self) -> usize {
        self.inner.m_u()
    }
}

/// Transmit and receive beams with per-SU gains.
#[pyclass(name = "Beams", module = "underlay_mimo_py")]
struct PyBeams {
    inner: BeamformingSolution,
}

#[pymethods]
impl PyBeams {
    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.as_str()
    }

    #[getter]
    fn gain(&self) -> Vec<f64> {
        self.inner.gain.clone()
    }

    #[getter]
    fn sigma2_k1(&self) -> Vec<f64> {
        self.inner.sigma2_k1.clone()
    }

    /// `(pu, inter_stream)` nulling residuals per SU.
    fn residuals(&self, real: PyRef<'_, PyChannelRealization>) -> (Vec<f64>, Vec<f64>) {
        let r = self.inner.residuals(&real.inner);
        (r.pu, r.inter_stream)
    }

    fn to_csv(&self, real: PyRef<'_, PyChannelRealization>) -> String {
        self.inner.to_csv(&real.inner)
    }
}

/// Per-SU powers with the feasibility verdict.
#[pyclass(name = "PowerAllocation", module = "underlay_mimo_py")]
struct PyPowerAllocation {
    inner: PowerAllocation,
}

#[pymethods]
impl PyPowerAllocation {
    #[getter]
    fn p(&self) -> Vec<f64> {
        self.inner.p.clone()
    }

    #[getter]
    fn feasible(&self) -> bool {
        self.inner.feasible
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.as_str()
    }

    #[getter]
    fn min_slack(&self) -> f64 {
        self.inner.slack.min()
    }

    /// Constraint family blamed for infeasibility, if any.
    #[getter]
    fn blocking(&self) -> Option<String> {
        self.inner.infeasibility.as_ref().map(|r| format!("{:?}", r.blocking))
    }

    fn total_power(&self) -> f64 {
        self.inner.total_power()
    }
}

#[pyfunction]
fn generate_channels(config: PyRef<'_, PyNetworkConfig>, seed: u64) -> PyChannelRealization {
    PyChannelRealization {
        inner: channel::generate_channels(&config.inner, seed),
    }
}

#[pyfunction]
fn compute_beams(real: PyRef<'_, PyChannelRealization>, scheme_name: &str) -> PyResult<PyBeams> {
    let inner = beamforming::compute(&real.inner, scheme(scheme_name)?).map_err(to_py)?;
    Ok(PyBeams { inner })
}

/// Linear-feasibility allocation: LP for MEB beams, equal rate for ZFB.
#[pyfunction]
fn solve_lf(
    real: PyRef<'_, PyChannelRealization>,
    beams: PyRef<'_, PyBeams>,
    config: PyRef<'_, PyNetworkConfig>,
) -> PyResult<PyPowerAllocation> {
    let inner = match beams.inner.scheme {
        Scheme::Meb => power::solve_lf_meb(&real.inner, &beams.inner, &config.inner),
        Scheme::Zfb => power::solve_lf_zfb(&real.inner, &beams.inner, &config.inner),
    }
    .map_err(to_py)?;
    Ok(PyPowerAllocation { inner })
}

#[pyfunction]
fn equal_power(
    real: PyRef<'_, PyChannelRealization>,
    beams: PyRef<'_, PyBeams>,
    p_eq: f64,
    config: PyRef<'_, PyNetworkConfig>,
) -> PyResult<PyPowerAllocation> {
    let inner = power::equal_power(&real.inner, &beams.inner, p_eq, &config.inner).map_err(to_py)?;
    Ok(PyPowerAllocation { inner })
}

/// Minimum slack of `alloc` on the estimated or true channels.
#[pyfunction]
#[pyo3(signature = (real, beams, alloc, config, use_estimates = true))]
fn verify_allocation(
    real: PyRef<'_, PyChannelRealization>,
    beams: PyRef<'_, PyBeams>,
    alloc: PyRef<'_, PyPowerAllocation>,
    config: PyRef<'_, PyNetworkConfig>,
    use_estimates: bool,
) -> PyResult<f64> {
    power::verify_allocation(&real.inner, &beams.inner, &alloc.inner, &config.inner, use_estimates)
        .map(|s| s.min())
        .map_err(to_py)
}

#[pyfunction]
fn q_k(scheme_name: &str, config: PyRef<'_, PyNetworkConfig>, p_eq: f64) -> PyResult<f64> {
    analytics::q_k(scheme(scheme_name)?, &config.inner, p_eq).map_err(to_py)
}

/// `(p_eq, q, p_min, p_max, range_infeasible)`.
#[pyfunction]
fn optimize_equal_power(scheme_name: &str, config: PyRef<'_, PyNetworkConfig>) -> PyResult<(f64, f64, f64, f64, bool)> {
    let o = analytics::optimize_equal_power(scheme(scheme_name)?, &config.inner).map_err(to_py)?;
    Ok((o.p_eq, o.q, o.range.p_min, o.range.p_max, o.range_infeasible))
}

#[pyfunction]
fn sinr_cdf(scheme_name: &str, config: PyRef<'_, PyNetworkConfig>, p_eq: f64, s: f64) -> PyResult<f64> {
    analytics::sinr_model(scheme(scheme_name)?, &config.inner, p_eq)
        .and_then(|m| m.cdf(s))
        .map_err(to_py)
}

#[pyfunction]
fn interference_cdf(scheme_name: &str, config: PyRef<'_, PyNetworkConfig>, p_eq: f64, x: f64) -> PyResult<f64> {
    analytics::interference_model(scheme(scheme_name)?, &config.inner, p_eq)
        .and_then(|m| m.cdf(x))
        .map_err(to_py)
}

#[pyfunction]
fn expected_max_eig(m_u: usize, m_b: usize, sigma2_h: f64) -> PyResult<f64> {
    wishart::expected_max_eig(m_u, m_b, sigma2_h).map_err(to_py)
}

#[pyfunction]
fn regularized_lower_gamma(k: f64, x: f64) -> PyResult<f64> {
    special::regularized_lower_gamma(k, x).map_err(to_py)
}

#[pyfunction]
fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> PyResult<f64> {
    special::regularized_incomplete_beta(x, a, b).map_err(to_py)
}

/// Monte Carlo run; returns a dict of counts, probabilities and sorted
/// samples. `policy` is `LF`, `EQUAL_POWER_OPT` or `EQUAL_POWER:<p>`.
#[pyfunction]
#[pyo3(signature = (config, scheme_name, policy_name, n_trials, seed = 0))]
fn run_trials<'py>(
    py: Python<'py>,
    config: PyRef<'_, PyNetworkConfig>,
    scheme_name: &str,
    policy_name: &str,
    n_trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (s, p) = (scheme(scheme_name)?, policy(policy_name)?);
    let cfg = config.inner.clone();
    let r = py
        .detach(move || montecarlo::run_trials(&cfg, s, p, n_trials, seed))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("scheme", r.scheme.as_str())?;
    d.set_item("policy", r.policy.to_string())?;
    d.set_item("p_eq", r.p_eq)?;
    d.set_item("n_trials", r.n_trials)?;
    d.set_item("seed", r.seed)?;
    d.set_item("n_served", r.n_served)?;
    d.set_item("n_served_true", r.n_served_true)?;
    d.set_item("n_csi_violations", r.n_csi_violations)?;
    d.set_item("n_errors", r.n_errors)?;
    d.set_item("p_served", r.p_served)?;
    d.set_item("stderr", r.stderr)?;
    d.set_item("p_served_true", r.p_served_true)?;
    d.set_item("sinr_true", r.sinr_true)?;
    d.set_item("sinr_est", r.sinr_est)?;
    d.set_item("int_to_pu_true", r.int_to_pu_true)?;
    Ok(d)
}

#[pymodule]
pub fn underlay_mimo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkConfig>()?;
    m.add_class::<PyChannelRealization>()?;
    m.add_class::<PyBeams>()?;
    m.add_class::<PyPowerAllocation>()?;
    m.add_function(wrap_pyfunction!(generate_channels, m)?)?;
    m.add_function(wrap_pyfunction!(compute_beams, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lf, m)?)?;
    m.add_function(wrap_pyfunction!(equal_power, m)?)?;
    m.add_function(wrap_pyfunction!(verify_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(q_k, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_equal_power, m)?)?;
    m.add_function(wrap_pyfunction!(sinr_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(interference_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(expected_max_eig, m)?)?;
    m.add_function(wrap_pyfunction!(regularized_lower_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(regularized_incomplete_beta, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    Ok(())
}
