//! Python bindings for the `qmiso` rate toolkit.

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qmiso_core::error::Error;
use qmiso_core::{feedback, montecarlo, precoder, quantizer, rates};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::Parameter(_) | Error::Config(_) | Error::Validation(_) | Error::Infeasible { .. } => {
            PyValueError::new_err(err.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

#[pyclass(name = "QuantizerSpec", frozen, from_py_object)]
#[derive(Clone)]
struct PyQuantizerSpec {
    inner: quantizer::QuantizerSpec,
}

#[pymethods]
impl PyQuantizerSpec {
    #[getter]
    fn bits(&self) -> u32 {
        self.inner.bits
    }

    #[getter]
    fn step(&self) -> f64 {
        self.inner.step
    }

    #[getter]
    fn num_levels(&self) -> u32 {
        self.inner.num_levels
    }

    #[getter]
    fn nmse(&self) -> f64 {
        self.inner.nmse
    }

    fn levels(&self) -> Vec<f64> {
        self.inner.levels()
    }

    fn quantize_unit(&self, x: f64) -> f64 {
        self.inner.quantize_unit(x)
    }

    /// Quantize a complex sample of total power `input_power`.
    fn quantize(&self, y: Complex64, input_power: f64) -> PyResult<Complex64> {
        quantizer::quantize_complex(y, &self.inner, input_power).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("QuantizerSpec(bits={}, step={}, nmse={})", self.inner.bits, self.inner.step, self.inner.nmse)
    }
}

#[pyfunction]
fn design_uniform_quantizer(bits: u32) -> PyResult<PyQuantizerSpec> {
    Ok(PyQuantizerSpec {
        inner: quantizer::design_uniform_quantizer(bits).map_err(to_py)?,
    })
}

#[pyfunction]
fn nmse_table(bits: u32) -> PyResult<f64> {
    quantizer::nmse_table(bits).map_err(to_py)
}

#[pyfunction]
fn nmse_asymptotic(bits: u32) -> f64 {
    quantizer::nmse_asymptotic(bits)
}

#[pyfunction]
fn nmse_for_bits(bits: u32) -> PyResult<f64> {
    rates::nmse_for_bits(bits).map_err(to_py)
}

#[pyfunction]
fn bussgang_model<'py>(py: Python<'py>, spec: &PyQuantizerSpec, total_power: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = quantizer::bussgang_model(&spec.inner, total_power);
    let d = PyDict::new(py);
    d.set_item("nmse", m.nmse)?;
    d.set_item("gain", m.gain)?;
    d.set_item("total_power", m.total_power)?;
    d.set_item("noise_variance", m.noise_variance)?;
    Ok(d)
}

#[pyfunction]
fn empirical_nmse_and_gain<'py>(
    py: Python<'py>,
    spec: &PyQuantizerSpec,
    num_samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let e = py
        .detach(|| quantizer::empirical_nmse_and_gain(&spec.inner, num_samples, seed))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("nmse", e.nmse)?;
    d.set_item("nmse_stderr", e.nmse_stderr)?;
    d.set_item("gain", e.gain)?;
    d.set_item("correlation", e.correlation)?;
    Ok(d)
}

#[pyclass(name = "Codebook", frozen)]
struct PyCodebook {
    inner: feedback::Codebook,
}

#[pymethods]
impl PyCodebook {
    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn feedback_bits(&self) -> u32 {
        self.inner.feedback_bits()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn entry(&self, index: usize) -> PyResult<Vec<Complex64>> {
        if index >= self.inner.len() {
            return Err(PyValueError::new_err(format!("index {index} out of range")));
        }
        Ok(self.inner.entry(index).to_vec())
    }

    /// Index and `cos²` of the codeword best aligned with `h`.
    fn select(&self, h: Vec<Complex64>) -> PyResult<(usize, f64)> {
        let h = feedback::ChannelVector::new(h).map_err(to_py)?;
        feedback::select_index(&h, &self.inner).map_err(to_py)
    }
}

#[pyfunction]
fn generate_rvq(n_t: usize, feedback_bits: u32, seed: u64) -> PyResult<PyCodebook> {
    Ok(PyCodebook {
        inner: feedback::generate_rvq(n_t, feedback_bits, seed).map_err(to_py)?,
    })
}

#[pyfunction]
fn expected_cos2(n_t: usize, feedback_bits: u32) -> f64 {
    feedback::expected_cos2(n_t, feedback_bits)
}

#[pyfunction]
fn expected_quantization_error(n_t: usize, feedback_bits: u32) -> f64 {
    feedback::expected_quantization_error(n_t, feedback_bits)
}

#[pyfunction]
fn quantization_error_bound(n_t: usize, feedback_bits: u32) -> f64 {
    feedback::quantization_error_bound(n_t, feedback_bits)
}

#[pyfunction]
fn conjugate_beamformer(h: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    precoder::conjugate_beamformer(&h).map_err(to_py)
}

/// Unit-norm ZF beams for the given user directions.
#[pyfunction]
fn zf_beamformers(directions: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(precoder::zf_beamformers(&directions).map_err(to_py)?.vectors)
}

#[pyclass(name = "LinkParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyLinkParams {
    inner: rates::LinkParams,
}

#[pymethods]
impl PyLinkParams {
    #[new]
    #[pyo3(signature = (transmit_power, noise_variance, n_t, users, adc_bits, feedback_bits=None))]
    fn new(
        transmit_power: f64,
        noise_variance: f64,
        n_t: usize,
        users: usize,
        adc_bits: u32,
        feedback_bits: Option<u32>,
    ) -> PyResult<Self> {
        let inner = rates::LinkParams::new(transmit_power, noise_variance, n_t, users, adc_bits, feedback_bits)
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (snr_db, n_t, adc_bits, feedback_bits=None))]
    fn single_user(snr_db: f64, n_t: usize, adc_bits: u32, feedback_bits: Option<u32>) -> PyResult<Self> {
        let inner = rates::LinkParams::single_user(snr_db, n_t, adc_bits, feedback_bits).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (snr_db, n_t, users, adc_bits, feedback_bits=None))]
    fn multi_user(snr_db: f64, n_t: usize, users: usize, adc_bits: u32, feedback_bits: Option<u32>) -> PyResult<Self> {
        let inner = rates::LinkParams::multi_user(snr_db, n_t, users, adc_bits, feedback_bits).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn nmse(&self) -> f64 {
        self.inner.nmse()
    }

    #[getter]
    fn snr(&self) -> f64 {
        self.inner.snr()
    }

    #[getter]
    fn per_user_power(&self) -> f64 {
        self.inner.per_user_power()
    }

    fn su_rate_csit_upper(&self) -> PyResult<f64> {
        rates::su_rate_csit_upper(&self.inner).map_err(to_py)
    }

    /// `(approx, lower_bound)`
    fn su_rate_fb(&self) -> PyResult<(f64, f64)> {
        let r = rates::su_rate_fb(&self.inner).map_err(to_py)?;
        Ok((r.approx, r.lower_bound))
    }

    fn mu_rate_zf_csit_upper(&self) -> f64 {
        rates::mu_rate_zf_csit_upper(&self.inner)
    }

    /// `(approx, lower_bound)`
    fn mu_rate_zf_fb(&self) -> PyResult<(f64, f64)> {
        let r = rates::mu_rate_zf_fb(&self.inner).map_err(to_py)?;
        Ok((r.approx, r.lower_bound))
    }

    fn mu_rate_loss_bound(&self) -> PyResult<f64> {
        rates::mu_rate_loss_bound(&self.inner).map_err(to_py)
    }

    fn mu_rate_loss_high_snr(&self) -> PyResult<f64> {
        rates::mu_rate_loss_high_snr(&self.inner).map_err(to_py)
    }
}

#[pyfunction]
fn mu_scaling_term(adc_bits: u32, feedback_bits: u32, n_t: usize) -> PyResult<f64> {
    rates::mu_scaling_term(adc_bits, feedback_bits, n_t).map_err(to_py)
}

#[pyfunction]
fn feedback_bits_for_loss(target_loss: f64, adc_bits: u32, n_t: usize, users: usize) -> PyResult<u32> {
    rates::feedback_bits_for_loss(target_loss, adc_bits, n_t, users).map_err(to_py)
}

fn curve_dict<'py>(py: Python<'py>, c: &montecarlo::RateCurve) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("label", &c.label)?;
    d.set_item("adc_bits", c.adc_bits)?;
    d.set_item("feedback_bits", c.feedback_bits)?;
    d.set_item("snr_db", &c.snr_db)?;
    d.set_item("rate_bps_hz", &c.rate_bps_hz)?;
    d.set_item("stderr", &c.stderr)?;
    d.set_item("trials", c.trials)?;
    d.set_item("discarded", c.discarded_trials)?;
    Ok(d)
}

fn run_curves<'py>(py: Python<'py>, config: montecarlo::ScenarioConfig, codebook_mode: &str) -> PyResult<Bound<'py, PyDict>> {
    let config = montecarlo::ScenarioConfig {
        codebook_mode: codebook_mode.parse().map_err(to_py)?,
        ..config
    };
    let (csit, fb) = py
        .detach(|| match config.scenario {
            montecarlo::Scenario::SingleUser => montecarlo::simulate_su(&config),
            montecarlo::Scenario::MultiUser => montecarlo::simulate_mu(&config),
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("csit", curve_dict(py, &csit)?)?;
    d.set_item("feedback", curve_dict(py, &fb)?)?;
    Ok(d)
}

/// Single-user Monte Carlo sweep; returns `{"csit": {...}, "feedback": {...}}`.
#[pyfunction]
#[pyo3(signature = (n_t, adc_bits, feedback_bits, snr_db, trials=1000, seed=20160101, codebook_mode="fresh"))]
#[allow(clippy::too_many_arguments)]
fn simulate_su<'py>(
    py: Python<'py>,
    n_t: usize,
    adc_bits: u32,
    feedback_bits: u32,
    snr_db: Vec<f64>,
    trials: usize,
    seed: u64,
    codebook_mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let config = montecarlo::ScenarioConfig::single_user(n_t, adc_bits, feedback_bits, snr_db, trials, seed);
    run_curves(py, config, codebook_mode)
}

/// Multi-user ZF Monte Carlo sweep; same result layout as `simulate_su`.
#[pyfunction]
#[pyo3(signature = (n_t, users, adc_bits, feedback_bits, snr_db, trials=1000, seed=20160101, codebook_mode="fresh"))]
#[allow(clippy::too_many_arguments)]
fn simulate_mu<'py>(
    py: Python<'py>,
    n_t: usize,
    users: usize,
    adc_bits: u32,
    feedback_bits: u32,
    snr_db: Vec<f64>,
    trials: usize,
    seed: u64,
    codebook_mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let config = montecarlo::ScenarioConfig::multi_user(n_t, users, adc_bits, feedback_bits, snr_db, trials, seed);
    run_curves(py, config, codebook_mode)
}

#[pymodule]
fn qmiso(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuantizerSpec>()?;
    m.add_class::<PyCodebook>()?;
    m.add_class::<PyLinkParams>()?;
    m.add_function(wrap_pyfunction!(design_uniform_quantizer, m)?)?;
    m.add_function(wrap_pyfunction!(nmse_table, m)?)?;
    m.add_function(wrap_pyfunction!(nmse_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(nmse_for_bits, m)?)?;
    m.add_function(wrap_pyfunction!(bussgang_model, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_nmse_and_gain, m)?)?;
    m.add_function(wrap_pyfunction!(generate_rvq, m)?)?;
    m.add_function(wrap_pyfunction!(expected_cos2, m)?)?;
    m.add_function(wrap_pyfunction!(expected_quantization_error, m)?)?;
    m.add_function(wrap_pyfunction!(quantization_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(conjugate_beamformer, m)?)?;
    m.add_function(wrap_pyfunction!(zf_beamformers, m)?)?;
    m.add_function(wrap_pyfunction!(mu_scaling_term, m)?)?;
    m.add_function(wrap_pyfunction!(feedback_bits_for_loss, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_su, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_mu, m)?)?;
    Ok(())
}
