//! Uniform scalar quantization of Gaussian inputs and the Bussgang linear model.
//!
//! A b-bit ADC is modeled as a symmetric mid-rise uniform quantizer with
//! `2^b` output levels `±(2i−1)Δ/2`, applied separately to the real and
//! imaginary parts of a complex sample. The step `Δ` is chosen to minimise
//! the mean squared error for a unit-variance Gaussian input; inputs beyond
//! the outermost threshold clamp to the outermost level.
//!
//! Under Gaussian input the quantizer output decomposes as
//! `r = (1 − η_b) y + n_Q` with `n_Q` uncorrelated with `y` and of variance
//! `η_b (1 − η_b) E|y|²`, where `η_b` is the normalized MSE.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

pub const MIN_DESIGN_BITS: u32 = 1;
pub const MAX_DESIGN_BITS: u32 = 16;
pub const MAX_TABLE_BITS: u32 = 8;

/// Minimum NMSE of the optimum quantizer for a unit-variance Gaussian,
/// b = 1..8, to reference precision.
const NMSE_TABLE: [f64; 8] = [
    (PI - 2.0) / PI,
    0.1175,
    0.03454,
    0.009497,
    0.002499,
    0.0006642,
    0.0001660,
    0.00004151,
];

const CELL_QUADRATURE_ORDER: usize = 20;

/// A designed b-bit symmetric uniform quantizer for unit-variance input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    pub bits: u32,
    /// Step size in units of the input standard deviation.
    pub step: f64,
    pub num_levels: u32,
    /// Normalized MSE `η_b` at the designed step.
    pub nmse: f64,
}

impl QuantizerSpec {
    fn half_levels(&self) -> i64 {
        1i64 << (self.bits - 1)
    }

    /// Output levels in ascending order (unit-variance domain).
    pub fn levels(&self) -> Vec<f64> {
        let half = self.half_levels();
        (-half..half)
            .map(|k| (k as f64 + 0.5) * self.step)
            .collect()
    }

    /// Quantizes one real value in the unit-variance domain.
    ///
    /// Values on a cell boundary go to the upper cell, so `0` maps to `+Δ/2`.
    pub fn quantize_unit(&self, x: f64) -> f64 {
        let half = self.half_levels();
        let cell = (x / self.step).floor();
        let k = if cell >= half as f64 {
            half - 1
        } else if cell < -(half as f64) {
            -half
        } else {
            cell as i64
        };
        (k as f64 + 0.5) * self.step
    }

    /// Mean squared error at this quantizer's step for a unit-variance Gaussian.
    pub fn mse(&self) -> f64 {
        uniform_gaussian_mse(self.bits, self.step, &GaussLegendre::new(CELL_QUADRATURE_ORDER))
    }
}

/// Designs the MSE-optimal uniform quantizer for a standard normal input.
pub fn design_uniform_quantizer(bits: u32) -> Result<QuantizerSpec> {
    if !(MIN_DESIGN_BITS..=MAX_DESIGN_BITS).contains(&bits) {
        return Err(Error::Parameter(format!(
            "ADC resolution must be in {MIN_DESIGN_BITS}..={MAX_DESIGN_BITS} bits, got {bits}"
        )));
    }
    let rule = GaussLegendre::new(CELL_QUADRATURE_ORDER);
    let mse = |step: f64| uniform_gaussian_mse(bits, step, &rule);

    let guess = (12.0 * nmse_asymptotic(bits)).sqrt();
    let step = bisect_root(|s| uniform_gaussian_mse_slope(bits, s, &rule), 0.25 * guess, 4.0 * guess)
        .ok_or_else(|| Error::Numeric(format!("no stationary step bracketed for b = {bits}")))?;
    Ok(QuantizerSpec {
        bits,
        step,
        num_levels: 1u32 << bits,
        nmse: mse(step),
    })
}

/// Reference NMSE constants for b = 1..8.
pub fn nmse_table(bits: u32) -> Result<f64> {
    if !(1..=MAX_TABLE_BITS).contains(&bits) {
        return Err(Error::Parameter(format!(
            "tabulated NMSE exists for 1..={MAX_TABLE_BITS} bits, got {bits}"
        )));
    }
    Ok(NMSE_TABLE[bits as usize - 1])
}

/// High-resolution approximation `(π√3/2)·2^(−2b)`; accurate for b ≥ 3.
pub fn nmse_asymptotic(bits: u32) -> f64 {
    PI * 3f64.sqrt() / 2.0 * (-2.0 * bits as f64).exp2()
}

/// Quantizes a complex sample whose total power is `input_power`.
///
/// Each component is normalized by `√(input_power/2)` before the
/// unit-variance quantizer and scaled back afterwards.
pub fn quantize_complex(y: Complex64, spec: &QuantizerSpec, input_power: f64) -> Result<Complex64> {
    if !y.re.is_finite() || !y.im.is_finite() {
        return Err(Error::Numeric(format!("sample {y}")));
    }
    if !(input_power > 0.0 && input_power.is_finite()) {
        return Err(Error::Parameter(format!(
            "input power must be positive and finite, got {input_power}"
        )));
    }
    let scale = (input_power / 2.0).sqrt();
    Ok(Complex64::new(
        spec.quantize_unit(y.re / scale) * scale,
        spec.quantize_unit(y.im / scale) * scale,
    ))
}

/// Bussgang linearization of the quantizer at a given pre-quantization power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangModel {
    pub nmse: f64,
    /// Linear gain `1 − η_b`.
    pub gain: f64,
    /// Total pre-quantization power `E|y|²`.
    pub total_power: f64,
    /// `η_b (1 − η_b) E|y|²`.
    pub noise_variance: f64,
}

impl BussgangModel {
    /// Effective-noise variance for a useful signal of power `signal_power`
    /// received in thermal noise of variance `noise_variance`:
    /// `η(1−η)S + (1−η)σ²`.
    pub fn effective_noise_variance(nmse: f64, signal_power: f64, noise_variance: f64) -> f64 {
        nmse * (1.0 - nmse) * signal_power + (1.0 - nmse) * noise_variance
    }
}

pub fn bussgang_model(spec: &QuantizerSpec, total_power: f64) -> BussgangModel {
    let eta = spec.nmse;
    BussgangModel {
        nmse: eta,
        gain: 1.0 - eta,
        total_power,
        noise_variance: eta * (1.0 - eta) * total_power,
    }
}

/// One received sample before and after the ADC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSample {
    pub transmit_symbol: Complex64,
    pub noise: Complex64,
    pub pre_quantization: Complex64,
    pub post_quantization: Complex64,
}

/// Forms `y = g·s + n` for effective channel gain `g = h*v` and quantizes it.
pub fn receive_sample(
    effective_gain: Complex64,
    transmit_symbol: Complex64,
    noise: Complex64,
    spec: &QuantizerSpec,
    input_power: f64,
) -> Result<SignalSample> {
    let y = effective_gain * transmit_symbol + noise;
    Ok(SignalSample {
        transmit_symbol,
        noise,
        pre_quantization: y,
        post_quantization: quantize_complex(y, spec, input_power)?,
    })
}

/// Sample estimates of the quantity the Bussgang model predicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalBussgang {
    /// `Σ|r−y|² / Σ|y|²`
    pub nmse: f64,
    /// Regression gain `Re Σ r y* / Σ|y|²`.
    pub gain: f64,
    /// Standard error of `nmse` (delta method for the ratio).
    pub nmse_stderr: f64,
    /// Normalized correlation between `r − (1−η)y` and `y`.
    pub correlation: f64,
}

pub const MIN_EMPIRICAL_SAMPLES: usize = 10_000;

/// Draws unit-power circular complex Gaussian samples, quantizes them and
/// measures NMSE, gain and the residual correlation.
pub fn empirical_nmse_and_gain(
    spec: &QuantizerSpec,
    num_samples: usize,
    seed: u64,
) -> Result<EmpiricalBussgang> {
    if num_samples < MIN_EMPIRICAL_SAMPLES {
        return Err(Error::Parameter(format!(
            "need at least {MIN_EMPIRICAL_SAMPLES} samples, got {num_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gain_model = 1.0 - spec.nmse;

    let mut power = 0.0;
    let mut err = 0.0;
    let mut cross = Complex64::new(0.0, 0.0);
    let mut noise_power = 0.0;
    let mut noise_cross = Complex64::new(0.0, 0.0);
    let (mut err2, mut power2, mut err_power) = (0.0, 0.0, 0.0);
    for _ in 0..num_samples {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let y = Complex64::new(re, im) * FRAC_1_SQRT_2;
        let r = quantize_complex(y, spec, 1.0)?;
        let n_q = r - y * gain_model;
        let p = y.norm_sqr();
        let e = (r - y).norm_sqr();
        power += p;
        err += e;
        power2 += p * p;
        err2 += e * e;
        err_power += e * p;
        cross += r * y.conj();
        noise_power += n_q.norm_sqr();
        noise_cross += n_q * y.conj();
    }
    let n = num_samples as f64;
    let nmse = err / power;
    let spread = ((err2 - 2.0 * nmse * err_power + nmse * nmse * power2) / n).max(0.0);
    Ok(EmpiricalBussgang {
        nmse,
        nmse_stderr: (spread / n).sqrt() / (power / n),
        gain: cross.re / power,
        correlation: noise_cross.norm() / (noise_power * power).sqrt(),
    })
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

// E[(Q_Δ(x) − x)²] for x ~ N(0,1). Inner cells by quadrature, the overload
// cell in closed form; the positive half is doubled by symmetry.
fn uniform_gaussian_mse(bits: u32, step: f64, rule: &GaussLegendre) -> f64 {
    let half = 1u64 << (bits - 1);
    let mut total = 0.0;
    for i in 1..half {
        let lo = (i - 1) as f64 * step;
        let hi = i as f64 * step;
        let level = (i as f64 - 0.5) * step;
        total += rule.integrate(lo, hi, |x| {
            let d = x - level;
            d * d * std_normal_pdf(x)
        });
    }
    // ∫_a^∞ (x−q)² φ(x) dx = Q(a)(1+q²) + φ(a)(a − 2q)
    let a = (half - 1) as f64 * step;
    let q = (half as f64 - 0.5) * step;
    total += std_normal_sf(a) * (1.0 + q * q) + std_normal_pdf(a) * (a - 2.0 * q);
    2.0 * total
}

// d/dΔ E[(Q_Δ(x) − x)²] up to a positive factor. Boundary terms cancel
// because adjacent levels sit equally far from the shared cell edge.
fn uniform_gaussian_mse_slope(bits: u32, step: f64, rule: &GaussLegendre) -> f64 {
    let half = 1u64 << (bits - 1);
    let mut total = 0.0;
    for i in 1..half {
        let lo = (i - 1) as f64 * step;
        let hi = i as f64 * step;
        let level = (i as f64 - 0.5) * step;
        total += (i as f64 - 0.5) * rule.integrate(lo, hi, |x| (level - x) * std_normal_pdf(x));
    }
    let a = (half - 1) as f64 * step;
    let q = (half as f64 - 0.5) * step;
    total + (half as f64 - 0.5) * (q * std_normal_sf(a) - std_normal_pdf(a))
}

// Bisection down to adjacent floats; `None` if the ends share a sign.
fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    if f_lo.signum() == f(hi).signum() {
        return None;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Some(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}
