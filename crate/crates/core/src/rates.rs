//! Closed-form achievable-rate expressions for finite-bit ADC receivers.
//!
//! All rates are in bps/Hz and use the Bussgang SQNR/SIQNR with the
//! quantization noise treated as worst-case Gaussian. "Approx" expressions
//! move the channel expectations inside the logarithm; "lower bound"
//! expressions additionally replace the RVQ error `2^B β(2^B, Nₜ/(Nₜ−1))`
//! by its upper bound `2^(−B/(Nₜ−1))`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::feedback::{expected_quantization_error, quantization_error_bound};
use crate::quantizer::{design_uniform_quantizer, nmse_asymptotic, nmse_table, MAX_DESIGN_BITS, MAX_TABLE_BITS};

/// Largest feedback budget searched by [`feedback_bits_for_loss`].
pub const MAX_SEARCH_FEEDBACK_BITS: u32 = 64;

/// NMSE `η_b` used by every rate expression.
///
/// Tabulated constants for b ≤ 8, the designed uniform quantizer for
/// 9 ≤ b ≤ 16 and the high-resolution asymptote beyond.
pub fn nmse_for_bits(bits: u32) -> Result<f64> {
    static DESIGNED: [OnceLock<f64>; (MAX_DESIGN_BITS - MAX_TABLE_BITS) as usize] =
        [const { OnceLock::new() }; (MAX_DESIGN_BITS - MAX_TABLE_BITS) as usize];
    match bits {
        0 => Err(Error::Parameter("ADC resolution must be at least 1 bit".into())),
        b if b <= MAX_TABLE_BITS => nmse_table(b),
        b if b <= MAX_DESIGN_BITS => {
            let slot = &DESIGNED[(b - MAX_TABLE_BITS - 1) as usize];
            if let Some(v) = slot.get() {
                return Ok(*v);
            }
            let v = design_uniform_quantizer(b)?.nmse;
            Ok(*slot.get_or_init(|| v))
        }
        b => Ok(nmse_asymptotic(b)),
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Link-level scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub transmit_power: f64,
    pub noise_variance: f64,
    pub n_t: usize,
    pub users: usize,
    pub adc_bits: u32,
    /// `None` means perfect CSIT.
    pub feedback_bits: Option<u32>,
    nmse: f64,
}

impl LinkParams {
    pub fn new(
        transmit_power: f64,
        noise_variance: f64,
        n_t: usize,
        users: usize,
        adc_bits: u32,
        feedback_bits: Option<u32>,
    ) -> Result<Self> {
        if !(transmit_power > 0.0 && transmit_power.is_finite()) {
            return Err(Error::Parameter(format!("transmit power must be positive, got {transmit_power}")));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::Parameter(format!("noise variance must be positive, got {noise_variance}")));
        }
        if users == 0 || users > n_t {
            return Err(Error::Parameter(format!("need 1 <= K <= Nt, got K={users}, Nt={n_t}")));
        }
        Ok(Self {
            transmit_power,
            noise_variance,
            n_t,
            users,
            adc_bits,
            feedback_bits,
            nmse: nmse_for_bits(adc_bits)?,
        })
    }

    /// Single-user link at `snr_db = 10 log₁₀(P_t/σ²)` with unit noise.
    pub fn single_user(snr_db: f64, n_t: usize, adc_bits: u32, feedback_bits: Option<u32>) -> Result<Self> {
        Self::new(db_to_linear(snr_db), 1.0, n_t, 1, adc_bits, feedback_bits)
    }

    /// Multi-user link at `snr_db = 10 log₁₀(P_t/σ²)` with unit noise.
    pub fn multi_user(
        snr_db: f64,
        n_t: usize,
        users: usize,
        adc_bits: u32,
        feedback_bits: Option<u32>,
    ) -> Result<Self> {
        Self::new(db_to_linear(snr_db), 1.0, n_t, users, adc_bits, feedback_bits)
    }

    /// Replaces the resolution-derived NMSE; `0` models an ideal ADC.
    pub fn with_nmse(mut self, nmse: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&nmse) {
            return Err(Error::Parameter(format!("NMSE must lie in [0, 1), got {nmse}")));
        }
        self.nmse = nmse;
        Ok(self)
    }

    pub fn with_transmit_power(mut self, transmit_power: f64) -> Self {
        self.transmit_power = transmit_power;
        self
    }

    pub fn with_feedback_bits(mut self, feedback_bits: Option<u32>) -> Self {
        self.feedback_bits = feedback_bits;
        self
    }

    pub fn nmse(&self) -> f64 {
        self.nmse
    }

    /// Per-user power `ρ = P_t / K`.
    pub fn per_user_power(&self) -> f64 {
        self.transmit_power / self.users as f64
    }

    pub fn snr(&self) -> f64 {
        self.transmit_power / self.noise_variance
    }

    fn require_single_user(&self) -> Result<()> {
        if self.users != 1 {
            return Err(Error::Parameter(format!("single-user expression used with K={}", self.users)));
        }
        Ok(())
    }

    fn require_feedback(&self) -> Result<u32> {
        self.feedback_bits
            .ok_or_else(|| Error::Parameter("limited-feedback expression needs a finite B".into()))
    }
}

/// `(1−η)P·d / (η P·d + P·I + σ²)`: Bussgang SIQNR for desired power
/// gain `d` and summed interference gain `I` at per-stream power `P`.
fn bussgang_ratio(nmse: f64, power: f64, desired: f64, interference: f64, noise: f64) -> f64 {
    (1.0 - nmse) * power * desired / (nmse * power * desired + power * interference + noise)
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Single-user SQNR for beamforming gain `gain2 = |h* v|²`.
pub fn su_sqnr(p: &LinkParams, gain2: f64) -> f64 {
    bussgang_ratio(p.nmse, p.transmit_power, gain2, 0.0, p.noise_variance)
}

/// Jensen upper bound on the perfect-CSIT rate, using `E‖h‖² = Nₜ`.
pub fn su_rate_csit_upper(p: &LinkParams) -> Result<f64> {
    p.require_single_user()?;
    Ok(log2_1p(su_sqnr(p, p.n_t as f64)))
}

/// Low- and high-SNR approximations of the perfect-CSIT rate.
pub fn su_rate_csit_asymptotes(p: &LinkParams) -> Result<(f64, f64)> {
    p.require_single_user()?;
    let low = log2_1p((1.0 - p.nmse) * p.transmit_power * p.n_t as f64 / p.noise_variance);
    Ok((low, (1.0 / p.nmse).log2()))
}

/// Rate pair under limited feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackRates {
    pub approx: f64,
    pub lower_bound: f64,
}

/// Single-user rate with B-bit RVQ feedback.
pub fn su_rate_fb(p: &LinkParams) -> Result<FeedbackRates> {
    p.require_single_user()?;
    let bits = p.require_feedback()?;
    let n_t = p.n_t as f64;
    let exact = 1.0 - expected_quantization_error(p.n_t, bits);
    let bound = 1.0 - quantization_error_bound(p.n_t, bits);
    Ok(FeedbackRates {
        approx: log2_1p(su_sqnr(p, n_t * exact)),
        lower_bound: log2_1p(su_sqnr(p, n_t * bound)),
    })
}

/// Low- and high-SNR approximations of the limited-feedback rate.
pub fn su_rate_fb_asymptotes(p: &LinkParams) -> Result<(f64, f64)> {
    p.require_single_user()?;
    let bits = p.require_feedback()?;
    let gain = p.n_t as f64 * (1.0 - quantization_error_bound(p.n_t, bits));
    let low = log2_1p((1.0 - p.nmse) * p.transmit_power * gain / p.noise_variance);
    Ok((low, (1.0 / p.nmse).log2()))
}

/// Low-SNR power loss of B-bit feedback, `10 log₁₀(1 − 2^(−B/(Nₜ−1)))` dB.
/// Returns `-inf` for `B = 0`; `0` for `Nₜ = 1`.
pub fn su_power_loss_db(n_t: usize, feedback_bits: u32) -> f64 {
    linear_to_db(1.0 - quantization_error_bound(n_t, feedback_bits))
}

/// Low-SNR power loss of a b-bit ADC, `10 log₁₀(1 − η_b)` dB.
pub fn adc_power_loss_db(adc_bits: u32) -> Result<f64> {
    Ok(linear_to_db(1.0 - nmse_for_bits(adc_bits)?))
}

/// Multi-user SIQNR at receiver `k` with `desired = |h_k* v_k|²` and
/// `interference = Σ_{i≠k} |h_k* v_i|²`, per-user power `ρ = P_t/K`.
pub fn mu_siqnr(p: &LinkParams, desired: f64, interference: f64) -> f64 {
    bussgang_ratio(p.nmse, p.per_user_power(), desired, interference, p.noise_variance)
}

/// Jensen upper bound on the per-user ZF rate with perfect CSIT,
/// using `E|h_k* v_k^ZF|² = Nₜ − K + 1`.
pub fn mu_rate_zf_csit_upper(p: &LinkParams) -> f64 {
    log2_1p(mu_siqnr(p, (p.n_t - p.users + 1) as f64, 0.0))
}

fn zf_fb_rate(p: &LinkParams, quant_error: f64) -> f64 {
    let n_t = p.n_t as f64;
    let desired = (p.n_t - p.users + 1) as f64 * (1.0 - quant_error);
    let interference = if p.users > 1 {
        (p.users - 1) as f64 * n_t / (n_t - 1.0) * quant_error
    } else {
        0.0
    };
    log2_1p(mu_siqnr(p, desired, interference))
}

/// Per-user ZF rate with B-bit RVQ feedback.
pub fn mu_rate_zf_fb(p: &LinkParams) -> Result<FeedbackRates> {
    let bits = p.require_feedback()?;
    Ok(FeedbackRates {
        approx: zf_fb_rate(p, expected_quantization_error(p.n_t, bits)),
        lower_bound: zf_fb_rate(p, quantization_error_bound(p.n_t, bits)),
    })
}

/// Upper bound on the ZF rate loss: CSIT bound minus the feedback lower bound.
pub fn mu_rate_loss_bound(p: &LinkParams) -> Result<f64> {
    Ok(mu_rate_zf_csit_upper(p) - mu_rate_zf_fb(p)?.lower_bound)
}

/// Low-SNR form of [`mu_rate_loss_bound`] (quantization and interference
/// terms dropped from the denominators).
pub fn mu_rate_loss_low_snr(p: &LinkParams) -> Result<f64> {
    let bits = p.require_feedback()?;
    let base = (1.0 - p.nmse) * p.per_user_power() * (p.n_t - p.users + 1) as f64 / p.noise_variance;
    let kept = 1.0 - quantization_error_bound(p.n_t, bits);
    Ok(log2_1p(base) - log2_1p(base * kept))
}

/// High-SNR loss constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    /// `(Nₜ−K+1)(1 − 2^(−B/(Nₜ−1)))`
    pub c1: f64,
    /// `((K−1)Nₜ/(Nₜ−1)) 2^(−B/(Nₜ−1))`
    pub c2: f64,
}

pub fn loss_terms(n_t: usize, users: usize, feedback_bits: u32) -> LossTerms {
    let bound = quantization_error_bound(n_t, feedback_bits);
    let c2 = if users > 1 {
        (users - 1) as f64 * n_t as f64 / (n_t as f64 - 1.0) * bound
    } else {
        0.0
    };
    LossTerms {
        c1: (n_t - users + 1) as f64 * (1.0 - bound),
        c2,
    }
}

fn high_snr_loss(nmse: f64, terms: LossTerms) -> f64 {
    log2_1p((1.0 - nmse) / nmse / (terms.c1 / terms.c2 + 1.0))
}

/// High-SNR ZF rate loss `log₂(1 + ((1−η)/η) / (C₁/C₂ + 1))`.
pub fn mu_rate_loss_high_snr(p: &LinkParams) -> Result<f64> {
    if p.users < 2 {
        return Err(Error::Parameter("high-SNR rate loss needs K >= 2".into()));
    }
    let bits = p.require_feedback()?;
    Ok(high_snr_loss(p.nmse, loss_terms(p.n_t, p.users, bits)))
}

/// `(2/(π√3)) 2^(2(b − B/(2(Nₜ−1))))`, the high-resolution form of
/// `1/(η_b 2^(B/(Nₜ−1)))`. Invariant under `b → b+1, B → B + 2(Nₜ−1)`.
pub fn mu_scaling_term(adc_bits: u32, feedback_bits: u32, n_t: usize) -> Result<f64> {
    if n_t < 2 {
        return Err(Error::Parameter("scaling term needs Nt >= 2".into()));
    }
    let span = n_t as i64 - 1;
    // integer numerator keeps the invariance exact in floating point
    let numerator = 2 * adc_bits as i64 * span - feedback_bits as i64;
    Ok(2.0 / (PI * 3f64.sqrt()) * (numerator as f64 / span as f64).exp2())
}

/// Smallest B whose high-SNR ZF rate loss does not exceed `target_loss`.
pub fn feedback_bits_for_loss(target_loss: f64, adc_bits: u32, n_t: usize, users: usize) -> Result<u32> {
    if !(target_loss > 0.0) {
        return Err(Error::Parameter(format!("target loss must be positive, got {target_loss}")));
    }
    if users < 2 || users > n_t {
        return Err(Error::Parameter(format!("need 2 <= K <= Nt, got K={users}, Nt={n_t}")));
    }
    let nmse = nmse_for_bits(adc_bits)?;
    let loss = |bits: u32| high_snr_loss(nmse, loss_terms(n_t, users, bits));
    if loss(0) <= target_loss {
        return Ok(0);
    }
    if loss(MAX_SEARCH_FEEDBACK_BITS) > target_loss {
        return Err(Error::Infeasible {
            target: target_loss,
            max_bits: MAX_SEARCH_FEEDBACK_BITS,
        });
    }
    let (mut lo, mut hi) = (0, MAX_SEARCH_FEEDBACK_BITS);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if loss(mid) <= target_loss {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA1: f64 = (PI - 2.0) / PI;
    const ETA3: f64 = 0.03454;

    fn su(pt: f64, n_t: usize, b: u32, fb: Option<u32>) -> LinkParams {
        LinkParams::new(pt, 1.0, n_t, 1, b, fb).unwrap()
    }

    #[test]
    fn params_validated() {
        assert!(LinkParams::new(0.0, 1.0, 4, 1, 3, None).is_err());
        assert!(LinkParams::new(1.0, 0.0, 4, 1, 3, None).is_err());
        assert!(LinkParams::new(1.0, 1.0, 4, 5, 3, None).is_err());
        assert!(LinkParams::new(1.0, 1.0, 4, 0, 3, None).is_err());
        assert!(LinkParams::new(1.0, 1.0, 4, 2, 0, None).is_err());
        let p = LinkParams::new(8.0, 1.0, 4, 2, 3, Some(6)).unwrap();
        assert_eq!(p.per_user_power(), 4.0);
        assert_eq!(p.nmse(), ETA3);
    }

    #[test]
    fn nmse_sources() {
        assert_eq!(nmse_for_bits(3).unwrap(), ETA3);
        let nine = nmse_for_bits(9).unwrap();
        assert!(nine < nmse_for_bits(8).unwrap() * 4.0 && nine > 0.0);
        assert_eq!(nmse_for_bits(20).unwrap(), nmse_asymptotic(20));
    }

    #[test]
    fn sqnr_examples() {
        let p = su(1.0, 16, 1, None);
        assert_eq!(su_sqnr(&p, 0.0), 0.0);
        let expect = (1.0 - ETA1) * 16.0 / (ETA1 * 16.0 + 1.0);
        assert!((su_sqnr(&p, 16.0) - expect).abs() < 1e-15);
        assert!((su_sqnr(&p, 16.0) - 1.4948).abs() < 1e-4);
        let hi = su(1e12, 16, 1, None);
        assert!((su_sqnr(&hi, 16.0) - (1.0 - ETA1) / ETA1).abs() < 1e-9);
    }

    #[test]
    fn csit_upper_examples() {
        assert!((su_rate_csit_upper(&su(1.0, 16, 1, None)).unwrap() - 1.319).abs() < 1e-3);
        let r = su_rate_csit_upper(&su(1e12, 4, 4, None)).unwrap();
        assert!((r - 6.72).abs() < 5e-3);
        let ideal = su(3.0, 8, 4, None).with_nmse(0.0).unwrap();
        assert!((su_rate_csit_upper(&ideal).unwrap() - 25f64.log2()).abs() < 1e-12);
        assert!(su_rate_csit_upper(&LinkParams::new(1.0, 1.0, 4, 2, 3, None).unwrap()).is_err());
    }

    #[test]
    fn csit_asymptotes() {
        let (_, hi) = su_rate_csit_asymptotes(&su(1.0, 4, 3, None)).unwrap();
        assert!((hi - 4.86).abs() < 5e-3);
        for b in [10, 12, 16] {
            let (_, hi) = su_rate_csit_asymptotes(&su(1.0, 4, b, None).with_nmse(nmse_asymptotic(b)).unwrap()).unwrap();
            assert!((hi - (2.0 * b as f64 - 1.44)).abs() < 5e-3);
        }
        let (lo, _) = su_rate_csit_asymptotes(&su(1e-12, 4, 3, None)).unwrap();
        assert!(lo < 1e-10);
    }

    #[test]
    fn su_feedback_examples() {
        let csit = su_rate_csit_upper(&su(10.0, 4, 3, None)).unwrap();
        let fb = su_rate_fb(&su(10.0, 4, 3, Some(60))).unwrap();
        assert!((fb.approx - csit).abs() < 1e-6 && (fb.lower_bound - csit).abs() < 1e-4);

        let p = su(2.0, 6, 2, Some(0));
        let zero = su_rate_fb(&p).unwrap().approx;
        let eta = 0.1175f64;
        let expect = (1.0 + (1.0 - eta) * 2.0 / (eta * 2.0 + 1.0)).log2();
        assert!((zero - expect).abs() < 1e-12);

        let fb = su_rate_fb(&su(1e8, 16, 4, Some(3))).unwrap();
        assert!((fb.approx - (1.0 / 0.009497f64).log2()).abs() < 1e-3);
        assert!(su_rate_fb(&su(1.0, 4, 3, None)).is_err());
    }

    #[test]
    fn su_feedback_asymptotes_match_power_loss() {
        let p = su(1e-6, 4, 3, Some(6));
        let (low_fb, _) = su_rate_fb_asymptotes(&p).unwrap();
        let (low_csit, _) = su_rate_csit_asymptotes(&p).unwrap();
        let ratio = linear_to_db(low_fb / low_csit);
        assert!((ratio - su_power_loss_db(4, 6)).abs() < 1e-5);
    }

    #[test]
    fn power_losses() {
        assert!((su_power_loss_db(4, 6) + 1.25).abs() < 5e-3);
        assert!((su_power_loss_db(4, 12) + 0.28).abs() < 5e-3);
        assert!((su_power_loss_db(4, 18) + 0.07).abs() < 5e-3);
        assert!((su_power_loss_db(16, 8) + 5.10).abs() < 5e-3);
        assert_eq!(su_power_loss_db(4, 0), f64::NEG_INFINITY);

        assert!((adc_power_loss_db(1).unwrap() + 1.9613).abs() < 2e-4);
        assert!((adc_power_loss_db(4).unwrap() + 0.0414).abs() < 5e-5);
        assert!(adc_power_loss_db(40).unwrap().abs() < 1e-20);
    }

    #[test]
    fn siqnr_examples() {
        let p = LinkParams::new(200.0, 1.0, 4, 2, 3, Some(6)).unwrap();
        assert_eq!(mu_siqnr(&p, 0.0, 0.7), 0.0);
        let s = mu_siqnr(&p, 3.0, 0.5);
        let expect = (1.0 - ETA3) * 300.0 / (ETA3 * 300.0 + 50.0 + 1.0);
        assert!((s - expect).abs() < 1e-12);
        assert!((s - 4.7201).abs() < 1e-4);
        let single = su(100.0, 4, 3, None);
        assert!((mu_siqnr(&p, 2.5, 0.0) - su_sqnr(&single, 2.5)).abs() < 1e-12);
    }

    #[test]
    fn zf_csit_examples() {
        for (b, v) in [(3, 4.86), (4, 6.72), (5, 8.64)] {
            let p = LinkParams::new(1e12, 1.0, 4, 2, b, None).unwrap();
            assert!((mu_rate_zf_csit_upper(&p) - v).abs() < 5e-3, "b={b}");
        }
        let k1 = su(7.0, 6, 2, None);
        assert!((mu_rate_zf_csit_upper(&k1) - su_rate_csit_upper(&k1).unwrap()).abs() < 1e-14);
        let tiny = LinkParams::new(1e-14, 1.0, 4, 2, 3, None).unwrap();
        assert!(mu_rate_zf_csit_upper(&tiny) < 1e-12);
    }

    #[test]
    fn zf_feedback_limits() {
        let p = LinkParams::new(1e3, 1.0, 4, 2, 3, Some(64)).unwrap();
        let fb = mu_rate_zf_fb(&p).unwrap();
        let csit = mu_rate_zf_csit_upper(&p);
        assert!((fb.approx - csit).abs() < 1e-5 && (fb.lower_bound - csit).abs() < 1e-5);

        let k1 = su(5.0, 4, 3, Some(5));
        let a = mu_rate_zf_fb(&k1).unwrap();
        let b = su_rate_fb(&k1).unwrap();
        assert!((a.approx - b.approx).abs() < 1e-14 && (a.lower_bound - b.lower_bound).abs() < 1e-14);

        let hi = LinkParams::new(1e9, 1.0, 4, 2, 3, Some(6)).unwrap();
        let gap = mu_rate_zf_csit_upper(&hi) - mu_rate_zf_fb(&hi).unwrap().lower_bound;
        assert!(gap <= mu_rate_loss_high_snr(&hi).unwrap() + 1e-6);
        assert!((gap - 2.2037).abs() < 1e-3);
    }

    #[test]
    fn loss_bound_limits() {
        let p = LinkParams::new(1e3, 1.0, 4, 2, 3, Some(64)).unwrap();
        assert!(mu_rate_loss_bound(&p).unwrap() < 1e-5);

        let low = LinkParams::new(1e-6, 1.0, 4, 2, 3, Some(6)).unwrap();
        let full = mu_rate_loss_bound(&low).unwrap();
        let approx = mu_rate_loss_low_snr(&low).unwrap();
        assert!((full / approx - 1.0).abs() < 1e-3);
        // loss ≈ (1 − 10^(L/10)) × rate at low SNR
        let rate = mu_rate_zf_csit_upper(&low);
        let implied = rate * (1.0 - db_to_linear(su_power_loss_db(4, 6)));
        assert!((full / implied - 1.0).abs() < 1e-3);

        let hi = LinkParams::new(1e10, 1.0, 4, 2, 3, Some(6)).unwrap();
        assert!((mu_rate_loss_bound(&hi).unwrap() - mu_rate_loss_high_snr(&hi).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn high_snr_loss_example() {
        let t = loss_terms(4, 2, 6);
        assert!((t.c1 - 2.25).abs() < 1e-15);
        assert!((t.c2 - 1.0 / 3.0).abs() < 1e-15);
        let p = LinkParams::new(1.0, 1.0, 4, 2, 3, Some(6)).unwrap();
        let expect = (1.0 + (1.0 - ETA3) / ETA3 / 7.75f64).log2();
        assert!((mu_rate_loss_high_snr(&p).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 2.20).abs() < 5e-3);
        assert!(mu_rate_loss_high_snr(&p.with_feedback_bits(Some(200))).unwrap() < 1e-12);
        assert!(mu_rate_loss_high_snr(&su(1.0, 4, 3, Some(6))).is_err());
        assert_eq!(loss_terms(4, 1, 6).c2, 0.0);
    }

    #[test]
    fn loss_saturates_along_scaling_trajectory() {
        // B = 2(Nt−1)b + c keeps the high-SNR loss bounded as b grows
        let losses: Vec<f64> = (3..=8)
            .map(|b| {
                let p = LinkParams::new(1.0, 1.0, 4, 2, b, Some(6 * b - 12)).unwrap();
                mu_rate_loss_high_snr(&p).unwrap()
            })
            .collect();
        for w in losses.windows(2).skip(3) {
            assert!((w[1] - w[0]).abs() < 0.02, "{losses:?}");
        }
    }

    #[test]
    fn scaling_term_examples() {
        let v = mu_scaling_term(4, 12, 4).unwrap();
        assert!((v - 2.0 / (PI * 3f64.sqrt()) * 16.0).abs() < 1e-12);
        assert!((v - 5.88).abs() < 5e-3);
        assert_eq!(mu_scaling_term(4, 12, 4).unwrap(), mu_scaling_term(5, 18, 4).unwrap());
        let c = 2.0 / (PI * 3f64.sqrt());
        for b in 1..12 {
            assert_eq!(mu_scaling_term(b, 6 * b, 4).unwrap(), c);
        }
        assert!((c - 0.368).abs() < 1e-3);
        assert!(mu_scaling_term(3, 2, 1).is_err());
    }

    #[test]
    fn feedback_budget_search() {
        assert_eq!(feedback_bits_for_loss(2.21, 3, 4, 2).unwrap(), 6);
        assert_eq!(feedback_bits_for_loss(100.0, 3, 4, 2).unwrap(), 0);
        assert!(matches!(feedback_bits_for_loss(1e-9, 8, 16, 16), Err(Error::Infeasible { .. })));
        assert!(feedback_bits_for_loss(0.0, 3, 4, 2).is_err());
        assert!(feedback_bits_for_loss(1.0, 3, 4, 1).is_err());
        let mut prev = u32::MAX;
        for d in [0.01, 0.1, 0.5, 1.0, 2.0, 4.0] {
            let b = feedback_bits_for_loss(d, 4, 4, 2).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounds_are_ordered(
                snr_db in -30.0f64..60.0,
                n_t in 2usize..=16,
                k_frac in 0.0f64..1.0,
                b in 1u32..=8,
                bits in 0u32..=24,
            ) {
                let users = 1 + ((n_t - 1) as f64 * k_frac) as usize;
                let su_p = LinkParams::single_user(snr_db, n_t, b, Some(bits)).unwrap();
                let su_fb = su_rate_fb(&su_p).unwrap();
                prop_assert!(su_fb.lower_bound <= su_fb.approx + 1e-12);
                prop_assert!(su_fb.approx <= su_rate_csit_upper(&su_p).unwrap() + 1e-12);

                let mu_p = LinkParams::multi_user(snr_db, n_t, users, b, Some(bits)).unwrap();
                let mu_fb = mu_rate_zf_fb(&mu_p).unwrap();
                prop_assert!(mu_fb.lower_bound <= mu_fb.approx + 1e-12);
                prop_assert!(mu_fb.approx <= mu_rate_zf_csit_upper(&mu_p) + 1e-12);
                prop_assert!(mu_rate_loss_bound(&mu_p).unwrap() >= -1e-12);
            }

            #[test]
            fn scaling_invariance(n_t in 2usize..=8, b in 3u32..=10, bits in 0u32..=40) {
                let step = 2 * (n_t as u32 - 1);
                prop_assert_eq!(
                    mu_scaling_term(b, bits, n_t).unwrap(),
                    mu_scaling_term(b + 1, bits + step, n_t).unwrap()
                );
            }
        }
    }
}
