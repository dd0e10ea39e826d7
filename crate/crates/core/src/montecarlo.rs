//! Seeded Monte Carlo evaluation of single- and multi-user rates.
//!
//! Every trial owns a ChaCha8 stream keyed by the scenario seed and selected
//! by the trial index, so a trial draws the same channels and codebooks no
//! matter which worker runs it. Per-trial results are collected in trial
//! order and reduced with pairwise summation; the output does not depend on
//! the size of the rayon pool.
//!
//! Per-realization rates come from the Bussgang SQNR/SIQNR. Channel gains do
//! not depend on the SNR, so each trial is drawn once and evaluated on the
//! whole SNR grid.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feedback::{
    complex_normal, generate_rvq_with_rng, quantize_with_codebook, quantize_with_fresh_codebook, ChannelVector,
    Codebook, QuantizedDirection, MAX_FEEDBACK_BITS,
};
use crate::precoder::{zf_beamformers, BeamformerSet};
use crate::rates::{
    db_to_linear, mu_rate_zf_csit_upper, mu_rate_zf_fb, mu_siqnr, su_rate_csit_upper, su_rate_fb, su_sqnr,
    LinkParams,
};

/// Redraw budget per trial for ill-conditioned ZF direction sets.
pub const MAX_REDRAWS_PER_TRIAL: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookMode {
    /// A new codebook for every trial (and user).
    Fresh,
    /// One codebook per user, shared by all trials.
    Fixed,
}

impl std::str::FromStr for CodebookMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fresh" => Ok(CodebookMode::Fresh),
            "fixed" => Ok(CodebookMode::Fixed),
            other => Err(Error::Parameter(format!("codebook mode must be fresh or fixed, got {other:?}"))),
        }
    }
}

impl fmt::Display for CodebookMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodebookMode::Fresh => "fresh",
            CodebookMode::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SingleUser,
    MultiUser,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::SingleUser => "single-user",
            Scenario::MultiUser => "multi-user",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n_t: usize,
    pub users: usize,
    pub adc_bits: u32,
    pub feedback_bits: u32,
    pub noise_variance: f64,
    /// SNR points `10 log₁₀(P_t/σ²)` in dB, strictly increasing.
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub codebook_mode: CodebookMode,
}

impl ScenarioConfig {
    pub fn single_user(n_t: usize, adc_bits: u32, feedback_bits: u32, snr_grid_db: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            scenario: Scenario::SingleUser,
            n_t,
            users: 1,
            adc_bits,
            feedback_bits,
            noise_variance: 1.0,
            snr_grid_db,
            trials,
            seed,
            codebook_mode: CodebookMode::Fresh,
        }
    }

    pub fn multi_user(
        n_t: usize,
        users: usize,
        adc_bits: u32,
        feedback_bits: u32,
        snr_grid_db: Vec<f64>,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self {
            scenario: Scenario::MultiUser,
            users,
            ..Self::single_user(n_t, adc_bits, feedback_bits, snr_grid_db, trials, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Parameter("SNR grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Parameter("SNR grid has non-finite points".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("SNR grid must be strictly increasing".into()));
        }
        if self.n_t == 0 {
            return Err(Error::Parameter("Nt must be at least 1".into()));
        }
        if self.feedback_bits > MAX_FEEDBACK_BITS {
            return Err(Error::Parameter(format!(
                "feedback bits must be at most {MAX_FEEDBACK_BITS}, got {}",
                self.feedback_bits
            )));
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::Parameter("noise variance must be positive".into()));
        }
        match self.scenario {
            Scenario::SingleUser if self.users != 1 => {
                Err(Error::Parameter("single-user scenario needs K = 1".into()))
            }
            Scenario::MultiUser if self.users < 2 || self.users > self.n_t => Err(Error::Parameter(format!(
                "multi-user scenario needs 2 <= K <= Nt, got K={}, Nt={}",
                self.users, self.n_t
            ))),
            _ => Ok(()),
        }
    }

    /// Link parameters at one SNR point.
    pub fn link_at(&self, snr_db: f64, feedback_bits: Option<u32>) -> Result<LinkParams> {
        LinkParams::new(
            db_to_linear(snr_db) * self.noise_variance,
            self.noise_variance,
            self.n_t,
            self.users,
            self.adc_bits,
            feedback_bits,
        )
    }

    fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }

    // Fixed-mode codebooks come from the top of the stream space so they
    // never overlap a trial stream.
    fn fixed_codebooks(&self) -> Result<Vec<Codebook>> {
        (0..self.users)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(u64::MAX - k as u64);
                generate_rvq_with_rng(self.n_t, self.feedback_bits, &mut rng)
            })
            .collect()
    }
}

/// Averaged per-user rate versus SNR for one labeled scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub label: String,
    pub scenario: Scenario,
    pub adc_bits: u32,
    /// `None` for perfect CSIT.
    pub feedback_bits: Option<u32>,
    pub snr_db: Vec<f64>,
    pub rate_bps_hz: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trials: usize,
    pub discarded_trials: usize,
}

impl RateCurve {
    /// Rate at `snr_db`, interpolating `ln(rate)` linearly in dB between
    /// grid points (rates grow geometrically with SNR in the low-SNR regime).
    pub fn rate_at(&self, snr_db: f64) -> Option<f64> {
        let i = self.snr_db.iter().position(|&s| s >= snr_db)?;
        if self.snr_db[i] == snr_db {
            return Some(self.rate_bps_hz[i]);
        }
        if i == 0 {
            return None;
        }
        let (s0, s1) = (self.snr_db[i - 1], self.snr_db[i]);
        let (r0, r1) = (self.rate_bps_hz[i - 1], self.rate_bps_hz[i]);
        let t = (snr_db - s0) / (s1 - s0);
        Some(interpolate_rate(r0, r1, t))
    }

    /// SNR at which this curve reaches `rate`, inverting the same
    /// interpolation as [`RateCurve::rate_at`].
    pub fn snr_for_rate(&self, rate: f64) -> Option<f64> {
        let i = self.rate_bps_hz.iter().position(|&r| r >= rate)?;
        if self.rate_bps_hz[i] == rate {
            return Some(self.snr_db[i]);
        }
        if i == 0 {
            return None;
        }
        let (s0, s1) = (self.snr_db[i - 1], self.snr_db[i]);
        let (r0, r1) = (self.rate_bps_hz[i - 1], self.rate_bps_hz[i]);
        let t = if r0 > 0.0 {
            (rate / r0).ln() / (r1 / r0).ln()
        } else {
            (rate - r0) / (r1 - r0)
        };
        Some(s0 + t * (s1 - s0))
    }
}

fn interpolate_rate(r0: f64, r1: f64, t: f64) -> f64 {
    if r0 > 0.0 && r1 > 0.0 {
        (r0.ln() + t * (r1 / r0).ln()).exp()
    } else {
        r0 + t * (r1 - r0)
    }
}

/// Horizontal distance in dB between two rate curves at the reference
/// curve's `snr_db`: the extra SNR (negative dB) `other` needs to reach the
/// reference rate. `None` if `other` never gets there on its grid.
pub fn horizontal_gap_db(reference: &RateCurve, other: &RateCurve, snr_db: f64) -> Option<f64> {
    let target = reference.rate_at(snr_db)?;
    Some(snr_db - other.snr_for_rate(target)?)
}

/// Draws `h ~ CN(0, I_Nt)`.
pub fn draw_channel<R: Rng + ?Sized>(n_t: usize, rng: &mut R) -> ChannelVector {
    let coefficients = (0..n_t).map(|_| complex_normal(rng)).collect();
    ChannelVector::new(coefficients).expect("a Gaussian draw is nonzero almost surely")
}

fn quantize<R: Rng + ?Sized>(
    h: &ChannelVector,
    feedback_bits: u32,
    fixed: Option<&Codebook>,
    rng: &mut R,
) -> Result<QuantizedDirection> {
    match fixed {
        Some(cb) => quantize_with_codebook(h, cb),
        None => quantize_with_fresh_codebook(h, feedback_bits, rng),
    }
}

/// Beamforming gains of one single-user trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuTrial {
    /// `‖h‖²`, conjugate beamforming with perfect CSIT.
    pub csit_gain: f64,
    /// `|h* ĥ|² = ‖h‖² cos²`, beamforming along the fed-back codeword.
    pub feedback_gain: f64,
}

/// Gains of one user in one multi-user trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuUserGains {
    pub csit_desired: f64,
    pub csit_interference: f64,
    pub feedback_desired: f64,
    pub feedback_interference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuTrial {
    pub users: Vec<MuUserGains>,
    pub discarded: usize,
}

/// Draws every single-user trial of `config`.
pub fn su_trials(config: &ScenarioConfig) -> Result<Vec<SuTrial>> {
    config.validate()?;
    if config.scenario != Scenario::SingleUser {
        return Err(Error::Parameter("su_trials needs a single-user scenario".into()));
    }
    let fixed = match config.codebook_mode {
        CodebookMode::Fixed => Some(config.fixed_codebooks()?.remove(0)),
        CodebookMode::Fresh => None,
    };
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = config.trial_rng(t);
            let h = draw_channel(config.n_t, &mut rng);
            let q = quantize(&h, config.feedback_bits, fixed.as_ref(), &mut rng)?;
            Ok(SuTrial {
                csit_gain: h.norm_squared,
                feedback_gain: h.norm_squared * q.cos2,
            })
        })
        .collect()
}

fn mu_user_gains(channels: &[ChannelVector], csit: &BeamformerSet, fb: &BeamformerSet) -> Vec<MuUserGains> {
    channels
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let (csit_desired, csit_interference) = csit.received_powers(&h.coefficients, k);
            let (feedback_desired, feedback_interference) = fb.received_powers(&h.coefficients, k);
            MuUserGains {
                csit_desired,
                csit_interference,
                feedback_desired,
                feedback_interference,
            }
        })
        .collect()
}

/// Runs one multi-user realization on `rng`, redrawing ill-conditioned sets.
pub fn mu_trial<R: Rng + ?Sized>(config: &ScenarioConfig, fixed: Option<&[Codebook]>, rng: &mut R) -> Result<MuTrial> {
    let mut discarded = 0;
    loop {
        let channels: Vec<ChannelVector> = (0..config.users).map(|_| draw_channel(config.n_t, rng)).collect();
        let directions: Vec<Vec<Complex64>> = channels.iter().map(|h| h.direction.clone()).collect();
        let quantized = channels
            .iter()
            .enumerate()
            .map(|(k, h)| Ok(quantize(h, config.feedback_bits, fixed.map(|cbs| &cbs[k]), rng)?.codeword))
            .collect::<Result<Vec<_>>>()?;
        let attempt = zf_beamformers(&directions).and_then(|csit| Ok((csit, zf_beamformers(&quantized)?)));
        match attempt {
            Ok((csit, fb)) => {
                return Ok(MuTrial {
                    users: mu_user_gains(&channels, &csit, &fb),
                    discarded,
                })
            }
            Err(Error::Conditioning { condition_number }) => {
                discarded += 1;
                if discarded >= MAX_REDRAWS_PER_TRIAL {
                    return Err(Error::Conditioning { condition_number });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Draws every multi-user trial of `config`.
pub fn mu_trials(config: &ScenarioConfig) -> Result<Vec<MuTrial>> {
    config.validate()?;
    if config.scenario != Scenario::MultiUser {
        return Err(Error::Parameter("mu_trials needs a multi-user scenario".into()));
    }
    let fixed = match config.codebook_mode {
        CodebookMode::Fixed => Some(config.fixed_codebooks()?),
        CodebookMode::Fresh => None,
    };
    (0..config.trials)
        .into_par_iter()
        .map(|t| mu_trial(config, fixed.as_deref(), &mut config.trial_rng(t)))
        .collect()
}

/// Pairwise sum; the reduction tree depends only on the slice length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn curve_from<F>(config: &ScenarioConfig, label: &str, feedback_bits: Option<u32>, discarded: usize, trials: usize, per_trial: F) -> Result<RateCurve>
where
    F: Fn(&LinkParams, usize) -> f64,
{
    let mut rate_bps_hz = Vec::with_capacity(config.snr_grid_db.len());
    let mut stderr = Vec::with_capacity(config.snr_grid_db.len());
    let mut scratch = vec![0.0; trials];
    for &snr in &config.snr_grid_db {
        let link = config.link_at(snr, feedback_bits)?;
        for (t, slot) in scratch.iter_mut().enumerate() {
            *slot = per_trial(&link, t);
        }
        let (m, se) = mean_and_stderr(&scratch);
        rate_bps_hz.push(m);
        stderr.push(se);
    }
    Ok(RateCurve {
        label: label.to_string(),
        scenario: config.scenario,
        adc_bits: config.adc_bits,
        feedback_bits,
        snr_db: config.snr_grid_db.clone(),
        rate_bps_hz,
        stderr,
        trials,
        discarded_trials: discarded,
    })
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

pub const CSIT_LABEL: &str = "csit";
pub const FEEDBACK_LABEL: &str = "feedback";

/// Averages precomputed single-user trials into CSIT and feedback curves.
pub fn su_curves(config: &ScenarioConfig, trials: &[SuTrial]) -> Result<(RateCurve, RateCurve)> {
    let csit = curve_from(config, CSIT_LABEL, None, 0, trials.len(), |p, t| {
        log2_1p(su_sqnr(p, trials[t].csit_gain))
    })?;
    let fb = curve_from(config, FEEDBACK_LABEL, Some(config.feedback_bits), 0, trials.len(), |p, t| {
        log2_1p(su_sqnr(p, trials[t].feedback_gain))
    })?;
    Ok((csit, fb))
}

/// Single-user CSIT and limited-feedback rate curves.
pub fn simulate_su(config: &ScenarioConfig) -> Result<(RateCurve, RateCurve)> {
    su_curves(config, &su_trials(config)?)
}

/// Averages precomputed multi-user trials into per-user CSIT and feedback curves.
pub fn mu_curves(config: &ScenarioConfig, trials: &[MuTrial]) -> Result<(RateCurve, RateCurve)> {
    let discarded = trials.iter().map(|t| t.discarded).sum();
    let per_user = |p: &LinkParams, t: usize, feedback: bool| {
        let users = &trials[t].users;
        let total: f64 = users
            .iter()
            .map(|g| {
                let (d, i) = if feedback {
                    (g.feedback_desired, g.feedback_interference)
                } else {
                    (g.csit_desired, g.csit_interference)
                };
                log2_1p(mu_siqnr(p, d, i))
            })
            .sum();
        total / users.len() as f64
    };
    let csit = curve_from(config, CSIT_LABEL, None, discarded, trials.len(), |p, t| per_user(p, t, false))?;
    let fb = curve_from(config, FEEDBACK_LABEL, Some(config.feedback_bits), discarded, trials.len(), |p, t| {
        per_user(p, t, true)
    })?;
    Ok((csit, fb))
}

/// Multi-user ZF rate curves with perfect CSIT and with RVQ feedback.
pub fn simulate_mu(config: &ScenarioConfig) -> Result<(RateCurve, RateCurve)> {
    mu_curves(config, &mu_trials(config)?)
}

/// Per-SNR comparison of a simulated curve against a closed-form expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub snr_db: f64,
    pub curve: String,
    pub expression: String,
    pub simulated: f64,
    pub stderr: f64,
    pub analytic: f64,
    /// `simulated − analytic`
    pub deviation: f64,
}

pub const ANALYTIC_CSIT_UPPER: &str = "analytic_csit_upper";
pub const ANALYTIC_FB_APPROX: &str = "analytic_fb_approx";
pub const ANALYTIC_FB_LOWER: &str = "analytic_fb_lower";

/// Closed-form values on the config's SNR grid, as (label, rates).
pub fn analytic_curves(config: &ScenarioConfig) -> Result<Vec<(&'static str, Vec<f64>)>> {
    let mut upper = Vec::new();
    let mut approx = Vec::new();
    let mut lower = Vec::new();
    for &snr in &config.snr_grid_db {
        let p = config.link_at(snr, Some(config.feedback_bits))?;
        let (u, fb) = match config.scenario {
            Scenario::SingleUser => (su_rate_csit_upper(&p)?, su_rate_fb(&p)?),
            Scenario::MultiUser => (mu_rate_zf_csit_upper(&p), mu_rate_zf_fb(&p)?),
        };
        upper.push(u);
        approx.push(fb.approx);
        lower.push(fb.lower_bound);
    }
    Ok(vec![
        (ANALYTIC_CSIT_UPPER, upper),
        (ANALYTIC_FB_APPROX, approx),
        (ANALYTIC_FB_LOWER, lower),
    ])
}

/// Compares simulated curves with the matching closed-form expressions.
pub fn analytic_report(config: &ScenarioConfig, csit: &RateCurve, fb: &RateCurve) -> Result<Vec<ReportRow>> {
    let analytic = analytic_curves(config)?;
    let mut rows = Vec::new();
    for (i, &snr) in config.snr_grid_db.iter().enumerate() {
        for (label, values) in &analytic {
            let curve = if *label == ANALYTIC_CSIT_UPPER { csit } else { fb };
            rows.push(ReportRow {
                snr_db: snr,
                curve: curve.label.clone(),
                expression: label.to_string(),
                simulated: curve.rate_bps_hz[i],
                stderr: curve.stderr[i],
                analytic: values[i],
                deviation: curve.rate_bps_hz[i] - values[i],
            });
        }
    }
    Ok(rows)
}

/// Simulates `config` and compares the result with the closed forms.
pub fn empirical_vs_analytic_report(config: &ScenarioConfig) -> Result<Vec<ReportRow>> {
    let (csit, fb) = match config.scenario {
        Scenario::SingleUser => simulate_su(config)?,
        Scenario::MultiUser => simulate_mu(config)?,
    };
    analytic_report(config, &csit, &fb)
}
