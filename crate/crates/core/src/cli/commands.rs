//! Subcommand implementations, independent of argument parsing.

use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentFile, FeedbackRule};
use super::output::{render_csv, CsvRow};
use crate::error::{Error, Result};
use crate::feedback::{complex_normal, expected_cos2, inner, quantize_with_fresh_codebook, ChannelVector};
use crate::montecarlo::{
    analytic_curves, mean_and_stderr, simulate_mu, simulate_su, CodebookMode, RateCurve, Scenario, ScenarioConfig,
};
use crate::precoder::zf_beamformers;
use crate::quantizer::{design_uniform_quantizer, empirical_nmse_and_gain, nmse_table};
use crate::rates::{
    mu_rate_loss_bound, mu_rate_loss_high_snr, mu_rate_zf_csit_upper, mu_rate_zf_fb, mu_scaling_term, nmse_for_bits,
    su_rate_csit_upper, su_rate_fb, LinkParams,
};

pub const DEFAULT_SEED: u64 = 20160101;
pub const SEED_ENV: &str = "QMISO_SEED";
pub const GAP_LABEL: &str = "gap";

// Reference rows: (10 log₁₀(1−η_b), log₂(1/η_b)) for b = 1..8.
const REFERENCE_ROWS: [(f64, f64); 8] = [
    (-1.9613, 1.46),
    (-0.5429, 3.09),
    (-0.1527, 4.86),
    (-0.0414, 6.72),
    (-0.0109, 8.64),
    (-0.0029, 10.56),
    (-0.0007, 12.56),
    (-0.0002, 14.56),
];

/// One row of the quantizer table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub bits: u32,
    pub step: f64,
    pub nmse: f64,
    pub power_loss_db: f64,
    pub rate_ceiling: f64,
    pub reference_nmse: f64,
    pub reference_power_loss_db: f64,
    pub reference_rate_ceiling: f64,
    /// `|η_designed / η_reference − 1|`
    pub relative_error: f64,
}

/// Designs the uniform quantizer for each `b` and lines it up with the
/// reference constants.
pub fn cmd_table(bits: impl IntoIterator<Item = u32>) -> Result<Vec<TableRow>> {
    bits.into_iter()
        .map(|b| {
            let q = design_uniform_quantizer(b)?;
            let reference_nmse = nmse_table(b)?;
            let (reference_power_loss_db, reference_rate_ceiling) = REFERENCE_ROWS[b as usize - 1];
            Ok(TableRow {
                bits: b,
                step: q.step,
                nmse: q.nmse,
                power_loss_db: 10.0 * (1.0 - q.nmse).log10(),
                rate_ceiling: (1.0 / q.nmse).log2(),
                reference_nmse,
                reference_power_loss_db,
                reference_rate_ceiling,
                relative_error: (q.nmse / reference_nmse - 1.0).abs(),
            })
        })
        .collect()
}

pub fn format_table(rows: &[TableRow]) -> String {
    let mut s = format!(
        "{:>2} {:>10} {:>12} {:>12} {:>10} {:>10} {:>12} {:>10} {:>10} {:>10}\n",
        "b", "step", "nmse", "ref_nmse", "rel_err", "loss_dB", "ref_loss_dB", "ceiling", "ref_ceil", ""
    );
    for r in rows {
        s.push_str(&format!(
            "{:>2} {:>10.6} {:>12.6e} {:>12.6e} {:>10.3e} {:>10.4} {:>12.4} {:>10.2} {:>10.2}\n",
            r.bits,
            r.step,
            r.nmse,
            r.reference_nmse,
            r.relative_error,
            r.power_loss_db,
            r.reference_power_loss_db,
            r.rate_ceiling,
            r.reference_rate_ceiling,
        ));
    }
    s
}

/// Sweep options as given on the command line; `None`/empty means unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOptions {
    pub n_t: Option<usize>,
    pub users: Option<usize>,
    pub adc_bits: Vec<u32>,
    pub feedback_bits: Vec<u32>,
    pub feedback_rule: Option<String>,
    pub snr_min: Option<f64>,
    pub snr_max: Option<f64>,
    pub snr_step: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub codebook_mode: Option<CodebookMode>,
    pub analytic: bool,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Fully resolved sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub scenario: Scenario,
    pub n_t: usize,
    pub users: usize,
    /// (b, B) pairs, one pair of curves each.
    pub pairs: Vec<(u32, u32)>,
    pub snr_grid_db: Vec<f64>,
    pub snr_range: (f64, f64, f64),
    pub trials: usize,
    pub seed: u64,
    pub codebook_mode: CodebookMode,
    pub noise_variance: f64,
    pub analytic: bool,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl fmt::Display for SweepPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let adc: Vec<String> = self.pairs.iter().map(|p| p.0.to_string()).collect();
        let fb: Vec<String> = self.pairs.iter().map(|p| p.1.to_string()).collect();
        write!(
            f,
            "qmiso scenario={} n_t={} users={} adc_bits={} feedback_bits={} snr_db={}:{}:{} noise_variance={} trials={} seed={} codebook_mode={} analytic={}",
            self.scenario,
            self.n_t,
            self.users,
            adc.join(";"),
            fb.join(";"),
            self.snr_range.0,
            self.snr_range.2,
            self.snr_range.1,
            self.noise_variance,
            self.trials,
            self.seed,
            self.codebook_mode,
            self.analytic,
        )
    }
}

/// Builds `min, min+step, …` up to `max` inclusive.
pub fn snr_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= min) || !min.is_finite() || !max.is_finite() {
        return Err(Error::Config(format!("invalid SNR range {min}:{step}:{max}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|i| ((min + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| Error::Config(format!("{SEED_ENV}={v:?}: {e}"))),
        Err(_) => Ok(None),
    }
}

fn pair_bits(adc: &[u32], feedback: &[u32]) -> Result<Vec<(u32, u32)>> {
    match feedback.len() {
        1 => Ok(adc.iter().map(|&b| (b, feedback[0])).collect()),
        n if n == adc.len() => Ok(adc.iter().copied().zip(feedback.iter().copied()).collect()),
        n => Err(Error::Config(format!(
            "{n} feedback budgets given for {} ADC resolutions",
            adc.len()
        ))),
    }
}

enum FeedbackSpec {
    Bits(Vec<u32>),
    Rule(String),
}

fn feedback_spec(bits: &[u32], rule: Option<&String>, origin: &str) -> Result<Option<FeedbackSpec>> {
    match (bits.is_empty(), rule) {
        (false, Some(_)) => Err(Error::Config(format!(
            "{origin} sets both feedback bits and a feedback rule"
        ))),
        (false, None) => Ok(Some(FeedbackSpec::Bits(bits.to_vec()))),
        (true, Some(r)) => Ok(Some(FeedbackSpec::Rule(r.clone()))),
        (true, None) => Ok(None),
    }
}

/// Merges flags, experiment file and defaults (in that order of precedence).
pub fn resolve_sweep(scenario: Scenario, opts: &SweepOptions) -> Result<SweepPlan> {
    let file = match &opts.config {
        Some(p) => ExperimentFile::load(p)?,
        None => ExperimentFile::default(),
    };
    let (def_nt, def_users, def_adc, def_fb) = match scenario {
        Scenario::SingleUser => (16, 1, vec![1, 2, 3, 4], FeedbackSpec::Bits(vec![8])),
        Scenario::MultiUser => (4, 2, vec![3, 4, 5], FeedbackSpec::Rule("2(Nt-1)*b-12".into())),
    };
    let n_t = opts.n_t.or(file.n_t).unwrap_or(def_nt);
    let users = opts.users.or(file.users).unwrap_or(def_users);
    match scenario {
        Scenario::SingleUser if users != 1 => {
            return Err(Error::Config("single-user sweep needs --users 1".into()))
        }
        Scenario::MultiUser if users < 2 || users > n_t => {
            return Err(Error::Config(format!("need 2 <= users <= Nt, got {users} users, Nt={n_t}")))
        }
        _ => {}
    }
    let adc = if !opts.adc_bits.is_empty() {
        opts.adc_bits.clone()
    } else {
        file.adc_bits.clone().unwrap_or(def_adc)
    };
    if adc.is_empty() {
        return Err(Error::Config("no ADC resolutions given".into()));
    }
    let fb = match feedback_spec(&opts.feedback_bits, opts.feedback_rule.as_ref(), "command line")? {
        Some(f) => f,
        None => feedback_spec(
            file.feedback_bits.as_deref().unwrap_or(&[]),
            file.feedback_rule.as_ref(),
            "experiment file",
        )?
        .unwrap_or(def_fb),
    };
    let pairs = match fb {
        FeedbackSpec::Bits(bits) => pair_bits(&adc, &bits)?,
        FeedbackSpec::Rule(expr) => {
            let rule = FeedbackRule::parse(&expr, n_t)?;
            adc.iter().map(|&b| Ok((b, rule.apply(b)?))).collect::<Result<_>>()?
        }
    };
    let snr_min = opts.snr_min.or(file.snr_min).unwrap_or(-20.0);
    let snr_max = opts.snr_max.or(file.snr_max).unwrap_or(40.0);
    let snr_step = opts.snr_step.or(file.snr_step).unwrap_or(5.0);
    let seed = match opts.seed.or(file.seed) {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(DEFAULT_SEED),
    };
    let plan = SweepPlan {
        scenario,
        n_t,
        users,
        pairs,
        snr_grid_db: snr_grid(snr_min, snr_max, snr_step)?,
        snr_range: (snr_min, snr_max, snr_step),
        trials: opts.trials.or(file.trials).unwrap_or(1000),
        seed,
        codebook_mode: opts.codebook_mode.or(file.codebook_mode).unwrap_or(CodebookMode::Fresh),
        noise_variance: file.noise_variance.unwrap_or(1.0),
        analytic: opts.analytic || file.analytic.unwrap_or(false),
        out: opts.out.clone().or(file.out),
        threads: opts.threads,
    };
    for &(b, bits) in &plan.pairs {
        plan.scenario_config(b, bits).validate()?;
    }
    Ok(plan)
}

impl SweepPlan {
    pub fn scenario_config(&self, adc_bits: u32, feedback_bits: u32) -> ScenarioConfig {
        ScenarioConfig {
            scenario: self.scenario,
            n_t: self.n_t,
            users: self.users,
            adc_bits,
            feedback_bits,
            noise_variance: self.noise_variance,
            snr_grid_db: self.snr_grid_db.clone(),
            trials: self.trials,
            seed: self.seed,
            codebook_mode: self.codebook_mode,
        }
    }
}

/// Result of a sweep: the curves per (b, B) pair and the rendered CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub plan: SweepPlan,
    pub curves: Vec<(RateCurve, RateCurve)>,
    pub rows: Vec<CsvRow>,
    pub csv: String,
}

fn gap_rows(csit: &RateCurve, fb: &RateCurve) -> Vec<CsvRow> {
    (0..csit.snr_db.len())
        .map(|i| CsvRow {
            snr_db: csit.snr_db[i],
            scenario: csit.scenario,
            adc_bits: csit.adc_bits,
            feedback_bits: fb.feedback_bits,
            label: GAP_LABEL.into(),
            rate_bps_hz: csit.rate_bps_hz[i] - fb.rate_bps_hz[i],
            stderr: csit.stderr[i].hypot(fb.stderr[i]),
            trials: csit.trials,
            discarded: csit.discarded_trials,
        })
        .collect()
}

/// Runs a resolved sweep on the configured worker pool.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutput> {
    let body = || -> Result<SweepOutput> {
        let mut curves = Vec::new();
        let mut rows = Vec::new();
        for &(b, bits) in &plan.pairs {
            let config = plan.scenario_config(b, bits);
            let (csit, fb) = match plan.scenario {
                Scenario::SingleUser => simulate_su(&config)?,
                Scenario::MultiUser => simulate_mu(&config)?,
            };
            rows.extend(CsvRow::from_curve(&csit));
            rows.extend(CsvRow::from_curve(&fb));
            if plan.scenario == Scenario::MultiUser {
                rows.extend(gap_rows(&csit, &fb));
            }
            if plan.analytic {
                for (label, values) in analytic_curves(&config)? {
                    let feedback_bits = if label == crate::montecarlo::ANALYTIC_CSIT_UPPER { None } else { Some(bits) };
                    rows.extend(config.snr_grid_db.iter().zip(values).map(|(&snr, v)| CsvRow {
                        snr_db: snr,
                        scenario: plan.scenario,
                        adc_bits: b,
                        feedback_bits,
                        label: label.into(),
                        rate_bps_hz: v,
                        stderr: 0.0,
                        trials: 0,
                        discarded: 0,
                    }));
                }
            }
            curves.push((csit, fb));
        }
        let csv = render_csv(&[plan.to_string()], &rows);
        Ok(SweepOutput {
            plan: plan.clone(),
            curves,
            rows,
            csv,
        })
    };
    match plan.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build a pool of {n} workers: {e}")))?
            .install(body),
        None => body(),
    }
}

pub fn cmd_su_sweep(opts: &SweepOptions) -> Result<SweepOutput> {
    run_sweep(&resolve_sweep(Scenario::SingleUser, opts)?)
}

pub fn cmd_mu_sweep(opts: &SweepOptions) -> Result<SweepOutput> {
    run_sweep(&resolve_sweep(Scenario::MultiUser, opts)?)
}

/// One point on a (b, B) trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub adc_bits: u32,
    pub feedback_bits: u32,
    pub scaling_term: f64,
    pub high_snr_loss: f64,
    /// Scaling term equals the first row's.
    pub constant: bool,
}

/// Tabulates the scaling term and the high-SNR loss along `pairs`.
pub fn cmd_scaling_check(n_t: usize, users: usize, pairs: &[(u32, u32)]) -> Result<Vec<ScalingRow>> {
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(pairs.len());
    for &(b, bits) in pairs {
        let term = mu_scaling_term(b, bits, n_t)?;
        let p = LinkParams::new(1.0, 1.0, n_t, users, b, Some(bits))?;
        let first = rows.first().map_or(term, |r| r.scaling_term);
        rows.push(ScalingRow {
            adc_bits: b,
            feedback_bits: bits,
            scaling_term: term,
            high_snr_loss: mu_rate_loss_high_snr(&p)?,
            constant: (term / first - 1.0).abs() < 1e-12,
        });
    }
    Ok(rows)
}

pub fn format_scaling(rows: &[ScalingRow]) -> String {
    let mut s = format!("{:>3} {:>4} {:>14} {:>14} {}\n", "b", "B", "scaling_term", "loss_bps_hz", "flag");
    for r in rows {
        s.push_str(&format!(
            "{:>3} {:>4} {:>14.6} {:>14.6} {}\n",
            r.adc_bits,
            r.feedback_bits,
            r.scaling_term,
            r.high_snr_loss,
            if r.constant { "" } else { "non-constant" }
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    pub samples: usize,
    pub n_t: usize,
    pub feedback_bits: u32,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            n_t: 4,
            feedback_bits: 8,
            trials: 10_000,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn check_bussgang(opts: &ValidateOptions) -> Result<Vec<Check>> {
    (1..=8)
        .map(|b| {
            let q = design_uniform_quantizer(b)?;
            let e = empirical_nmse_and_gain(&q, opts.samples, opts.seed.wrapping_add(b as u64))?;
            // rare overload samples dominate the NMSE spread at high b
            let nmse_z = (e.nmse - q.nmse) / e.nmse_stderr;
            let gain_err = (e.gain / (1.0 - q.nmse) - 1.0).abs();
            Ok(Check {
                name: format!("bussgang b={b}"),
                passed: nmse_z.abs() < 4.0 && gain_err < 0.01 && e.correlation.abs() < 5e-3,
                detail: format!(
                    "nmse {:.4e} vs {:.4e} ({nmse_z:+.2} se), gain rel err {gain_err:.2e}, |corr| {:.2e}",
                    e.nmse,
                    q.nmse,
                    e.correlation.abs()
                ),
            })
        })
        .collect()
}

fn check_rvq(opts: &ValidateOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut values = Vec::with_capacity(opts.trials);
    for _ in 0..opts.trials {
        let h = ChannelVector::new((0..opts.n_t).map(|_| complex_normal(&mut rng)).collect())?;
        values.push(quantize_with_fresh_codebook(&h, opts.feedback_bits, &mut rng)?.cos2);
    }
    let (mean, se) = mean_and_stderr(&values);
    let expect = expected_cos2(opts.n_t, opts.feedback_bits);
    let z = (mean - expect) / se;
    Ok(Check {
        name: format!("rvq cos2 Nt={} B={}", opts.n_t, opts.feedback_bits),
        passed: z.abs() < 3.0,
        detail: format!("mean {mean:.6} vs {expect:.6} ({z:+.2} se)"),
    })
}

fn random_directions<R: Rng>(rng: &mut R, n_t: usize, users: usize) -> Result<Vec<Vec<num_complex::Complex64>>> {
    (0..users)
        .map(|_| Ok(ChannelVector::new((0..n_t).map(|_| complex_normal(rng)).collect())?.direction))
        .collect()
}

fn check_zf(opts: &ValidateOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5a5a);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n_t = rng.random_range(4..=8);
        let users = rng.random_range(2..=n_t);
        let dirs = random_directions(&mut rng, n_t, users)?;
        let set = zf_beamformers(&dirs)?;
        for (i, v) in set.vectors.iter().enumerate() {
            for (k, d) in dirs.iter().enumerate() {
                if k != i {
                    worst = worst.max(inner(d, v).norm());
                }
            }
        }
    }
    Ok(Check {
        name: "zf residual".into(),
        passed: worst < 1e-10,
        detail: format!("max cross term {worst:.2e}"),
    })
}

/// Draws `count` random link configurations and checks every ordering and
/// monotonicity property of the closed forms. Returns the violations.
pub fn bound_ordering_violations(count: usize, seed: u64) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    let tol = 1e-12;
    for _ in 0..count {
        let n_t = rng.random_range(2..=16usize);
        let users = rng.random_range(2..=n_t);
        let b = rng.random_range(1..=8u32);
        let bits = rng.random_range(0..=20u32);
        let snr_db = rng.random_range(-30.0..50.0);
        let tag = format!("Nt={n_t} K={users} b={b} B={bits} snr={snr_db:.2}");

        let su = LinkParams::single_user(snr_db, n_t, b, Some(bits))?;
        let su_fb = su_rate_fb(&su)?;
        let su_up = su_rate_csit_upper(&su)?;
        if !(su_fb.lower_bound <= su_fb.approx + tol && su_fb.approx <= su_up + tol) {
            bad.push(format!("su ordering {tag}"));
        }
        let mu = LinkParams::multi_user(snr_db, n_t, users, b, Some(bits))?;
        let mu_fb = mu_rate_zf_fb(&mu)?;
        let mu_up = mu_rate_zf_csit_upper(&mu);
        if !(mu_fb.lower_bound <= mu_fb.approx + tol && mu_fb.approx <= mu_up + tol) {
            bad.push(format!("mu ordering {tag}"));
        }
        if mu_rate_loss_bound(&mu)? < -tol {
            bad.push(format!("negative loss bound {tag}"));
        }

        // monotone in P_t and B
        let more_power = 10f64.powf((snr_db + 3.0) / 10.0);
        let su_p = su.with_transmit_power(more_power);
        let mu_p = mu.with_transmit_power(more_power);
        let su_b = su.with_feedback_bits(Some(bits + 1));
        let mu_b = mu.with_feedback_bits(Some(bits + 1));
        let grows = [
            ("su csit vs P", su_up, su_rate_csit_upper(&su_p)?),
            ("su fb approx vs P", su_fb.approx, su_rate_fb(&su_p)?.approx),
            ("su fb lower vs P", su_fb.lower_bound, su_rate_fb(&su_p)?.lower_bound),
            ("mu csit vs P", mu_up, mu_rate_zf_csit_upper(&mu_p)),
            ("mu fb approx vs P", mu_fb.approx, mu_rate_zf_fb(&mu_p)?.approx),
            ("mu fb lower vs P", mu_fb.lower_bound, mu_rate_zf_fb(&mu_p)?.lower_bound),
            ("su fb approx vs B", su_fb.approx, su_rate_fb(&su_b)?.approx),
            ("su fb lower vs B", su_fb.lower_bound, su_rate_fb(&su_b)?.lower_bound),
            ("mu fb approx vs B", mu_fb.approx, mu_rate_zf_fb(&mu_b)?.approx),
            ("mu fb lower vs B", mu_fb.lower_bound, mu_rate_zf_fb(&mu_b)?.lower_bound),
        ];
        for (name, before, after) in grows {
            if after < before - tol {
                bad.push(format!("{name} {tag}"));
            }
        }
        if mu_rate_loss_bound(&mu_b)? > mu_rate_loss_bound(&mu)? + tol {
            bad.push(format!("loss bound vs B {tag}"));
        }
        if users >= 2 && mu_rate_loss_high_snr(&mu_b)? > mu_rate_loss_high_snr(&mu)? + tol {
            bad.push(format!("high-snr loss vs B {tag}"));
        }
    }
    Ok(bad)
}

fn check_bounds(opts: &ValidateOptions) -> Result<Check> {
    let bad = bound_ordering_violations(200, opts.seed)?;
    Ok(Check {
        name: "bound ordering".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            "200 random links".into()
        } else {
            format!("{} violations, first: {}", bad.len(), bad[0])
        },
    })
}

/// Runs the Bussgang, RVQ, ZF and bound-ordering checks.
pub fn cmd_validate(opts: &ValidateOptions) -> Result<ValidationReport> {
    let mut checks = check_bussgang(opts)?;
    checks.push(check_rvq(opts)?);
    checks.push(check_zf(opts)?);
    checks.push(check_bounds(opts)?);
    Ok(ValidationReport { checks })
}

/// η_b actually used by the rate expressions, for display.
pub fn rate_nmse(bits: u32) -> Result<f64> {
    nmse_for_bits(bits)
}
