//! `qmiso` command-line front end.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::montecarlo::CodebookMode;
use commands::{SweepOptions, ValidateOptions};

#[derive(Debug, Parser)]
#[command(name = "qmiso", version, about = "Finite-resolution ADC and limited-feedback MISO rate toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Designed uniform quantizers next to the reference NMSE table.
    Table {
        #[arg(long, default_value_t = 1)]
        min_bits: u32,
        #[arg(long, default_value_t = 8)]
        max_bits: u32,
    },
    /// Single-user conjugate beamforming sweep.
    SuSweep(SweepArgs),
    /// Multi-user zero-forcing sweep.
    MuSweep(SweepArgs),
    /// Scaling term and high-SNR loss along a (b, B) trajectory.
    ScalingCheck(ScalingArgs),
    /// Self-checks against closed forms.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long = "nt")]
    pub n_t: Option<usize>,
    #[arg(long)]
    pub users: Option<usize>,
    /// ADC resolutions; repeat the flag or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub adc_bits: Vec<u32>,
    /// Feedback budgets; one value for all b, or one per b.
    #[arg(long, alias = "B", value_delimiter = ',')]
    pub feedback_bits: Vec<u32>,
    /// Feedback rule linear in b, e.g. "2(Nt-1)*b-12".
    #[arg(long)]
    pub feedback_rule: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_max: Option<f64>,
    #[arg(long)]
    pub snr_step: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub codebook_mode: Option<CodebookMode>,
    /// Add closed-form rows next to the simulated ones.
    #[arg(long)]
    pub analytic: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long, requires = "out")]
    pub gnuplot: bool,
}

impl SweepArgs {
    pub fn options(&self) -> SweepOptions {
        SweepOptions {
            n_t: self.n_t,
            users: self.users,
            adc_bits: self.adc_bits.clone(),
            feedback_bits: self.feedback_bits.clone(),
            feedback_rule: self.feedback_rule.clone(),
            snr_min: self.snr_min,
            snr_max: self.snr_max,
            snr_step: self.snr_step,
            trials: self.trials,
            seed: self.seed,
            codebook_mode: self.codebook_mode,
            analytic: self.analytic,
            out: self.out.clone(),
            config: self.config.clone(),
            threads: self.threads,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[arg(long = "nt", default_value_t = 4)]
    pub n_t: usize,
    #[arg(long, default_value_t = 2)]
    pub users: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5, 6, 7, 8])]
    pub adc_bits: Vec<u32>,
    /// Explicit budgets, one per b.
    #[arg(long, alias = "B", value_delimiter = ',', conflicts_with = "feedback_rule")]
    pub feedback_bits: Vec<u32>,
    #[arg(long)]
    pub feedback_rule: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Complex samples per resolution, e.g. 1e6.
    #[arg(long, value_parser = parse_count)]
    pub samples: Option<usize>,
    #[arg(long = "nt")]
    pub n_t: Option<usize>,
    #[arg(long, alias = "B")]
    pub feedback_bits: Option<u32>,
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Accepts `1000000`, `1e6` or `2.5e5`.
fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(format!("not a count: {s}"))
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sweep(args: &SweepArgs, multi_user: bool) -> Result<()> {
    let opts = args.options();
    let out = if multi_user { commands::cmd_mu_sweep(&opts)? } else { commands::cmd_su_sweep(&opts)? };
    write_output(out.plan.out.as_ref(), &out.csv)?;
    if args.gnuplot {
        if let Some(path) = &out.plan.out {
            std::fs::write(path.with_extension("gp"), output::gnuplot_script(path, &out.rows))?;
        }
    }
    Ok(())
}

fn scaling_pairs(args: &ScalingArgs) -> Result<Vec<(u32, u32)>> {
    if let Some(rule) = &args.feedback_rule {
        let rule = config::FeedbackRule::parse(rule, args.n_t)?;
        return args.adc_bits.iter().map(|&b| Ok((b, rule.apply(b)?))).collect();
    }
    if args.feedback_bits.is_empty() {
        let slope = 2 * (args.n_t as u32).saturating_sub(1);
        return Ok(args.adc_bits.iter().map(|&b| (b, slope * b)).collect());
    }
    if args.feedback_bits.len() == 1 {
        return Ok(args.adc_bits.iter().map(|&b| (b, args.feedback_bits[0])).collect());
    }
    if args.feedback_bits.len() != args.adc_bits.len() {
        return Err(Error::Config("--feedback-bits needs one value or one per --adc-bits".into()));
    }
    Ok(args.adc_bits.iter().copied().zip(args.feedback_bits.iter().copied()).collect())
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Table { min_bits, max_bits } => {
            if min_bits < 1 || max_bits > 8 || min_bits > max_bits {
                return Err(Error::Parameter(format!("table range must lie in 1..=8, got {min_bits}..={max_bits}")));
            }
            let rows = commands::cmd_table(min_bits..=max_bits)?;
            write_output(None, &commands::format_table(&rows))
        }
        Command::SuSweep(args) => sweep(&args, false),
        Command::MuSweep(args) => sweep(&args, true),
        Command::ScalingCheck(args) => {
            let rows = commands::cmd_scaling_check(args.n_t, args.users, &scaling_pairs(&args)?)?;
            write_output(None, &commands::format_scaling(&rows))
        }
        Command::Validate(args) => {
            let d = ValidateOptions::default();
            let opts = ValidateOptions {
                samples: args.samples.unwrap_or(d.samples),
                n_t: args.n_t.unwrap_or(d.n_t),
                feedback_bits: args.feedback_bits.unwrap_or(d.feedback_bits),
                trials: args.trials.unwrap_or(d.trials),
                seed: args.seed.unwrap_or(d.seed),
            };
            let report = commands::cmd_validate(&opts)?;
            write_output(None, &report.to_string())?;
            if report.passed() {
                Ok(())
            } else {
                Err(Error::Validation(report.failures()))
            }
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
