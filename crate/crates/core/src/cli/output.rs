//! CSV emission for sweep results.

use std::fmt::Write as _;
use std::path::Path;

use crate::montecarlo::{RateCurve, Scenario};

pub const CSV_HEADER: &str = "snr_db,scenario,adc_bits,feedback_bits,label,rate_bps_hz,stderr,trials,discarded";

/// One CSV data row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub scenario: Scenario,
    pub adc_bits: u32,
    pub feedback_bits: Option<u32>,
    pub label: String,
    pub rate_bps_hz: f64,
    pub stderr: f64,
    pub trials: usize,
    pub discarded: usize,
}

impl CsvRow {
    pub fn from_curve(curve: &RateCurve) -> Vec<CsvRow> {
        (0..curve.snr_db.len())
            .map(|i| CsvRow {
                snr_db: curve.snr_db[i],
                scenario: curve.scenario,
                adc_bits: curve.adc_bits,
                feedback_bits: curve.feedback_bits,
                label: curve.label.clone(),
                rate_bps_hz: curve.rate_bps_hz[i],
                stderr: curve.stderr[i],
                trials: curve.trials,
                discarded: curve.discarded_trials,
            })
            .collect()
    }

    fn write(&self, out: &mut String) {
        let fb = self.feedback_bits.map_or_else(|| "inf".to_string(), |b| b.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{},{}",
            self.snr_db, self.scenario, self.adc_bits, fb, self.label, self.rate_bps_hz, self.stderr, self.trials, self.discarded
        );
    }
}

/// Renders a full CSV document: `#` comment lines, header, rows.
pub fn render_csv(comments: &[String], rows: &[CsvRow]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        r.write(&mut out);
    }
    out
}

/// A gnuplot script drawing every (adc_bits, label) series of a sweep CSV.
pub fn gnuplot_script(csv_path: &Path, rows: &[CsvRow]) -> String {
    let mut series: Vec<(u32, String)> = Vec::new();
    for r in rows {
        let key = (r.adc_bits, r.label.clone());
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let path = csv_path.display();
    let mut s = String::from(
        "set datafile separator ','\nset xlabel 'SNR (dB)'\nset ylabel 'Average achievable rate (bps/Hz)'\nset key left top\nset grid\n",
    );
    let plots: Vec<String> = series
        .iter()
        .map(|(b, label)| {
            let style = if label == "csit" { "lines lw 2" } else { "lines dt 2" };
            format!(
                "\"< grep -v '^#' {path} | awk -F, '$3 == {b} && $5 == \\\"{label}\\\"'\" using 1:6 with {style} title 'b={b} {label}'"
            )
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}
