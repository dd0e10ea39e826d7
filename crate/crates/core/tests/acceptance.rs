//! Acceptance criteria. Each test prints one PASS/FAIL line per check and
//! fails if any check fails. Tests hold a shared lock so runtime limits are
//! measured without competing work.

use std::f64::consts::PI;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmiso::cli::commands::bound_ordering_violations;
use qmiso::feedback::{expected_cos2, expected_quantization_error, inner, quantization_error_bound, quantize_with_fresh_codebook};
use qmiso::montecarlo::{draw_channel, horizontal_gap_db, mean_and_stderr, simulate_mu, simulate_su, ScenarioConfig};
use qmiso::precoder::zf_beamformers;
use qmiso::quantizer::{design_uniform_quantizer, empirical_nmse_and_gain, nmse_table};
use qmiso::rates::{feedback_bits_for_loss, mu_scaling_term};
use qmiso::Error;

const SEED: u64 = 20160101;

static SERIAL: Mutex<()> = Mutex::new(());

struct Checks {
    criterion: &'static str,
    failed: Vec<String>,
    started: Instant,
}

impl Checks {
    fn new(criterion: &'static str) -> Self {
        Self {
            criterion,
            failed: Vec::new(),
            started: Instant::now(),
        }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl AsRef<str>) {
        let name = name.into();
        println!("[{}] {} {name}: {}", if pass { "PASS" } else { "FAIL" }, self.criterion, detail.as_ref());
        if !pass {
            self.failed.push(name);
        }
    }

    fn finish(mut self, limit: Duration) {
        let elapsed = self.started.elapsed();
        self.check(
            "runtime",
            elapsed < limit,
            format!("{:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()),
        );
        assert!(self.failed.is_empty(), "{} failed: {:?}", self.criterion, self.failed);
    }
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn db_grid(min: i32, max: i32) -> Vec<f64> {
    (min..=max).map(f64::from).collect()
}

fn four_significant(x: f64) -> String {
    format!("{x:.3e}")
}

#[test]
fn criterion_1_quantizer_table() {
    let _g = lock();
    let mut c = Checks::new("C1");
    let reference: [(f64, f64); 8] = [
        (-1.9613, 1.46),
        (-0.5429, 3.09),
        (-0.1527, 4.86),
        (-0.0414, 6.72),
        (-0.0109, 8.64),
        (-0.0029, 10.56),
        (-0.0007, 12.56),
        (-0.0002, 14.56),
    ];
    for b in 1..=8u32 {
        let q = design_uniform_quantizer(b).unwrap();
        let table = nmse_table(b).unwrap();
        if b == 1 {
            let exact = (PI - 2.0) / PI;
            c.check("b=1 eta exact", (q.nmse - exact).abs() < 1e-12, format!("{:.15} vs {exact:.15}", q.nmse));
        }
        c.check(
            format!("b={b} eta 4 digits"),
            four_significant(q.nmse) == four_significant(table),
            format!("designed {} vs table {}", four_significant(q.nmse), four_significant(table)),
        );
        let (loss_ref, ceil_ref) = reference[b as usize - 1];
        let loss = 10.0 * (1.0 - q.nmse).log10();
        let ceil = (1.0 / q.nmse).log2();
        c.check(format!("b={b} power loss"), (loss - loss_ref).abs() <= 0.01, format!("{loss:.4} vs {loss_ref} dB"));
        c.check(format!("b={b} rate ceiling"), (ceil - ceil_ref).abs() <= 0.01, format!("{ceil:.3} vs {ceil_ref}"));
    }
    c.finish(Duration::from_secs(5));
}

#[test]
fn criterion_2_bussgang_validation() {
    let _g = lock();
    let mut c = Checks::new("C2");
    for b in 1..=8u32 {
        let q = design_uniform_quantizer(b).unwrap();
        let e = empirical_nmse_and_gain(&q, 1_000_000, SEED + b as u64).unwrap();
        let nmse_rel = e.nmse / q.nmse - 1.0;
        let gain_rel = e.gain / (1.0 - q.nmse) - 1.0;
        c.check(
            format!("b={b} nmse"),
            nmse_rel.abs() < 0.01,
            format!("{:.5e} vs {:.5e}, rel {nmse_rel:+.3e} ({:+.2} se)", e.nmse, q.nmse, (e.nmse - q.nmse) / e.nmse_stderr),
        );
        c.check(format!("b={b} gain"), gain_rel.abs() < 0.01, format!("rel {gain_rel:+.3e}"));
        c.check(format!("b={b} correlation"), e.correlation.abs() < 5e-3, format!("{:.3e}", e.correlation));
    }
    c.finish(Duration::from_secs(30));
}

#[test]
fn criterion_3_rvq_statistics() {
    let _g = lock();
    let mut c = Checks::new("C3");
    let mut stream = 0;
    for n_t in [2usize, 4, 8] {
        for bits in [0u32, 2, 4, 8, 12] {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            rng.set_stream(stream);
            stream += 1;
            let samples: Vec<f64> = (0..10_000)
                .map(|_| {
                    let h = draw_channel(n_t, &mut rng);
                    quantize_with_fresh_codebook(&h, bits, &mut rng).unwrap().cos2
                })
                .collect();
            let (mean, se) = mean_and_stderr(&samples);
            let expect = expected_cos2(n_t, bits);
            let z = (mean - expect) / se;
            c.check(
                format!("Nt={n_t} B={bits} mean cos2"),
                z.abs() <= 3.0,
                format!("{mean:.5} vs {expect:.5} ({z:+.2} se)"),
            );
        }
    }
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for n_t in 2..=16usize {
        for bits in 0..=20u32 {
            let slack = quantization_error_bound(n_t, bits) - expected_quantization_error(n_t, bits);
            worst = worst.max(-slack);
            if slack < 0.0 {
                violations += 1;
            }
        }
    }
    c.check("beta bound grid", violations == 0, format!("{violations} violations, max excess {worst:.3e}"));
    c.finish(Duration::from_secs(120));
}

#[test]
fn criterion_4_single_user_sweep() {
    let _g = lock();
    let mut c = Checks::new("C4");
    let target_gap = 10.0 * (1.0 - (-8.0f64 / 15.0).exp2()).log10();
    for (b, ceiling) in [(1u32, 1.46), (2, 3.09), (3, 4.86), (4, 6.72)] {
        let config = ScenarioConfig::single_user(16, b, 8, db_grid(-20, 40), 1000, SEED);
        let (csit, fb) = simulate_su(&config).unwrap();
        let at_40 = fb.rate_at(40.0).unwrap();
        c.check(
            format!("b={b} feedback rate at 40 dB"),
            (at_40 - ceiling).abs() <= 0.05,
            format!("{at_40:.4} vs {ceiling}"),
        );
        let gap = horizontal_gap_db(&csit, &fb, -10.0);
        c.check(
            format!("b={b} gap at -10 dB"),
            gap.is_some_and(|g| (g - target_gap).abs() <= 0.3),
            format!("{gap:.3?} vs {target_gap:.3} dB"),
        );
    }
    c.finish(Duration::from_secs(120));
}

#[test]
fn criterion_5_multi_user_sweep() {
    let _g = lock();
    let mut c = Checks::new("C5");
    for (b, loss) in [(3u32, -1.25), (4, -0.28), (5, -0.07)] {
        let bits = 6 * b - 12;
        let config = ScenarioConfig::multi_user(4, 2, b, bits, db_grid(-20, 40), 1000, SEED);
        let (csit, fb) = simulate_mu(&config).unwrap();
        let gap_30 = csit.rate_at(30.0).unwrap() - fb.rate_at(30.0).unwrap();
        let gap_40 = csit.rate_at(40.0).unwrap() - fb.rate_at(40.0).unwrap();
        c.check(
            format!("b={b} B={bits} gap at 30 dB"),
            (gap_30 - 1.7).abs() <= 0.3,
            format!("{gap_30:.3} bps/Hz (40 dB: {gap_40:.3}, discarded {})", csit.discarded_trials),
        );
        let shift = horizontal_gap_db(&csit, &fb, -10.0);
        c.check(
            format!("b={b} B={bits} power loss"),
            shift.is_some_and(|s| (s - loss).abs() <= 0.3),
            format!("{shift:.3?} vs {loss} dB"),
        );
    }
    c.finish(Duration::from_secs(600));
}

#[test]
fn criterion_6_bound_ordering() {
    let _g = lock();
    let mut c = Checks::new("C6");
    let bad = bound_ordering_violations(200, SEED).unwrap();
    c.check("200 random links", bad.is_empty(), format!("{} violations {:?}", bad.len(), bad.first()));
    c.finish(Duration::from_secs(5));
}

#[test]
fn criterion_7_scaling_invariance() {
    let _g = lock();
    let mut c = Checks::new("C7");
    let mut mismatches = Vec::new();
    for n_t in 2..=8usize {
        let step = 2 * (n_t as u32 - 1);
        for b in 3..=10u32 {
            for bits in [0u32, 6, 12, 18, 40] {
                let here = mu_scaling_term(b, bits, n_t).unwrap();
                let next = mu_scaling_term(b + 1, bits + step, n_t).unwrap();
                if here != next {
                    mismatches.push((n_t, b, bits, here, next));
                }
            }
        }
    }
    c.check("exact invariance", mismatches.is_empty(), format!("{} mismatches {:?}", mismatches.len(), mismatches.first()));

    let mut breaks = Vec::new();
    for (b, n_t, users) in [(3u32, 4usize, 2usize), (5, 4, 2), (8, 8, 4), (12, 6, 6)] {
        let mut prev = u32::MAX;
        for i in 1..=400 {
            let target = 0.0125 * i as f64;
            let bits = match feedback_bits_for_loss(target, b, n_t, users) {
                Ok(v) => v,
                Err(Error::Infeasible { .. }) => u32::MAX,
                Err(e) => panic!("{e}"),
            };
            if bits > prev {
                breaks.push((b, n_t, users, target, prev, bits));
            }
            prev = bits;
        }
    }
    c.check("feedback bits nonincreasing in target", breaks.is_empty(), format!("{breaks:?}"));
    c.finish(Duration::from_secs(1));
}

fn directions(rng: &mut ChaCha8Rng, n_t: usize, users: usize) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let channels: Vec<_> = (0..users).map(|_| draw_channel(n_t, rng)).collect();
    (
        channels.iter().map(|h| h.direction.clone()).collect(),
        channels.into_iter().map(|h| h.coefficients).collect(),
    )
}

#[test]
fn criterion_8_zero_forcing() {
    let _g = lock();
    let mut c = Checks::new("C8");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n_t = rng.random_range(4..=8);
        let users = rng.random_range(2..=n_t);
        let (dirs, _) = directions(&mut rng, n_t, users);
        let set = zf_beamformers(&dirs).unwrap();
        for (i, v) in set.vectors.iter().enumerate() {
            for (k, d) in dirs.iter().enumerate() {
                if i != k {
                    worst = worst.max(inner(d, v).norm());
                }
            }
        }
    }
    c.check("max cross term", worst < 1e-10, format!("{worst:.3e}"));

    for (n_t, users) in [(4usize, 2usize), (8, 5)] {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream((n_t * 16 + users) as u64);
        let per_trial: Vec<f64> = (0..10_000)
            .map(|_| {
                let (dirs, channels) = directions(&mut rng, n_t, users);
                let set = zf_beamformers(&dirs).unwrap();
                (0..users).map(|k| set.received_powers(&channels[k], k).0).sum::<f64>() / users as f64
            })
            .collect();
        let (mean, se) = mean_and_stderr(&per_trial);
        let expect = (n_t - users + 1) as f64;
        let z = (mean - expect) / se;
        c.check(
            format!("Nt={n_t} K={users} desired gain"),
            z.abs() <= 3.0,
            format!("{mean:.4} vs {expect} ({z:+.2} se)"),
        );
    }
    c.finish(Duration::from_secs(30));
}

fn sweep(subcommand: &str, threads: usize, out: &std::path::Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_qmiso"))
        .args([subcommand, "--seed", "7", "--threads", &threads.to_string(), "--out"])
        .arg(out)
        .env_remove("QMISO_SEED")
        .status()
        .unwrap();
    assert!(status.success(), "{subcommand} exited with {status}");
    std::fs::read(out).unwrap()
}

#[test]
fn criterion_9_determinism() {
    let _g = lock();
    let mut c = Checks::new("C9");
    let dir = tempfile::tempdir().unwrap();
    for subcommand in ["su-sweep", "mu-sweep"] {
        let first = sweep(subcommand, 1, &dir.path().join(format!("{subcommand}-a.csv")));
        let second = sweep(subcommand, 1, &dir.path().join(format!("{subcommand}-b.csv")));
        let wide = sweep(subcommand, 4, &dir.path().join(format!("{subcommand}-c.csv")));
        c.check(format!("{subcommand} repeat"), first == second, format!("{} bytes", first.len()));
        c.check(format!("{subcommand} 1 vs 4 workers"), first == wide, format!("{} bytes", wide.len()));
    }
    c.finish(Duration::from_secs(300));
}
