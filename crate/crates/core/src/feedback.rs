//! Random vector quantization (RVQ) of channel directions.
//!
//! A codebook holds `2^B` unit vectors drawn independently from the
//! isotropic distribution; the receiver feeds back the index of the entry
//! best aligned with its channel direction. The expected alignment has the
//! closed form `E[cos²] = 1 − 2^B β(2^B, Nₜ/(Nₜ−1))`, bounded below by
//! `1 − 2^(−B/(Nₜ−1))`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const MAX_FEEDBACK_BITS: u32 = 24;
/// Memory budget for a materialized codebook.
pub const CODEBOOK_BUDGET_BYTES: u128 = 1 << 30;

const BINARY_MAGIC: &[u8; 4] = b"QMCB";

/// A channel realization together with its direction and gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub coefficients: Vec<Complex64>,
    /// `h / ‖h‖`
    pub direction: Vec<Complex64>,
    pub norm_squared: f64,
}

impl ChannelVector {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Parameter("channel vector is empty".into()));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numeric("channel has non-finite coefficients".into()));
        }
        let norm_squared: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if norm_squared == 0.0 {
            return Err(Error::DegenerateInput("zero channel vector".into()));
        }
        let inv = norm_squared.sqrt().recip();
        let direction = coefficients.iter().map(|c| c * inv).collect();
        Ok(Self {
            coefficients,
            direction,
            norm_squared,
        })
    }

    pub fn dimension(&self) -> usize {
        self.coefficients.len()
    }
}

/// `a* b` with the conjugate on the left operand.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared alignment `|a* b|²` of two unit vectors.
pub fn cos2(a: &[Complex64], b: &[Complex64]) -> f64 {
    inner(a, b).norm_sqr()
}

/// Shared RVQ codebook of `2^B` isotropic unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dimension: usize,
    feedback_bits: u32,
    seed: Option<u64>,
    // row-major: entry i occupies [i*dimension, (i+1)*dimension)
    entries: Vec<Complex64>,
}

impl Codebook {
    /// Builds a codebook from explicit entries, normalizing each to unit norm.
    pub fn from_entries(dimension: usize, entries: Vec<Vec<Complex64>>) -> Result<Self> {
        let count = entries.len();
        if count == 0 || !count.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "codebook size must be a power of two, got {count}"
            )));
        }
        let mut flat = Vec::with_capacity(count * dimension);
        for e in entries {
            if e.len() != dimension {
                return Err(Error::Parameter(format!(
                    "entry of length {} in a dimension-{dimension} codebook",
                    e.len()
                )));
            }
            let n = e.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if n == 0.0 || !n.is_finite() {
                return Err(Error::DegenerateInput("zero codebook entry".into()));
            }
            flat.extend(e.iter().map(|c| c / n));
        }
        Ok(Self {
            dimension,
            feedback_bits: count.trailing_zeros(),
            seed: None,
            entries: flat,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn feedback_bits(&self) -> u32 {
        self.feedback_bits
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.entries.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, index: usize) -> &[Complex64] {
        &self.entries[index * self.dimension..(index + 1) * self.dimension]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks_exact(self.dimension)
    }

    /// CSV export: a `#` header with `n_t`, `feedback_bits` and `seed`, then
    /// one row per entry of interleaved real and imaginary parts.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        writeln!(
            w,
            "# n_t={},feedback_bits={},seed={}",
            self.dimension, self.feedback_bits, seed
        )?;
        for e in self.iter() {
            let row: Vec<String> = e
                .iter()
                .flat_map(|c| [format!("{:e}", c.re), format!("{:e}", c.im)])
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty codebook file".into()))??;
        let (dimension, bits, seed) = parse_codebook_header(&header)?;
        let mut entries = Vec::with_capacity(dimension << bits);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let values: Vec<f64> = line
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad codebook value {v:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if values.len() != 2 * dimension {
                return Err(Error::Config(format!(
                    "codebook row has {} values, expected {}",
                    values.len(),
                    2 * dimension
                )));
            }
            entries.extend(values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])));
        }
        Self::from_raw(dimension, bits, seed, entries)
    }

    /// Binary export: `QMCB`, then little-endian u32 n_t, u32 B, u64 seed
    /// (`u64::MAX` when unknown), then interleaved f64 components.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.dimension as u32).to_le_bytes())?;
        w.write_all(&self.feedback_bits.to_le_bytes())?;
        w.write_all(&self.seed.unwrap_or(u64::MAX).to_le_bytes())?;
        for c in &self.entries {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Config("not a codebook file".into()));
        }
        let mut u32buf = [0u8; 4];
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u32buf)?;
        let dimension = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf)?;
        let bits = u32::from_le_bytes(u32buf);
        r.read_exact(&mut u64buf)?;
        let seed = match u64::from_le_bytes(u64buf) {
            u64::MAX => None,
            s => Some(s),
        };
        check_capacity(dimension, bits)?;
        let count = dimension << bits;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut u64buf)?;
            let re = f64::from_le_bytes(u64buf);
            r.read_exact(&mut u64buf)?;
            let im = f64::from_le_bytes(u64buf);
            entries.push(Complex64::new(re, im));
        }
        Self::from_raw(dimension, bits, seed, entries)
    }

    fn from_raw(dimension: usize, bits: u32, seed: Option<u64>, entries: Vec<Complex64>) -> Result<Self> {
        if dimension == 0 || entries.len() != dimension << bits {
            return Err(Error::Config(format!(
                "codebook holds {} coefficients, header implies {}",
                entries.len(),
                dimension << bits
            )));
        }
        for e in entries.chunks_exact(dimension) {
            let n: f64 = e.iter().map(|c| c.norm_sqr()).sum();
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("codebook entry has squared norm {n}")));
            }
        }
        Ok(Self {
            dimension,
            feedback_bits: bits,
            seed,
            entries,
        })
    }
}

fn parse_codebook_header(line: &str) -> Result<(usize, u32, Option<u64>)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Config("codebook CSV must start with a '#' header".into()))?;
    let (mut n_t, mut bits, mut seed) = (None, None, None);
    for field in body.split(',') {
        let (k, v) = field
            .trim()
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("bad header field {field:?}")))?;
        let bad = |e: std::num::ParseIntError| Error::Config(format!("bad header value {v:?}: {e}"));
        match k.trim() {
            "n_t" => n_t = Some(v.trim().parse::<usize>().map_err(bad)?),
            "feedback_bits" => bits = Some(v.trim().parse::<u32>().map_err(bad)?),
            "seed" if v.trim() == "none" => {}
            "seed" => seed = Some(v.trim().parse::<u64>().map_err(bad)?),
            other => return Err(Error::Config(format!("unknown header key {other:?}"))),
        }
    }
    match (n_t, bits) {
        (Some(n), Some(b)) => {
            check_capacity(n, b)?;
            Ok((n, b, seed))
        }
        _ => Err(Error::Config("codebook header needs n_t and feedback_bits".into())),
    }
}

/// Bytes needed to store a codebook of `2^bits` entries of dimension `n_t`.
pub fn codebook_bytes(n_t: usize, bits: u32) -> u128 {
    (n_t as u128) << bits << 4
}

fn check_capacity(n_t: usize, bits: u32) -> Result<()> {
    if n_t == 0 {
        return Err(Error::Parameter("codebook dimension must be at least 1".into()));
    }
    if bits > MAX_FEEDBACK_BITS {
        return Err(Error::Parameter(format!(
            "feedback bits must be at most {MAX_FEEDBACK_BITS}, got {bits}"
        )));
    }
    let required_bytes = codebook_bytes(n_t, bits);
    if required_bytes > CODEBOOK_BUDGET_BYTES {
        return Err(Error::Capacity {
            n_t,
            bits,
            required_bytes,
            budget_bytes: CODEBOOK_BUDGET_BYTES,
        });
    }
    Ok(())
}

/// Draws one isotropic unit vector into `out`.
pub(crate) fn draw_codeword<R: Rng + ?Sized>(rng: &mut R, out: &mut [Complex64]) {
    let mut norm = 0.0;
    for c in out.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *c = Complex64::new(re, im);
        norm += c.norm_sqr();
    }
    let inv = norm.sqrt().recip();
    for c in out.iter_mut() {
        *c *= inv;
    }
}

/// Draws a standard circularly-symmetric complex Gaussian, `CN(0, 1)`.
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Generates an RVQ codebook; deterministic in `seed`.
pub fn generate_rvq(n_t: usize, feedback_bits: u32, seed: u64) -> Result<Codebook> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cb = generate_rvq_with_rng(n_t, feedback_bits, &mut rng)?;
    cb.seed = Some(seed);
    Ok(cb)
}

/// Generates an RVQ codebook from an existing random stream.
pub fn generate_rvq_with_rng<R: Rng + ?Sized>(n_t: usize, feedback_bits: u32, rng: &mut R) -> Result<Codebook> {
    check_capacity(n_t, feedback_bits)?;
    let count = 1usize << feedback_bits;
    let mut entries = vec![Complex64::new(0.0, 0.0); count * n_t];
    for e in entries.chunks_exact_mut(n_t) {
        draw_codeword(rng, e);
    }
    Ok(Codebook {
        dimension: n_t,
        feedback_bits,
        seed: None,
        entries,
    })
}

/// Index of the codebook entry best aligned with the channel direction and
/// the attained `cos²`. Ties go to the lowest index.
pub fn select_index(h: &ChannelVector, codebook: &Codebook) -> Result<(usize, f64)> {
    if h.dimension() != codebook.dimension() {
        return Err(Error::Parameter(format!(
            "channel dimension {} does not match codebook dimension {}",
            h.dimension(),
            codebook.dimension()
        )));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, e) in codebook.iter().enumerate() {
        let c = cos2(&h.direction, e);
        if c > best.1 {
            best = (i, c);
        }
    }
    Ok((best.0, best.1.min(1.0)))
}

/// Result of quantizing one channel direction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedDirection {
    pub index: usize,
    pub cos2: f64,
    pub codeword: Vec<Complex64>,
}

/// Quantizes `h` against a fresh codebook drawn from `rng` without
/// materializing it. Consumes the stream exactly as
/// [`generate_rvq_with_rng`] would, so the result equals
/// `select_index(h, &generate_rvq_with_rng(..))`.
pub fn quantize_with_fresh_codebook<R: Rng + ?Sized>(
    h: &ChannelVector,
    feedback_bits: u32,
    rng: &mut R,
) -> Result<QuantizedDirection> {
    if feedback_bits > MAX_FEEDBACK_BITS {
        return Err(Error::Parameter(format!(
            "feedback bits must be at most {MAX_FEEDBACK_BITS}, got {feedback_bits}"
        )));
    }
    let n_t = h.dimension();
    let mut candidate = vec![Complex64::new(0.0, 0.0); n_t];
    let mut best = QuantizedDirection {
        index: 0,
        cos2: f64::NEG_INFINITY,
        codeword: vec![Complex64::new(0.0, 0.0); n_t],
    };
    for i in 0..1usize << feedback_bits {
        draw_codeword(rng, &mut candidate);
        let c = cos2(&h.direction, &candidate);
        if c > best.cos2 {
            best.index = i;
            best.cos2 = c;
            best.codeword.copy_from_slice(&candidate);
        }
    }
    best.cos2 = best.cos2.min(1.0);
    Ok(best)
}

/// Quantizes `h` against a stored codebook.
pub fn quantize_with_codebook(h: &ChannelVector, codebook: &Codebook) -> Result<QuantizedDirection> {
    let (index, cos2) = select_index(h, codebook)?;
    Ok(QuantizedDirection {
        index,
        cos2,
        codeword: codebook.entry(index).to_vec(),
    })
}

/// `ln β(x, y)` via log-gamma; stays accurate when `x ≫ y`.
pub fn ln_beta(x: f64, y: f64) -> f64 {
    if x < LARGE_GAMMA_ARG || y > x {
        return libm::lgamma(x) + libm::lgamma(y) - libm::lgamma(x + y);
    }
    libm::lgamma(y) - ln_gamma_ratio(x, y)
}

const LARGE_GAMMA_ARG: f64 = 100.0;

// ln Γ(x+y) − ln Γ(x) from the Stirling series, arranged to avoid the
// cancellation between two huge log-gammas.
fn ln_gamma_ratio(x: f64, y: f64) -> f64 {
    let tail = |z: f64| {
        let z2 = z * z;
        (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * z2)) / z2) / z
    };
    (x - 0.5) * (y / x).ln_1p() + y * (x + y).ln() - y + tail(x + y) - tail(x)
}

/// `2^B β(2^B, Nₜ/(Nₜ−1))`, the expected squared quantization error
/// `E[sin²]` of RVQ. Zero for `n_t = 1`.
pub fn expected_quantization_error(n_t: usize, feedback_bits: u32) -> f64 {
    if n_t <= 1 {
        return 0.0;
    }
    let size = (feedback_bits as f64).exp2();
    let y = n_t as f64 / (n_t as f64 - 1.0);
    (feedback_bits as f64 * std::f64::consts::LN_2 + ln_beta(size, y)).exp()
}

/// Expected alignment `E[cos²] = 1 − 2^B β(2^B, Nₜ/(Nₜ−1))`; 1 for `n_t = 1`.
pub fn expected_cos2(n_t: usize, feedback_bits: u32) -> f64 {
    1.0 - expected_quantization_error(n_t, feedback_bits)
}

/// Upper bound `2^(−B/(Nₜ−1))` on [`expected_quantization_error`].
/// Zero for `n_t = 1`.
pub fn quantization_error_bound(n_t: usize, feedback_bits: u32) -> f64 {
    if n_t <= 1 {
        return 0.0;
    }
    (-(feedback_bits as f64) / (n_t as f64 - 1.0)).exp2()
}
