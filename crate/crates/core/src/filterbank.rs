//! Periodic two-channel Daubechies-4 filter bank.
//!
//! Analysis is circular correlation, `lo[i] = Σ_k low[k]·x[(i+k) mod n]`.
//! Critical mode keeps the even outputs; oversampled mode keeps all of them
//! and is inverted by averaging the inverses of its two polyphase components.

use crate::error::{Error, Result};

/// Analysis taps of an orthogonal two-channel filter bank.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterPair {
    pub low: [f64; 4],
    pub high: [f64; 4],
    pub id: &'static str,
}

/// Daubechies-4 with `high[k] = (-1)^k · low[3-k]`.
pub fn daub4() -> FilterPair {
    let s3 = 3f64.sqrt();
    let norm = 4.0 * std::f64::consts::SQRT_2;
    let low = [(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm];
    let high = [low[3], -low[2], low[1], -low[0]];
    FilterPair {
        low,
        high,
        id: "daub4",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Filtering followed by subsampling by two.
    Critical,
    /// Undecimated: every filter output is kept.
    Oversampled,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Critical => "critical",
            Mode::Oversampled => "oversampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandPair1D {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub mode: Mode,
    pub n: usize,
}

/// Output length of one channel for a length-`n` input.
pub fn band_len(n: usize, mode: Mode) -> usize {
    match mode {
        Mode::Critical => n / 2,
        Mode::Oversampled => n,
    }
}

fn check_len(n: usize, mode: Mode) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    if mode == Mode::Critical && !n.is_multiple_of(2) {
        return Err(Error::Shape(format!(
            "critical analysis needs an even length, got {n}"
        )));
    }
    Ok(())
}

pub fn analyze_1d(x: &[f64], f: &FilterPair, mode: Mode) -> Result<BandPair1D> {
    check_len(x.len(), mode)?;
    let m = band_len(x.len(), mode);
    let mut low = vec![0.0; m];
    let mut high = vec![0.0; m];
    analyze_into(x, f, mode, &mut low, &mut high);
    Ok(BandPair1D {
        low,
        high,
        mode,
        n: x.len(),
    })
}

/// Allocation-free analysis; `lo`/`hi` must have [`band_len`] entries.
pub(crate) fn analyze_into(x: &[f64], f: &FilterPair, mode: Mode, lo: &mut [f64], hi: &mut [f64]) {
    let n = x.len();
    let step = match mode {
        Mode::Critical => 2,
        Mode::Oversampled => 1,
    };
    for (j, (l, h)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
        let base = j * step;
        let mut sl = 0.0;
        let mut sh = 0.0;
        for k in 0..4 {
            let v = x[(base + k) % n];
            sl += f.low[k] * v;
            sh += f.high[k] * v;
        }
        *l = sl;
        *h = sh;
    }
}

pub fn synthesize_1d(b: &BandPair1D, f: &FilterPair) -> Result<Vec<f64>> {
    check_len(b.n, b.mode)?;
    let m = band_len(b.n, b.mode);
    if b.low.len() != m || b.high.len() != m {
        return Err(Error::Shape(format!(
            "{} synthesis of length {} needs bands of {m}, got {} and {}",
            b.mode.name(),
            b.n,
            b.low.len(),
            b.high.len()
        )));
    }
    let mut out = vec![0.0; b.n];
    synthesize_into(&b.low, &b.high, f, b.mode, &mut out);
    Ok(out)
}

/// Transpose of [`analyze_into`], scaled by one half in oversampled mode.
pub(crate) fn synthesize_into(lo: &[f64], hi: &[f64], f: &FilterPair, mode: Mode, out: &mut [f64]) {
    let n = out.len();
    out.fill(0.0);
    let (step, gain) = match mode {
        Mode::Critical => (2, 1.0),
        Mode::Oversampled => (1, 0.5),
    };
    for (j, (&l, &h)) in lo.iter().zip(hi).enumerate() {
        let base = j * step;
        for k in 0..4 {
            out[(base + k) % n] += gain * (f.low[k] * l + f.high[k] * h);
        }
    }
}
