//! Oracles shared by the integration targets. Each one recomputes a library
//! result by a different route.

#![allow(dead_code)]

use dlsr_core::lattice::colines;
use dlsr_core::{daub4, Direction, DirectionPair, Image, Patch, TrainingRecord};
use rand::Rng;

pub fn random_patch(rng: &mut impl Rng, n: usize) -> Patch {
    Patch::new(n, (0, 0), (0..n * n).map(|_| rng.random::<f64>()).collect()).unwrap()
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> Image {
    Image::new(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Periodic Daub4 lowpass along every co-line of `d`, in traversal order.
fn lowpass_along(x: &[f64], n: usize, d: Direction) -> Vec<f64> {
    let low = daub4().low;
    let mut out = vec![0.0; n * n];
    for line in colines(n, d).unwrap() {
        for i in 0..n {
            let (r, c) = line[i];
            out[r * n + c] = (0..4)
                .map(|k| {
                    let (rr, cc) = line[(i + k) % n];
                    low[k] * x[rr * n + cc]
                })
                .sum();
        }
    }
    out
}

/// Oversampled detail energy of AWT(2,1) along `pair`, by frame bookkeeping:
/// every undecimated stage doubles the energy, so the six detail bands hold
/// `8‖x‖² − 2‖L₂L₁x‖²`.
pub fn coline_detail_energy(p: &Patch, pair: DirectionPair) -> f64 {
    let n = p.size();
    let x = p.values();
    let a = lowpass_along(&lowpass_along(x, n, pair.d1), n, pair.d2);
    let ex: f64 = x.iter().map(|v| v * v).sum();
    let ea: f64 = a.iter().map(|v| v * v).sum();
    8.0 * ex - 2.0 * ea
}

/// First index within `1e-12·max` of the minimum.
pub fn oracle_argmin(e: &[f64]) -> usize {
    let min = e.iter().copied().fold(f64::INFINITY, f64::min);
    let max = e.iter().copied().fold(0.0, f64::max);
    e.iter().position(|&v| v <= min + 1e-12 * max).unwrap()
}

/// Double-double value `hi + lo`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Dd(pub f64, pub f64);

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    fn add(self, v: Dd) -> Dd {
        let (s, e) = two_sum(self.0, v.0);
        let e = e + self.1 + v.1;
        let (hi, lo) = two_sum(s, e);
        Dd(hi, lo)
    }

    pub fn value(self) -> f64 {
        self.0 + self.1
    }
}

/// `Σ|a − b|` with each difference formed exactly and summed in double-double.
pub fn l1_extended(a: &[f64], b: &[f64]) -> Dd {
    let mut acc = Dd(0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (s, e) = two_sum(x, -y);
        let d = if s > 0.0 || (s == 0.0 && e > 0.0) { Dd(s, e) } else { Dd(-s, -e) };
        acc = acc.add(d);
    }
    acc
}

/// Earliest record with the smallest extended-precision distance.
pub fn linear_scan_oracle(records: &[TrainingRecord], probe: &[f64]) -> Option<(usize, Dd)> {
    let mut best: Option<(usize, Dd)> = None;
    for (i, r) in records.iter().enumerate() {
        let d = l1_extended(probe, &r.lr_details);
        if best.is_none_or(|(_, b)| d.0 < b.0 || (d.0 == b.0 && d.1 < b.1)) {
            best = Some((i, d));
        }
    }
    best
}
