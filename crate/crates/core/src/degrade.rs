//! Forward observation model: block-average decimation and additive noise.
//!
//! Blur is identity, so the observed image is `D z + n` with `D` the
//! block-averaging matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::Image;

/// Averages each `q`×`q` block of `hr`.
pub fn decimate(hr: &Image, q: usize) -> Result<Image> {
    if q == 0 || !hr.width().is_multiple_of(q) || !hr.height().is_multiple_of(q) {
        return Err(Error::Precondition(format!(
            "{}x{} image is not divisible by decimation factor {q}",
            hr.width(),
            hr.height()
        )));
    }
    let (w, h) = (hr.width() / q, hr.height() / q);
    let weight = 1.0 / (q * q) as f64;
    let mut out = Vec::with_capacity(w * h);
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for k in q * i..q * (i + 1) {
                for l in q * j..q * (j + 1) {
                    acc += hr.get(k, l);
                }
            }
            out.push(acc * weight);
        }
    }
    Image::from_clamped(w, h, out)
}

/// Sparse `M²`×`(qM)²` block-averaging matrix acting on lexicographically
/// ordered images.
#[derive(Clone, Debug, PartialEq)]
pub struct DecimationMatrix {
    pub q: usize,
    pub lr_side: usize,
    /// Column indices per row, ascending; every entry has weight `1/q²`.
    pub rows: Vec<Vec<usize>>,
}

impl DecimationMatrix {
    pub fn weight(&self) -> f64 {
        1.0 / (self.q * self.q) as f64
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        let hr = self.q * self.lr_side;
        hr * hr
    }

    /// Dense row as 0/1 digits, the way the matrix is usually printed.
    pub fn row_pattern(&self, row: usize) -> String {
        let mut s = vec![b'0'; self.n_cols()];
        for &c in &self.rows[row] {
            s[c] = b'1';
        }
        String::from_utf8(s).unwrap()
    }

    /// `D x`, summing each row in ascending column order.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols() {
            return Err(Error::Shape(format!(
                "matrix has {} columns, vector has {} entries",
                self.n_cols(),
                x.len()
            )));
        }
        let w = self.weight();
        Ok(self
            .rows
            .iter()
            .map(|cols| cols.iter().fold(0.0, |acc, &c| acc + w * x[c]))
            .collect())
    }
}

pub fn decimation_matrix(lr_side: usize, q: usize) -> DecimationMatrix {
    assert!(lr_side >= 1 && q >= 1);
    let hr_side = q * lr_side;
    let rows = (0..lr_side)
        .flat_map(|i| (0..lr_side).map(move |j| (i, j)))
        .map(|(i, j)| {
            (0..q)
                .flat_map(|a| (0..q).map(move |b| (q * i + a) * hr_side + (q * j + b)))
                .collect()
        })
        .collect();
    DecimationMatrix { q, lr_side, rows }
}

/// Zero-mean Gaussian samples drawn from ChaCha8 seeded with `seed`.
pub fn gaussian_noise(len: usize, sigma: f64, seed: u64) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0; len];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    (0..len).map(|_| normal.sample(&mut rng)).collect()
}

/// Adds seeded Gaussian noise in row-major order, then clamps to `[0, 1]`.
pub fn add_noise(img: &Image, sigma: f64, seed: u64) -> Image {
    assert!(sigma >= 0.0 && sigma.is_finite(), "sigma must be finite and non-negative");
    if sigma == 0.0 {
        return img.clone();
    }
    let noise = gaussian_noise(img.pixels().len(), sigma, seed);
    let pixels = img.pixels().iter().zip(noise).map(|(v, n)| v + n).collect();
    Image::from_clamped(img.width(), img.height(), pixels).expect("dimensions unchanged")
}
