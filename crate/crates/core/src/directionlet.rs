//! One level of the skewed anisotropic wavelet transform AWT(2,1).
//!
//! A patch is first resampled onto its lattice grid (rows are co-lines of
//! `d1`, columns co-lines of `d2`, see [`DirectionPair::lattice_map`]). Three
//! 1-D stages follow: along `d1`, along `d2`, along `d1` again. The first two
//! stages name the intermediate bands A = LL, V = LH, H = HL, D = HH
//! (`d1` outcome first); the third appends an L/H suffix.
//!
//! Oversampled bands are `n`×`n` and stored back in image coordinates, so
//! each coefficient sits on the pixel it was centred at. Critical bands are
//! `n/2`×`n/4` and stay in lattice coordinates.

use crate::error::{Error, Result};
use crate::filterbank::{analyze_into, band_len, daub4, synthesize_into, FilterPair, Mode};
use crate::image::Patch;
use crate::lattice::{canonical_pairs, DirectionPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Band {
    AL,
    AH,
    HL,
    HH,
    VL,
    VH,
    DL,
    DH,
}

impl Band {
    pub const ALL: [Band; 8] = [
        Band::AL,
        Band::AH,
        Band::HL,
        Band::HH,
        Band::VL,
        Band::VH,
        Band::DL,
        Band::DH,
    ];

    /// Detail bands in serialization order.
    pub const DETAIL: [Band; 6] = [Band::HL, Band::HH, Band::VL, Band::VH, Band::DL, Band::DH];

    pub fn name(self) -> &'static str {
        match self {
            Band::AL => "AL",
            Band::AH => "AH",
            Band::HL => "HL",
            Band::HH => "HH",
            Band::VL => "VL",
            Band::VH => "VH",
            Band::DL => "DL",
            Band::DH => "DH",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Dense row-major grid of coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Filters every row; returns (low, high).
    fn split_rows(&self, f: &FilterPair, mode: Mode) -> (Plane, Plane) {
        let m = band_len(self.cols, mode);
        let mut lo = Plane::zeros(self.rows, m);
        let mut hi = Plane::zeros(self.rows, m);
        for r in 0..self.rows {
            analyze_into(
                &self.data[r * self.cols..(r + 1) * self.cols],
                f,
                mode,
                &mut lo.data[r * m..(r + 1) * m],
                &mut hi.data[r * m..(r + 1) * m],
            );
        }
        (lo, hi)
    }

    fn merge_rows(lo: &Plane, hi: &Plane, f: &FilterPair, mode: Mode, cols: usize) -> Plane {
        let m = lo.cols;
        let mut out = Plane::zeros(lo.rows, cols);
        for r in 0..lo.rows {
            synthesize_into(
                &lo.data[r * m..(r + 1) * m],
                &hi.data[r * m..(r + 1) * m],
                f,
                mode,
                &mut out.data[r * cols..(r + 1) * cols],
            );
        }
        out
    }

    fn transposed(&self) -> Plane {
        let mut out = Plane::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    fn split_cols(&self, f: &FilterPair, mode: Mode) -> (Plane, Plane) {
        let (lo, hi) = self.transposed().split_rows(f, mode);
        (lo.transposed(), hi.transposed())
    }

    fn merge_cols(lo: &Plane, hi: &Plane, f: &FilterPair, mode: Mode, rows: usize) -> Plane {
        Plane::merge_rows(&lo.transposed(), &hi.transposed(), f, mode, rows).transposed()
    }
}

/// The eight AWT(2,1) bands of one patch.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandSet {
    bands: [Plane; 8],
    pub pair: DirectionPair,
    pub mode: Mode,
    /// Side of the source patch.
    pub n: usize,
}

/// `(rows, cols)` of every band for an `n`×`n` patch.
pub fn band_shape(n: usize, mode: Mode) -> (usize, usize) {
    match mode {
        Mode::Oversampled => (n, n),
        Mode::Critical => (n / 2, n / 4),
    }
}

impl SubbandSet {
    pub fn zeros(pair: DirectionPair, mode: Mode, n: usize) -> Self {
        let (r, c) = band_shape(n, mode);
        Self {
            bands: std::array::from_fn(|_| Plane::zeros(r, c)),
            pair,
            mode,
            n,
        }
    }

    pub fn band(&self, b: Band) -> &Plane {
        &self.bands[b.index()]
    }

    pub fn band_mut(&mut self, b: Band) -> &mut Plane {
        &mut self.bands[b.index()]
    }

    pub fn detail_bands(&self) -> [&Plane; 6] {
        Band::DETAIL.map(|b| self.band(b))
    }

    /// Detail coefficients concatenated in band order, each band row-major.
    pub fn detail_coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(6 * self.bands[0].data.len());
        for p in self.detail_bands() {
            out.extend_from_slice(&p.data);
        }
        out
    }

    /// Overwrites the six detail bands from a [`Self::detail_coefficients`] layout.
    pub fn set_detail_coefficients(&mut self, coeffs: &[f64]) -> Result<()> {
        let per = self.bands[0].data.len();
        if coeffs.len() != 6 * per {
            return Err(Error::Shape(format!(
                "expected {} detail coefficients, got {}",
                6 * per,
                coeffs.len()
            )));
        }
        for (b, chunk) in Band::DETAIL.iter().zip(coeffs.chunks(per)) {
            self.band_mut(*b).data.copy_from_slice(chunk);
        }
        Ok(())
    }

    /// `a·self + b·other`, band by band.
    pub fn combine(&self, a: f64, other: &SubbandSet, b: f64) -> Result<SubbandSet> {
        if self.pair != other.pair || self.mode != other.mode || self.n != other.n {
            return Err(Error::Shape("subband sets differ in pair, mode or size".into()));
        }
        let mut out = self.clone();
        for (o, p) in out.bands.iter_mut().zip(&other.bands) {
            for (x, y) in o.data.iter_mut().zip(&p.data) {
                *x = a * *x + b * y;
            }
        }
        Ok(out)
    }

    fn check_shapes(&self) -> Result<()> {
        let (r, c) = band_shape(self.n, self.mode);
        for (b, p) in Band::ALL.iter().zip(&self.bands) {
            if p.rows != r || p.cols != c || p.data.len() != r * c {
                return Err(Error::Shape(format!(
                    "band {} is {}x{}, expected {r}x{c}",
                    b.name(),
                    p.rows,
                    p.cols
                )));
            }
        }
        Ok(())
    }
}

fn check_side(n: usize, mode: Mode) -> Result<()> {
    match mode {
        Mode::Critical if n == 0 || !n.is_multiple_of(4) => Err(Error::Shape(format!(
            "critical AWT(2,1) halves the patch side twice; side {n} is not a multiple of 4"
        ))),
        Mode::Oversampled if n == 0 => Err(Error::EmptySignal),
        _ => Ok(()),
    }
}

pub fn forward_awt21(p: &Patch, pair: DirectionPair, mode: Mode) -> Result<SubbandSet> {
    forward_with(p, pair, mode, &daub4())
}

pub fn forward_with(p: &Patch, pair: DirectionPair, mode: Mode, f: &FilterPair) -> Result<SubbandSet> {
    let n = p.size();
    check_side(n, mode)?;
    let map = pair.lattice_map(n)?;
    let grid = Plane {
        rows: n,
        cols: n,
        data: map.iter().map(|&i| p.values()[i]).collect(),
    };
    let (l, h) = grid.split_rows(f, mode);
    let (a, v) = l.split_cols(f, mode);
    let (hb, d) = h.split_cols(f, mode);
    let (al, ah) = a.split_rows(f, mode);
    let (hl, hh) = hb.split_rows(f, mode);
    let (vl, vh) = v.split_rows(f, mode);
    let (dl, dh) = d.split_rows(f, mode);
    let mut bands = [al, ah, hl, hh, vl, vh, dl, dh];
    if mode == Mode::Oversampled {
        for b in &mut bands {
            let mut img = vec![0.0; n * n];
            for (k, &cell) in map.iter().enumerate() {
                img[cell] = b.data[k];
            }
            b.data = img;
        }
    }
    Ok(SubbandSet {
        bands,
        pair,
        mode,
        n,
    })
}

pub fn inverse_awt21(s: &SubbandSet) -> Result<Patch> {
    inverse_with(s, &daub4())
}

pub fn inverse_with(s: &SubbandSet, f: &FilterPair) -> Result<Patch> {
    let n = s.n;
    check_side(n, s.mode)?;
    s.check_shapes()?;
    let map = s.pair.lattice_map(n)?;
    let lattice: Vec<Plane> = match s.mode {
        Mode::Oversampled => s
            .bands
            .iter()
            .map(|b| Plane {
                rows: n,
                cols: n,
                data: map.iter().map(|&cell| b.data[cell]).collect(),
            })
            .collect(),
        Mode::Critical => s.bands.to_vec(),
    };
    let mode = s.mode;
    let m1 = band_len(n, mode);
    let [al, ah, hl, hh, vl, vh, dl, dh] = &lattice[..] else {
        unreachable!()
    };
    let a = Plane::merge_rows(al, ah, f, mode, m1);
    let h = Plane::merge_rows(hl, hh, f, mode, m1);
    let v = Plane::merge_rows(vl, vh, f, mode, m1);
    let d = Plane::merge_rows(dl, dh, f, mode, m1);
    let l = Plane::merge_cols(&a, &v, f, mode, n);
    let hi = Plane::merge_cols(&h, &d, f, mode, n);
    let grid = Plane::merge_rows(&l, &hi, f, mode, n);
    let mut values = vec![0.0; n * n];
    for (k, &cell) in map.iter().enumerate() {
        values[cell] = grid.data[k];
    }
    Patch::new(n, (0, 0), values)
}

/// Sum of squares over the six detail bands.
pub fn detail_energy(s: &SubbandSet) -> f64 {
    s.detail_bands().iter().map(|p| p.energy()).sum()
}

/// Relative slack under which two direction energies count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Index of the first energy within [`TIE_TOLERANCE`] (relative to the
/// largest) of the minimum.
pub fn argmin_with_ties(energies: &[f64]) -> usize {
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let max = energies.iter().copied().fold(0.0, f64::max);
    let slack = TIE_TOLERANCE * max;
    energies
        .iter()
        .position(|&e| e <= min + slack)
        .expect("at least one energy")
}

/// Direction pair minimizing the oversampled detail energy, with the five
/// per-pair energies in canonical order.
pub fn best_direction(p: &Patch) -> Result<(DirectionPair, [f64; 5])> {
    let pairs = canonical_pairs();
    let mut energies = [0.0; 5];
    for (e, pair) in energies.iter_mut().zip(pairs) {
        *e = detail_energy(&forward_awt21(p, pair, Mode::Oversampled)?);
    }
    Ok((pairs[argmin_with_ties(&energies)], energies))
}

/// One level of the standard separable 2-D wavelet transform: a horizontal
/// split followed by a vertical split of each half. Bands are `[LL, LH, HL,
/// HH]`, named by the row outcome first; image coordinates in both modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableBands {
    pub bands: [Plane; 4],
    pub mode: Mode,
    pub n: usize,
}

impl SeparableBands {
    /// `LH, HL, HH` concatenated, each row-major.
    pub fn detail_coefficients(&self) -> Vec<f64> {
        self.bands[1..].iter().flat_map(|p| p.data.iter().copied()).collect()
    }

    pub fn set_detail_coefficients(&mut self, coeffs: &[f64]) -> Result<()> {
        let per = self.bands[0].data.len();
        if coeffs.len() != 3 * per {
            return Err(Error::Shape(format!(
                "expected {} detail coefficients, got {}",
                3 * per,
                coeffs.len()
            )));
        }
        for (b, chunk) in self.bands[1..].iter_mut().zip(coeffs.chunks(per)) {
            b.data.copy_from_slice(chunk);
        }
        Ok(())
    }
}

/// `(rows, cols)` of every separable band for an `n`×`n` patch.
pub fn separable_band_shape(n: usize, mode: Mode) -> (usize, usize) {
    (band_len(n, mode), band_len(n, mode))
}

pub fn forward_separable(p: &Patch, mode: Mode) -> Result<SeparableBands> {
    let n = p.size();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    if mode == Mode::Critical && !n.is_multiple_of(2) {
        return Err(Error::Shape(format!("critical split needs an even side, got {n}")));
    }
    let f = daub4();
    let grid = Plane {
        rows: n,
        cols: n,
        data: p.values().to_vec(),
    };
    let (l, h) = grid.split_rows(&f, mode);
    let (ll, lh) = l.split_cols(&f, mode);
    let (hl, hh) = h.split_cols(&f, mode);
    Ok(SeparableBands {
        bands: [ll, lh, hl, hh],
        mode,
        n,
    })
}

pub fn inverse_separable(s: &SeparableBands) -> Result<Patch> {
    let (r, c) = separable_band_shape(s.n, s.mode);
    if s.n == 0 || s.bands.iter().any(|b| b.rows != r || b.cols != c || b.data.len() != r * c) {
        return Err(Error::Shape(format!("separable bands must be {r}x{c}")));
    }
    let f = daub4();
    let [ll, lh, hl, hh] = &s.bands;
    let l = Plane::merge_cols(ll, lh, &f, s.mode, s.n);
    let h = Plane::merge_cols(hl, hh, &f, s.mode, s.n);
    let grid = Plane::merge_rows(&l, &h, &f, s.mode, s.n);
    Patch::new(s.n, (0, 0), grid.data)
}
