//! Prediction pipeline, block-wavelet baseline and normalized MSE.
//!
//! Every 4×4 low-resolution patch is contrast-normalized, classified by its
//! best direction pair and matched against that pair's training group. The
//! approximation bands of the output come from the cubic-spline zoom of the
//! input, the detail bands from the matched record.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::degrade::decimate;
use crate::directionlet::{
    best_direction, forward_awt21, forward_separable, inverse_awt21, inverse_separable, separable_band_shape,
};
use crate::error::{Error, Result};
use crate::filterbank::{daub4, Mode};
use crate::image::{crop, energy_with_offset, extract_patches, pad_to_multiple, Image, Patch, ENERGY_OFFSET};
use crate::lattice::{canonical_pairs, DirectionPair};
use crate::spline::cubic_spline_upsample;
use crate::trainset::{mad_scan, query_mad, RecordSource, TrainingMeta, TrainingRecord, TrainingSet};

/// What to emit for a patch whose direction group is empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fallback {
    /// The cubic-spline patch, unchanged.
    #[default]
    InterpolateOnly,
    /// Best match over every non-empty group, reconstructed along that
    /// group's pair.
    NearestAnyDirection,
}

impl Fallback {
    pub fn name(self) -> &'static str {
        match self {
            Fallback::InterpolateOnly => "interpolate-only",
            Fallback::NearestAnyDirection => "nearest-any-direction",
        }
    }
}

impl std::str::FromStr for Fallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolate-only" => Ok(Fallback::InterpolateOnly),
            "nearest-any-direction" => Ok(Fallback::NearestAnyDirection),
            other => Err(Error::Config(format!("unknown fallback '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrConfig {
    pub q: usize,
    pub lr_patch: usize,
    pub hr_patch: usize,
    pub mode: Mode,
    pub fallback: Fallback,
    /// Additive floor of the contrast energy; only tests change it.
    pub energy_offset: f64,
}

impl Default for SrConfig {
    fn default() -> Self {
        Self {
            q: 2,
            lr_patch: 4,
            hr_patch: 8,
            mode: Mode::Oversampled,
            fallback: Fallback::InterpolateOnly,
            energy_offset: ENERGY_OFFSET,
        }
    }
}

impl SrConfig {
    fn validate(&self) -> Result<()> {
        if self.q == 0 || self.lr_patch == 0 || self.hr_patch != self.q * self.lr_patch {
            return Err(Error::Config(format!(
                "hr_patch ({}) must equal q ({}) x lr_patch ({})",
                self.hr_patch, self.q, self.lr_patch
            )));
        }
        Ok(())
    }

    /// Errors unless `meta` was built with this geometry, filter and mode.
    pub fn check_meta(&self, meta: &TrainingMeta) -> Result<()> {
        self.validate()?;
        let ours = (self.q as u32, self.lr_patch as u32, self.hr_patch as u32, daub4().id, self.mode);
        let theirs = (meta.q, meta.lr_patch, meta.hr_patch, meta.filter_id.as_str(), meta.mode);
        if ours != theirs {
            return Err(Error::Config(format!(
                "training set (q={}, lr={}, hr={}, filter={}, mode={}) does not match \
                 configuration (q={}, lr={}, hr={}, filter={}, mode={})",
                theirs.0,
                theirs.1,
                theirs.2,
                theirs.3,
                theirs.4.name(),
                ours.0,
                ours.1,
                ours.2,
                ours.3,
                ours.4.name()
            )));
        }
        Ok(())
    }
}

/// Match chosen for one patch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchInfo {
    /// Pair whose group supplied the record; differs from the patch's own
    /// pair only under [`Fallback::NearestAnyDirection`].
    pub pair: DirectionPair,
    /// Index within that group.
    pub index: usize,
    pub source: RecordSource,
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchDiagnostic {
    pub patch_row: usize,
    pub patch_col: usize,
    pub pair: DirectionPair,
    pub energy: f64,
    pub matched: Option<MatchInfo>,
    pub fallback: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SrReport {
    /// `(method, normalized MSE)` rows, filled by callers that hold a reference.
    pub mse: Vec<(String, f64)>,
    pub patches: Vec<PatchDiagnostic>,
    pub duration: Duration,
}

impl SrReport {
    pub fn fallback_fraction(&self) -> f64 {
        if self.patches.is_empty() {
            return 0.0;
        }
        self.patches.iter().filter(|p| p.fallback).count() as f64 / self.patches.len() as f64
    }

    /// One row per patch; contains no timing so identical runs give identical text.
    pub fn patches_csv(&self) -> String {
        let mut s = String::from("patch_row,patch_col,pair,energy,match_pair,match_index,source_image,source_row,source_col,distance,fallback\n");
        for p in &self.patches {
            let _ = write!(s, "{},{},{},{},", p.patch_row, p.patch_col, csv_pair(p.pair), p.energy);
            match p.matched {
                Some(m) => {
                    let _ = write!(
                        s,
                        "{},{},{},{},{},{},",
                        csv_pair(m.pair),
                        m.index,
                        m.source.image,
                        m.source.patch_row,
                        m.source.patch_col,
                        m.distance
                    );
                }
                None => s.push_str(",,,,,,"),
            }
            let _ = writeln!(s, "{}", p.fallback as u8);
        }
        s
    }

    pub fn mse_csv(&self) -> String {
        let mut s = String::from("method,mse\n");
        for (m, v) in &self.mse {
            let _ = writeln!(s, "{m},{v}");
        }
        s
    }
}

/// Pair label without the comma, e.g. `0:90`.
fn csv_pair(p: DirectionPair) -> String {
    format!("{}:{}", p.d1.label(), p.d2.label())
}

/// `Σ(z − ẑ)² / Σz²`.
pub fn mse(z: &Image, z_hat: &Image) -> Result<f64> {
    if z.dims() != z_hat.dims() {
        return Err(Error::Shape(format!(
            "reference is {}x{}, candidate is {}x{}",
            z.width(),
            z.height(),
            z_hat.width(),
            z_hat.height()
        )));
    }
    let den: f64 = z.pixels().iter().map(|v| v * v).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    let num: f64 = z.pixels().iter().zip(z_hat.pixels()).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(num / den)
}

/// Shared driver: pads, zooms, tiles, and lets `predict` replace each
/// high-resolution patch. `predict` gets the raw LR patch and the matching
/// zoomed patch and returns the output patch and its diagnostic.
fn run_patches<F>(lr: &Image, q: usize, lr_patch: usize, mut predict: F) -> Result<(Image, Vec<PatchDiagnostic>)>
where
    F: FnMut(&Patch, &Patch) -> Result<(Patch, PatchDiagnostic)>,
{
    let hr_patch = q * lr_patch;
    let (padded, dims) = pad_to_multiple(lr, lr_patch);
    let zoom = cubic_spline_upsample(&padded, q);
    let lr_grid = extract_patches(&padded, lr_patch)?;
    let hr_w = zoom.width();
    let mut out = zoom.pixels().to_vec();
    let mut diags = Vec::with_capacity(lr_grid.patches.len());
    for (k, p) in lr_grid.patches.iter().enumerate() {
        let (pr, pc) = (k / lr_grid.cols, k % lr_grid.cols);
        let interp = zoom.patch_at(pr * hr_patch, pc * hr_patch, hr_patch);
        let (h, mut d) = predict(p, &interp)?;
        d.patch_row = pr;
        d.patch_col = pc;
        for r in 0..hr_patch {
            let row = (pr * hr_patch + r) * hr_w + pc * hr_patch;
            for c in 0..hr_patch {
                out[row + c] = h.get(r, c).clamp(0.0, 1.0);
            }
        }
        diags.push(d);
    }
    let full = Image::from_clamped(hr_w, zoom.height(), out)?;
    let target = crate::image::Dims {
        width: dims.width * q,
        height: dims.height * q,
    };
    Ok((crop(&full, target)?, diags))
}

/// Divides by `e` unless it is zero.
fn normalize(p: &Patch, e: f64) -> Patch {
    if e > 0.0 {
        p.divided(e)
    } else {
        p.clone()
    }
}

fn undo(p: &Patch, e: f64) -> Patch {
    if e > 0.0 {
        p.scaled(e)
    } else {
        p.clone()
    }
}

/// Interpolated approximation plus `record`'s detail bands along `pair`.
fn reconstruct(interp_n: &Patch, pair: DirectionPair, mode: Mode, record: &TrainingRecord, e: f64) -> Result<Patch> {
    let mut s = forward_awt21(interp_n, pair, mode)?;
    s.set_detail_coefficients(&record.hr_details)?;
    Ok(undo(&inverse_awt21(&s)?, e))
}

/// Super-resolves `lr` by the training-set factor.
pub fn super_resolve(lr: &Image, ts: &TrainingSet, cfg: &SrConfig) -> Result<(Image, SrReport)> {
    cfg.check_meta(&ts.meta)?;
    let start = Instant::now();
    let (img, patches) = run_patches(lr, cfg.q, cfg.lr_patch, |p, interp| {
        let e = energy_with_offset(p.values(), cfg.energy_offset);
        let pn = normalize(p, e);
        let (pair, _) = best_direction(&pn)?;
        let probe = forward_awt21(&pn, pair, cfg.mode)?.detail_coefficients();
        let mut matched = query_mad(ts, pair, &probe).map(|(rec, m)| (pair, m.index, rec, m.distance));
        let fallback = matched.is_none();
        if fallback && cfg.fallback == Fallback::NearestAnyDirection {
            for (alt, group) in ts.groups() {
                if group.is_empty() {
                    continue;
                }
                let probe = forward_awt21(&pn, alt, cfg.mode)?.detail_coefficients();
                if let Some(m) = mad_scan(group, &probe) {
                    if matched.is_none_or(|(_, _, _, d)| m.distance < d) {
                        matched = Some((alt, m.index, &group[m.index], m.distance));
                    }
                }
            }
        }
        let out = match matched {
            Some((used, _, rec, _)) => reconstruct(&normalize(interp, e), used, cfg.mode, rec, e)?,
            None => interp.clone(),
        };
        let diag = PatchDiagnostic {
            patch_row: 0,
            patch_col: 0,
            pair,
            energy: e,
            matched: matched.map(|(used, index, rec, distance)| MatchInfo {
                pair: used,
                index,
                source: rec.source,
                distance,
            }),
            fallback,
        };
        Ok((out, diag))
    })?;
    Ok((
        img,
        SrReport {
            mse: Vec::new(),
            patches,
            duration: start.elapsed(),
        },
    ))
}

/// Block-wavelet baseline training set: one ungrouped list of records
/// holding the three separable detail bands.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletTrainingSet {
    pub q: usize,
    pub lr_patch: usize,
    pub mode: Mode,
    pub energy_offset: f64,
    pub records: Vec<TrainingRecord>,
}

fn separable_details(p: &Patch, mode: Mode) -> Result<Vec<f64>> {
    Ok(forward_separable(p, mode)?.detail_coefficients())
}

/// Builds the baseline set with the default geometry and oversampled bands.
pub fn wm2_build(corpus: &[Image]) -> Result<WaveletTrainingSet> {
    wm2_build_with(corpus, &SrConfig::default())
}

pub fn wm2_build_with(corpus: &[Image], cfg: &SrConfig) -> Result<WaveletTrainingSet> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut records = Vec::new();
    for (id, img) in corpus.iter().enumerate() {
        let (hr, _) = pad_to_multiple(img, cfg.hr_patch);
        let lr = decimate(&hr, cfg.q)?;
        let lr_grid = extract_patches(&lr, cfg.lr_patch)?;
        let hr_grid = extract_patches(&hr, cfg.hr_patch)?;
        for (k, (lp, hp)) in lr_grid.patches.iter().zip(&hr_grid.patches).enumerate() {
            let e = energy_with_offset(lp.values(), cfg.energy_offset);
            records.push(TrainingRecord {
                source: RecordSource {
                    image: id as u32,
                    patch_row: (k / lr_grid.cols) as u32,
                    patch_col: (k % lr_grid.cols) as u32,
                },
                lr_details: separable_details(&normalize(lp, e), cfg.mode)?,
                hr_details: separable_details(&normalize(hp, e), cfg.mode)?,
            });
        }
    }
    Ok(WaveletTrainingSet {
        q: cfg.q,
        lr_patch: cfg.lr_patch,
        mode: cfg.mode,
        energy_offset: cfg.energy_offset,
        records,
    })
}

/// Baseline prediction with the separable transform; an empty set
/// degenerates to the cubic-spline zoom.
pub fn wm2_super_resolve(lr: &Image, wts: &WaveletTrainingSet) -> Result<Image> {
    let (r, c) = separable_band_shape(wts.lr_patch, wts.mode);
    if wts.records.iter().any(|rec| rec.lr_details.len() != 3 * r * c) {
        return Err(Error::Config("baseline records do not match their patch geometry".into()));
    }
    let (img, _) = run_patches(lr, wts.q, wts.lr_patch, |p, interp| {
        let e = energy_with_offset(p.values(), wts.energy_offset);
        let probe = separable_details(&normalize(p, e), wts.mode)?;
        let found = mad_scan(&wts.records, &probe);
        let out = match found {
            Some(m) => {
                let mut s = forward_separable(&normalize(interp, e), wts.mode)?;
                s.set_detail_coefficients(&wts.records[m.index].hr_details)?;
                undo(&inverse_separable(&s)?, e)
            }
            None => interp.clone(),
        };
        let diag = PatchDiagnostic {
            patch_row: 0,
            patch_col: 0,
            pair: canonical_pairs()[0],
            energy: e,
            matched: found.map(|m| MatchInfo {
                pair: canonical_pairs()[0],
                index: m.index,
                source: wts.records[m.index].source,
                distance: m.distance,
            }),
            fallback: found.is_none(),
        };
        Ok((out, diag))
    })?;
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainset::{build_training_set, BuildConfig};

    #[test]
    fn mse_examples() {
        let z = Image::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let zh = Image::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(mse(&z, &z).unwrap(), 0.0);
        assert_eq!(mse(&z, &Image::filled(2, 2, 0.0)).unwrap(), 1.0);
        assert_eq!(mse(&z, &zh).unwrap(), 0.5);
        assert!(matches!(mse(&z, &Image::filled(2, 3, 0.0)), Err(Error::Shape(_))));
        assert!(matches!(mse(&Image::filled(2, 2, 0.0), &z), Err(Error::UndefinedMetric)));
    }

    #[test]
    fn fallback_parse() {
        assert_eq!("interpolate-only".parse::<Fallback>().unwrap(), Fallback::InterpolateOnly);
        assert_eq!(
            "nearest-any-direction".parse::<Fallback>().unwrap(),
            Fallback::NearestAnyDirection
        );
        assert!("other".parse::<Fallback>().is_err());
    }

    #[test]
    fn empty_set_is_interpolation() {
        let lr = Image::from_fn(12, 8, |r, c| ((r * 3 + c * 7) % 10) as f64 / 10.0);
        let ts = TrainingSet::empty(&BuildConfig::default());
        let (hr, report) = super_resolve(&lr, &ts, &SrConfig::default()).unwrap();
        assert_eq!(hr, cubic_spline_upsample(&lr, 2));
        assert_eq!(report.fallback_fraction(), 1.0);
        assert_eq!(report.patches.len(), 6);

        let cfg = SrConfig {
            fallback: Fallback::NearestAnyDirection,
            ..SrConfig::default()
        };
        let (hr2, _) = super_resolve(&lr, &ts, &cfg).unwrap();
        assert_eq!(hr2, hr);
    }

    #[test]
    fn output_size_and_crop() {
        let lr = Image::from_fn(10, 7, |r, c| ((r + c) % 4) as f64 / 4.0);
        let ts = build_training_set(&[Image::from_fn(16, 16, |r, c| ((r * c) % 5) as f64 / 5.0)], &BuildConfig::default()).unwrap();
        let (hr, report) = super_resolve(&lr, &ts, &SrConfig::default()).unwrap();
        assert_eq!((hr.width(), hr.height()), (20, 14));
        assert_eq!(report.patches.len(), 6);
        let wts = wm2_build(&[Image::filled(8, 8, 0.5)]).unwrap();
        let base = wm2_super_resolve(&lr, &wts).unwrap();
        assert_eq!((base.width(), base.height()), (20, 14));
    }

    #[test]
    fn metadata_mismatch() {
        let cfg = BuildConfig {
            mode: Mode::Critical,
            ..BuildConfig::default()
        };
        let ts = TrainingSet::empty(&cfg);
        let err = super_resolve(&Image::filled(4, 4, 0.5), &ts, &SrConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn constant_closed_loop() {
        let corpus = [Image::filled(16, 16, 0.6)];
        let ts = build_training_set(&corpus, &BuildConfig::default()).unwrap();
        let (hr, report) = super_resolve(&Image::filled(8, 8, 0.6), &ts, &SrConfig::default()).unwrap();
        assert!(hr.pixels().iter().all(|v| (v - 0.6).abs() < 1e-12));
        assert_eq!(report.fallback_fraction(), 0.0);

        let wts = wm2_build(&corpus).unwrap();
        let base = wm2_super_resolve(&Image::filled(8, 8, 0.6), &wts).unwrap();
        assert!(base.pixels().iter().all(|v| (v - 0.6).abs() < 1e-12));
    }

    #[test]
    fn critical_mode_pipeline() {
        let img = Image::from_fn(32, 32, |r, c| ((r as f64 * 0.3).sin() * (c as f64 * 0.2).cos() + 1.0) / 2.0);
        let bcfg = BuildConfig {
            mode: Mode::Critical,
            ..BuildConfig::default()
        };
        let ts = build_training_set(std::slice::from_ref(&img), &bcfg).unwrap();
        let cfg = SrConfig {
            mode: Mode::Critical,
            ..SrConfig::default()
        };
        let lr = decimate(&img, 2).unwrap();
        let (hr, _) = super_resolve(&lr, &ts, &cfg).unwrap();
        let cubic = cubic_spline_upsample(&lr, 2);
        assert!(mse(&img, &hr).unwrap() <= mse(&img, &cubic).unwrap());
    }

    #[test]
    fn csv_shapes() {
        let lr = Image::from_fn(8, 4, |r, c| ((r + 2 * c) % 3) as f64 / 3.0);
        let ts = build_training_set(&[Image::from_fn(16, 16, |r, c| ((r + c) % 3) as f64 / 3.0)], &BuildConfig::default()).unwrap();
        let (_, mut report) = super_resolve(&lr, &ts, &SrConfig::default()).unwrap();
        let csv = report.patches_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().all(|l| l.split(',').count() == 11));
        report.mse.push(("cubic".into(), 0.25));
        assert_eq!(report.mse_csv(), "method,mse\ncubic,0.25\n");
    }
}
