mod common;

use common::{coline_detail_energy, oracle_argmin, random_image};
use dlsr_core::corpus::{shape_scene, siemens_star, stripes};
use dlsr_core::degrade::decimate;
use dlsr_core::trainset::{mad_scan, to_bytes};
use dlsr_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_corpus() -> Vec<Image> {
    vec![
        stripes(64, 3.0 * std::f64::consts::SQRT_2, std::f64::consts::FRAC_PI_4, 0.1, 0.9),
        siemens_star(64, 16, 32.0, 32.0, 0.0),
        shape_scene(64, 5, 12),
    ]
}

fn block_average(img: &Image, q: usize) -> Image {
    Image::from_fn(img.width() / q, img.height() / q, |r, c| {
        let mut s = 0.0;
        for i in 0..q {
            for j in 0..q {
                s += img.get(r * q + i, c * q + j);
            }
        }
        s / (q * q) as f64
    })
}

#[test]
fn every_record_rebuilds_from_its_source() {
    let corpus = small_corpus();
    let cfg = BuildConfig::default();
    let ts = build_training_set(&corpus, &cfg).unwrap();
    assert_eq!(ts.record_count(), 3 * 8 * 8);
    let pairs = canonical_pairs();
    for (pair, group) in ts.groups() {
        for rec in group {
            let hr_img = &corpus[rec.source.image as usize];
            let lr_img = block_average(hr_img, 2);
            let (r, c) = (rec.source.patch_row as usize, rec.source.patch_col as usize);
            let lr = lr_img.patch_at(r * 4, c * 4, 4);
            let hr = hr_img.patch_at(r * 8, c * 8, 8);
            let e = 0.01 + lr.values().iter().map(|v| v.abs()).sum::<f64>();
            let (lr_n, hr_n) = (lr.divided(e), hr.divided(e));
            let energies: Vec<f64> = pairs.iter().map(|&p| coline_detail_energy(&lr_n, p)).collect();
            assert_eq!(pairs[oracle_argmin(&energies)], pair, "record {:?}", rec.source);
            let want_lr = forward_awt21(&lr_n, pair, Mode::Oversampled).unwrap().detail_coefficients();
            for (a, b) in want_lr.iter().zip(&rec.lr_details) {
                assert!((a - b).abs() < 1e-12);
            }
            // restoring the true approximation bands must give the HR patch back
            let mut s = forward_awt21(&hr_n, pair, Mode::Oversampled).unwrap();
            s.set_detail_coefficients(&rec.hr_details).unwrap();
            let back = inverse_awt21(&s).unwrap();
            for (a, b) in back.values().iter().zip(hr_n.values()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn build_is_byte_identical_across_runs() {
    let a = to_bytes(&build_training_set(&small_corpus(), &BuildConfig::default()).unwrap());
    let b = to_bytes(&build_training_set(&small_corpus(), &BuildConfig::default()).unwrap());
    assert_eq!(a, b);
}

#[test]
fn sixteen_pixel_image_gives_four_records() {
    let img = Image::from_fn(16, 16, |r, c| ((r * 3 + c) % 7) as f64 / 6.0);
    let ts = build_training_set(&[img], &BuildConfig::default()).unwrap();
    assert_eq!(ts.record_count(), 4);
    let (lr, hr) = ts.meta.record_lens();
    assert_eq!((lr, hr), (6 * 16, 6 * 64));
}

#[test]
fn mse_examples() {
    let z = Image::filled(4, 4, 0.5);
    assert_eq!(mse(&z, &z).unwrap(), 0.0);
    let zero = Image::filled(4, 4, 0.0);
    assert_eq!(mse(&z, &zero).unwrap(), 1.0);
    assert!(matches!(mse(&zero, &z), Err(Error::UndefinedMetric)));
    assert!(matches!(mse(&z, &Image::filled(4, 3, 0.5)), Err(Error::Shape(_))));
}

/// Training set holding only the horizontal-stripe group, so most test
/// patches find their own group empty.
fn single_group_set() -> TrainingSet {
    let horizontal = stripes(64, 6.0, std::f64::consts::FRAC_PI_2, 0.2, 0.8);
    let full = build_training_set(&[horizontal], &BuildConfig::default()).unwrap();
    let (pair, group) = full.groups().max_by_key(|(_, g)| g.len()).unwrap();
    let mut ts = TrainingSet::empty(&BuildConfig::default());
    for rec in group {
        ts.push(pair, rec.clone()).unwrap();
    }
    ts
}

#[test]
fn interpolate_only_fallback_keeps_the_zoom() {
    let ts = single_group_set();
    let lr = decimate(&siemens_star(64, 12, 30.0, 34.0, 0.3), 2).unwrap();
    let (out, report) = super_resolve(&lr, &ts, &SrConfig::default()).unwrap();
    let zoom = cubic_spline_upsample(&lr, 2);
    let falls: Vec<_> = report.patches.iter().filter(|d| d.fallback).collect();
    assert!(!falls.is_empty() && falls.len() < report.patches.len());
    for d in falls {
        assert!(d.matched.is_none());
        for r in 0..8 {
            for c in 0..8 {
                let (y, x) = (d.patch_row * 8 + r, d.patch_col * 8 + c);
                assert_eq!(out.get(y, x), zoom.get(y, x));
            }
        }
    }
}

#[test]
fn nearest_any_direction_borrows_the_populated_group() {
    let ts = single_group_set();
    let (only, _) = ts.groups().find(|(_, g)| !g.is_empty()).unwrap();
    let lr = decimate(&siemens_star(64, 12, 30.0, 34.0, 0.3), 2).unwrap();
    let cfg = SrConfig { fallback: Fallback::NearestAnyDirection, ..SrConfig::default() };
    let (_, report) = super_resolve(&lr, &ts, &cfg).unwrap();
    for d in &report.patches {
        let m = d.matched.as_ref().expect("a populated group always matches");
        assert_eq!(m.pair, only);
        assert_eq!(d.fallback, d.pair != only);
    }
    assert!(report.fallback_fraction() > 0.0);
}

#[test]
fn far_patches_ignore_a_local_perturbation() {
    let ts = build_training_set(&small_corpus(), &BuildConfig::default()).unwrap();
    let lr = decimate(&shape_scene(64, 9, 14), 2).unwrap();
    let (base, base_report) = super_resolve(&lr, &ts, &SrConfig::default()).unwrap();
    let (pr, pc) = (3, 4);
    let mut px = lr.pixels().to_vec();
    let idx = (pr * 4 + 1) * lr.width() + pc * 4 + 2;
    let delta = if px[idx] < 0.5 { 0.5 } else { -0.5 };
    px[idx] += delta;
    let bumped = Image::new(lr.width(), lr.height(), px).unwrap();
    let (out, report) = super_resolve(&bumped, &ts, &SrConfig::default()).unwrap();
    for (d0, d1) in base_report.patches.iter().zip(&report.patches) {
        let far = d0.patch_row.abs_diff(pr) >= 2 || d0.patch_col.abs_diff(pc) >= 2;
        if !far {
            continue;
        }
        assert_eq!(d0.pair, d1.pair);
        assert_eq!(d0.matched.as_ref().map(|m| m.index), d1.matched.as_ref().map(|m| m.index));
        let mut worst: f64 = 0.0;
        for r in 0..8 {
            for c in 0..8 {
                let (y, x) = (d0.patch_row * 8 + r, d0.patch_col * 8 + c);
                worst = worst.max((out.get(y, x) - base.get(y, x)).abs());
            }
        }
        assert!(worst < 0.01 * delta.abs(), "patch ({}, {}) moved {worst}", d0.patch_row, d0.patch_col);
    }
}

#[test]
fn halving_contrast_keeps_every_decision() {
    let corpus = small_corpus();
    let exact = BuildConfig { energy_offset: 0.0, ..BuildConfig::default() };
    let ts = build_training_set(&corpus, &exact).unwrap();
    let cfg = SrConfig { energy_offset: 0.0, ..SrConfig::default() };
    let lr = decimate(&shape_scene(64, 9, 14), 2).unwrap();
    let dim = Image::new(lr.width(), lr.height(), lr.pixels().iter().map(|v| v * 0.5).collect()).unwrap();
    let (a, ra) = super_resolve(&lr, &ts, &cfg).unwrap();
    let (b, rb) = super_resolve(&dim, &ts, &cfg).unwrap();
    for (x, y) in ra.patches.iter().zip(&rb.patches) {
        assert_eq!(x.pair, y.pair);
        assert_eq!(x.matched.as_ref().map(|m| m.index), y.matched.as_ref().map(|m| m.index));
    }
    // the zoom is linear, so only clamping can break exact covariance; a
    // clamped zoom pixel leaks into its whole patch through the transform
    let zoom = cubic_spline_upsample(&lr, 2);
    let mut checked = 0;
    for d in &ra.patches {
        let (y0, x0) = (d.patch_row * 8, d.patch_col * 8);
        let inside = |img: &Image| (0..64).all(|k| {
            let v = img.get(y0 + k / 8, x0 + k % 8);
            v > 0.0 && v < 1.0
        });
        if !inside(&zoom) || !inside(&a) {
            continue;
        }
        checked += 1;
        for k in 0..64 {
            let (y, x) = (y0 + k / 8, x0 + k % 8);
            assert!((a.get(y, x) * 0.5 - b.get(y, x)).abs() < 1e-12);
        }
    }
    assert!(checked > ra.patches.len() / 2);

    let ts = build_training_set(&corpus, &BuildConfig::default()).unwrap();
    let (_, ra) = super_resolve(&lr, &ts, &SrConfig::default()).unwrap();
    let (_, rb) = super_resolve(&dim, &ts, &SrConfig::default()).unwrap();
    for (x, y) in ra.patches.iter().zip(&rb.patches) {
        assert_eq!(x.pair, y.pair);
    }
}

#[test]
fn wm2_finds_its_own_records() {
    let corpus = small_corpus();
    let wts = wm2_build(&corpus).unwrap();
    assert_eq!(wts.records.len(), 3 * 64);
    for (i, rec) in wts.records.iter().enumerate().step_by(7) {
        let m = mad_scan(&wts.records, &rec.lr_details).unwrap();
        assert_eq!(m.distance, 0.0);
        assert!(m.index <= i);
    }
    let flat = Image::filled(32, 32, 0.4);
    let wts = wm2_build(&[Image::filled(64, 64, 0.4)]).unwrap();
    let out = wm2_super_resolve(&flat, &wts).unwrap();
    assert!(out.pixels().iter().all(|v| (v - 0.4).abs() < 1e-12));
}

#[test]
fn super_resolution_is_deterministic() {
    let ts = build_training_set(&small_corpus(), &BuildConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lr = random_image(&mut rng, 20, 12);
    let (a, ra) = super_resolve(&lr, &ts, &SrConfig::default()).unwrap();
    let (b, rb) = super_resolve(&lr, &ts, &SrConfig::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra.patches_csv(), rb.patches_csv());
    assert_eq!((a.width(), a.height()), (40, 24));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mad_distance_is_symmetric_and_zero_only_on_equality(
        a in prop::collection::vec(-1.0f64..1.0, 96),
        b in prop::collection::vec(-1.0f64..1.0, 96),
    ) {
        let rec = |v: &Vec<f64>| TrainingRecord {
            source: RecordSource { image: 0, patch_row: 0, patch_col: 0 },
            lr_details: v.clone(),
            hr_details: vec![0.0; 384],
        };
        let ab = mad_scan(&[rec(&b)], &a).unwrap().distance;
        let ba = mad_scan(&[rec(&a)], &b).unwrap().distance;
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(mad_scan(&[rec(&a)], &a).unwrap().distance, 0.0);
        prop_assert_eq!(ab == 0.0, a == b);
    }
}
