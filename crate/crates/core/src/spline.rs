//! Interpolating cubic B-spline zoom.
//!
//! Coefficients come from the recursive prefilter with pole `√3 − 2` under
//! whole-sample mirror boundaries. Output sample `i` of a zoom by `f` sits at
//! input coordinate `(i + 0.5)/f − 0.5`, so every `f`×`f` output block is
//! centred on the input pixel it came from.

use crate::image::Image;

const POLE: f64 = -0.267_949_192_431_122_7;

/// Whole-sample symmetric extension of index `k` into `0..n`.
#[inline]
fn mirror(k: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * n as isize - 2;
    let m = k.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// In-place conversion of samples to cubic B-spline coefficients.
pub(crate) fn prefilter(c: &mut [f64]) {
    let n = c.len();
    if n < 2 {
        return;
    }
    let z = POLE;
    for v in c.iter_mut() {
        *v *= 6.0;
    }
    c[0] = causal_init(c, z);
    for k in 1..n {
        c[k] += z * c[k - 1];
    }
    c[n - 1] = (z / (z * z - 1.0)) * (c[n - 1] + z * c[n - 2]);
    for k in (0..n - 1).rev() {
        c[k] = z * (c[k + 1] - c[k]);
    }
}

/// Exact mirror-boundary initial value of the causal recursion.
fn causal_init(c: &[f64], z: f64) -> f64 {
    let n = c.len();
    let mut zn = z;
    let iz = 1.0 / z;
    let mut z2n = z.powi(n as i32 - 1);
    let mut sum = c[0] + z2n * c[n - 1];
    z2n = z2n * z2n * iz;
    for &v in &c[1..n - 1] {
        sum += (zn + z2n) * v;
        zn *= z;
        z2n *= iz;
    }
    sum / (1.0 - zn * zn)
}

/// Cubic B-spline weights for taps `floor(x) − 1 ..= floor(x) + 2`.
#[inline]
fn weights(x: f64) -> (isize, [f64; 4]) {
    let base = x.floor();
    let t = x - base;
    let s = 1.0 - t;
    let w = [
        s * s * s / 6.0,
        2.0 / 3.0 - t * t + 0.5 * t * t * t,
        2.0 / 3.0 - s * s + 0.5 * s * s * s,
        t * t * t / 6.0,
    ];
    (base as isize - 1, w)
}

/// Evaluates the spline through `coeffs` at `len·factor` phase-centred
/// positions.
fn resample_line(coeffs: &[f64], factor: usize, out: &mut [f64]) {
    let n = coeffs.len();
    for (i, o) in out.iter_mut().enumerate() {
        let x = (i as f64 + 0.5) / factor as f64 - 0.5;
        let (k0, w) = weights(x);
        *o = (0..4).map(|j| w[j] * coeffs[mirror(k0 + j as isize, n)]).sum();
    }
}

/// Zooms by `factor` in both axes; values are clamped to `[0, 1]`.
pub fn cubic_spline_upsample(img: &Image, factor: usize) -> Image {
    assert!(factor >= 1, "zoom factor must be positive");
    let (w, h) = (img.width(), img.height());
    let (ow, oh) = (w * factor, h * factor);

    // horizontal pass: h × ow
    let mut rows = vec![0.0; h * ow];
    let mut line = vec![0.0; w];
    for r in 0..h {
        line.copy_from_slice(&img.pixels()[r * w..(r + 1) * w]);
        prefilter(&mut line);
        resample_line(&line, factor, &mut rows[r * ow..(r + 1) * ow]);
    }

    // vertical pass: oh × ow
    let mut out = vec![0.0; oh * ow];
    let mut col = vec![0.0; h];
    let mut col_out = vec![0.0; oh];
    for c in 0..ow {
        for r in 0..h {
            col[r] = rows[r * ow + c];
        }
        prefilter(&mut col);
        resample_line(&col, factor, &mut col_out);
        for (r, v) in col_out.iter().enumerate() {
            out[r * ow + c] = *v;
        }
    }
    Image::from_clamped(ow, oh, out).expect("dimensions are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::decimate;

    #[test]
    fn pole_value() {
        assert!((POLE - (3f64.sqrt() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn prefilter_interpolates() {
        // the spline through the coefficients passes through the samples
        let x = [0.1, 0.9, 0.3, 0.4, 0.8, 0.2, 0.55];
        let mut c = x;
        prefilter(&mut c);
        for i in 0..x.len() {
            let v = c[mirror(i as isize - 1, 7)] / 6.0 + c[i] * 2.0 / 3.0 + c[mirror(i as isize + 1, 7)] / 6.0;
            assert!((v - x[i]).abs() < 1e-12, "{i}: {v} vs {}", x[i]);
        }
    }

    #[test]
    fn mirror_indices() {
        let got: Vec<usize> = (-3..8).map(|k| mirror(k, 4)).collect();
        assert_eq!(got, vec![3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 1]);
        assert_eq!(mirror(5, 1), 0);
    }

    #[test]
    fn constant_stays_constant() {
        for (w, h) in [(1, 1), (1, 5), (7, 3), (16, 16)] {
            let up = cubic_spline_upsample(&Image::filled(w, h, 0.37), 2);
            assert_eq!((up.width(), up.height()), (2 * w, 2 * h));
            assert!(up.pixels().iter().all(|v| (v - 0.37).abs() < 1e-12));
        }
    }

    #[test]
    fn ramp_interior_is_linear() {
        let n = 64;
        let img = Image::from_fn(n, 1, |_, c| 0.1 + 0.01 * c as f64);
        let up = cubic_spline_upsample(&img, 2);
        for i in 40..2 * n - 40 {
            let x = (i as f64 - 0.5) / 2.0;
            let expected = 0.1 + 0.01 * x;
            assert!((up.get(0, i) - expected).abs() < 1e-9, "sample {i}");
        }
    }

    #[test]
    fn consistent_with_decimation_on_blobs() {
        let img = Image::from_fn(32, 32, |r, c| {
            let (y, x) = (r as f64, c as f64);
            0.2 + 0.5 * (-((y - 12.0).powi(2) + (x - 18.0).powi(2)) / 40.0).exp()
                + 0.25 * (-((y - 24.0).powi(2) + (x - 8.0).powi(2)) / 25.0).exp()
        });
        let back = decimate(&cubic_spline_upsample(&img, 2), 2).unwrap();
        let err = img
            .pixels()
            .iter()
            .zip(back.pixels())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.02, "max error {err}");
    }
}
