//! Procedural demo corpus.
//!
//! Every image is a continuous scene rendered with 4×4 supersampling, so
//! edges are antialiased at full resolution and only decimation aliases
//! them. Training and test images are disjoint scenes built from the same
//! families: gradients, checkerboards, oriented stripes, Siemens stars and
//! cluttered shape scenes, with stripe angles and periods shared between
//! the halves.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::Image;

/// Generated image with a stable file-name stem.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedImage {
    pub name: String,
    pub image: Image,
}

const SUPERSAMPLE: usize = 4;

/// Renders `f(x, y)` (column, row in pixel units) at pixel centres averaged
/// over a supersampling grid.
pub fn render(size: usize, f: impl Fn(f64, f64) -> f64) -> Image {
    let s = SUPERSAMPLE as f64;
    Image::from_fn(size, size, |r, c| {
        let mut acc = 0.0;
        for i in 0..SUPERSAMPLE {
            for j in 0..SUPERSAMPLE {
                let y = r as f64 + (i as f64 + 0.5) / s;
                let x = c as f64 + (j as f64 + 0.5) / s;
                acc += f(x, y);
            }
        }
        acc / (s * s)
    })
}

pub fn linear_gradient(size: usize, angle: f64, lo: f64, hi: f64) -> Image {
    let (ca, sa) = (angle.cos(), angle.sin());
    let half = size as f64 / 2.0;
    let reach = half * (ca.abs() + sa.abs());
    render(size, |x, y| {
        let t = ((x - half) * ca + (y - half) * sa) / reach;
        lo + (hi - lo) * 0.5 * (t + 1.0)
    })
}

pub fn radial_gradient(size: usize, cx: f64, cy: f64, lo: f64, hi: f64) -> Image {
    let reach = size as f64 * SQRT_2;
    render(size, |x, y| lo + (hi - lo) * ((x - cx).hypot(y - cy) / reach).min(1.0))
}

/// Checkerboard of square `period`, rotated by `angle`.
pub fn checkerboard(size: usize, period: f64, angle: f64, lo: f64, hi: f64) -> Image {
    let (ca, sa) = (angle.cos(), angle.sin());
    render(size, |x, y| {
        let u = (x * ca + y * sa) / period;
        let v = (-x * sa + y * ca) / period;
        if (u.floor() as i64 + v.floor() as i64).rem_euclid(2) == 0 {
            lo
        } else {
            hi
        }
    })
}

/// Hard-edged stripes whose normal points along `angle`.
pub fn stripes(size: usize, period: f64, angle: f64, lo: f64, hi: f64) -> Image {
    let (ca, sa) = (angle.cos(), angle.sin());
    render(size, |x, y| {
        let t = ((x * ca + y * sa) / period).rem_euclid(1.0);
        if t < 0.5 {
            lo
        } else {
            hi
        }
    })
}

/// Siemens star with `spokes` dark/bright sector pairs.
pub fn siemens_star(size: usize, spokes: usize, cx: f64, cy: f64, phase: f64) -> Image {
    render(size, |x, y| {
        let a = (y - cy).atan2(x - cx) + phase;
        if (a * spokes as f64 / PI).rem_euclid(2.0) < 1.0 {
            0.1
        } else {
            0.9
        }
    })
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64, cos: f64, sin: f64 },
    Rect { cx: f64, cy: f64, hw: f64, hh: f64, cos: f64, sin: f64 },
    Triangle { p: [(f64, f64); 3] },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Ellipse { cx, cy, rx, ry, cos, sin } => {
                let (dx, dy) = (x - cx, y - cy);
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                (u / rx).powi(2) + (v / ry).powi(2) <= 1.0
            }
            Shape::Rect { cx, cy, hw, hh, cos, sin } => {
                let (dx, dy) = (x - cx, y - cy);
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                u.abs() <= hw && v.abs() <= hh
            }
            Shape::Triangle { p } => {
                let side = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
                let s = [side(p[0], p[1]), side(p[1], p[2]), side(p[2], p[0])];
                s.iter().all(|&v| v >= 0.0) || s.iter().all(|&v| v <= 0.0)
            }
        }
    }
}

/// Cluttered scene: shaded background, overlapping flat and shaded shapes
/// and a faint oriented texture, all drawn from `seed`.
pub fn shape_scene(size: usize, seed: u64, count: usize) -> Image {
    scene(size, seed, count, 0.0)
}

/// Like [`shape_scene`], but each shape is filled with oriented stripes with
/// probability `striped`, the way draped striped fabric looks.
pub fn fabric_scene(size: usize, seed: u64, count: usize, striped: f64) -> Image {
    scene(size, seed, count, striped)
}

#[derive(Clone, Copy, Debug)]
struct Fill {
    base: f64,
    slope: f64,
    slope_angle: f64,
    /// `(cos, sin, period, amplitude)` of a square-wave stripe fill.
    stripes: Option<(f64, f64, f64, f64)>,
}

fn scene(size: usize, seed: u64, count: usize, striped: f64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let bg_angle = rng.random_range(0.0..2.0 * PI);
    let (bg_lo, bg_hi) = (rng.random_range(0.1..0.4), rng.random_range(0.5..0.8));
    let tex_angle = rng.random_range(0.0..PI);
    let tex_period = rng.random_range(3.0..9.0);
    let tex_amp = rng.random_range(0.0..0.06);
    let mut shapes = Vec::with_capacity(count);
    for _ in 0..count {
        let theta: f64 = rng.random_range(0.0..PI);
        let shape = match rng.random_range(0..3) {
            0 => Shape::Ellipse {
                cx: rng.random_range(0.0..s),
                cy: rng.random_range(0.0..s),
                rx: rng.random_range(s / 20.0..s / 4.0),
                ry: rng.random_range(s / 20.0..s / 4.0),
                cos: theta.cos(),
                sin: theta.sin(),
            },
            1 => Shape::Rect {
                cx: rng.random_range(0.0..s),
                cy: rng.random_range(0.0..s),
                hw: rng.random_range(s / 20.0..s / 4.0),
                hh: rng.random_range(s / 20.0..s / 4.0),
                cos: theta.cos(),
                sin: theta.sin(),
            },
            _ => {
                let (cx, cy) = (rng.random_range(0.0..s), rng.random_range(0.0..s));
                let r = rng.random_range(s / 10.0..s / 3.0);
                let mut p = [(0.0, 0.0); 3];
                for (k, v) in p.iter_mut().enumerate() {
                    let a = theta + k as f64 * 2.0 * PI / 3.0 + rng.random_range(-0.5..0.5);
                    *v = (cx + r * a.cos(), cy + r * a.sin());
                }
                Shape::Triangle { p }
            }
        };
        let base = rng.random_range(0.05..0.95);
        let slope = rng.random_range(-0.004..0.004);
        let slope_angle = rng.random_range(0.0..2.0 * PI);
        let stripes = if striped > 0.0 && rng.random_bool(striped) {
            let a: f64 = rng.random_range(0.0..PI);
            Some((a.cos(), a.sin(), rng.random_range(3.0..8.0), rng.random_range(0.15..0.4)))
        } else {
            None
        };
        shapes.push((
            shape,
            Fill {
                base,
                slope,
                slope_angle,
                stripes,
            },
        ));
    }
    let (bc, bs) = (bg_angle.cos(), bg_angle.sin());
    let (tc, ts) = (tex_angle.cos(), tex_angle.sin());
    render(size, |x, y| {
        let t = ((x - s / 2.0) * bc + (y - s / 2.0) * bs) / s + 0.5;
        let mut v = bg_lo + (bg_hi - bg_lo) * t;
        for (shape, fill) in &shapes {
            if shape.contains(x, y) {
                let (dx, dy) = (x - s / 2.0, y - s / 2.0);
                v = fill.base + fill.slope * (dx * fill.slope_angle.cos() + dy * fill.slope_angle.sin());
                if let Some((c, sn, period, amp)) = fill.stripes {
                    let t = ((dx * c + dy * sn) / period).rem_euclid(1.0);
                    v += if t < 0.5 { -amp } else { amp };
                }
            }
        }
        v + tex_amp * (2.0 * PI * (x * tc + y * ts) / tex_period).sin()
    })
}

/// Concentric rings whose radial frequency grows outwards.
pub fn rings(size: usize, cx: f64, cy: f64, k: f64) -> Image {
    render(size, |x, y| {
        let r2 = (x - cx).powi(2) + (y - cy).powi(2);
        if (k * r2).sin() >= 0.0 {
            0.85
        } else {
            0.15
        }
    })
}

fn named(name: &str, image: Image) -> NamedImage {
    NamedImage {
        name: name.to_string(),
        image,
    }
}

/// Side of the bundled training images.
pub const TRAIN_SIZE: usize = 256;
/// Side of the bundled test images.
pub const TEST_SIZE: usize = 128;

/// Training half of the demo corpus: twelve `size`×`size` images.
pub fn training_corpus(size: usize) -> Vec<NamedImage> {
    let s = size as f64;
    let deg = PI / 180.0;
    vec![
        named("train-gradient", linear_gradient(size, 0.6, 0.1, 0.9)),
        named("train-checker", checkerboard(size, 8.0, PI / 7.0, 0.15, 0.85)),
        named("train-stripes-45-fine", stripes(size, 2.8 * SQRT_2, 45.0 * deg, 0.1, 0.9)),
        named("train-stripes-45-coarse", stripes(size, 3.3 * SQRT_2, 45.0 * deg, 0.2, 0.8)),
        named("train-stripes-135-fine", stripes(size, 3.0 * SQRT_2, 135.0 * deg, 0.15, 0.85)),
        named("train-stripes-135-coarse", stripes(size, 3.6 * SQRT_2, 135.0 * deg, 0.1, 0.9)),
        named("train-stripes-30", stripes(size, 3.2, 30.0 * deg, 0.1, 0.9)),
        named("train-stripes-60", stripes(size, 4.5, 60.0 * deg, 0.2, 0.8)),
        named("train-star-24", siemens_star(size, 24, 0.45 * s, 0.55 * s, 0.1)),
        named("train-star-40", siemens_star(size, 40, 0.55 * s, 0.45 * s, 0.2)),
        named("train-scene-a", shape_scene(size, 11, 18)),
        named("train-scene-b", shape_scene(size, 12, 30)),
    ]
}

/// Test half: scenes disjoint from [`training_corpus`], led by a
/// 45° stripe image whose period is close to the decimated Nyquist limit.
pub fn test_corpus(size: usize) -> Vec<NamedImage> {
    let s = size as f64;
    let deg = PI / 180.0;
    vec![
        named("test-stripes-aliased", stripes(size, 3.0 * SQRT_2, 45.0 * deg, 0.15, 0.85)),
        named("test-stripes-135", stripes(size, 3.5 * SQRT_2, 135.0 * deg, 0.2, 0.8)),
        named("test-star-32", siemens_star(size, 32, 0.5 * s, 0.5 * s, 0.0)),
        named("test-scene", shape_scene(size, 21, 24)),
    ]
}

/// Five photographic-style images for self-training checks.
pub fn natural_images(size: usize) -> Vec<NamedImage> {
    let s = size as f64;
    vec![
        named("natural-scene-1", shape_scene(size, 101, 20)),
        named("natural-scene-2", shape_scene(size, 102, 40)),
        named("natural-fabric", fabric_scene(size, 103, 30, 0.6)),
        named("natural-star", siemens_star(size, 28, 0.4 * s, 0.6 * s, 0.3)),
        named("natural-rings", rings(size, 0.6 * s, 0.4 * s, 0.003)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        assert_eq!(shape_scene(32, 5, 10), shape_scene(32, 5, 10));
        assert_ne!(shape_scene(32, 5, 10), shape_scene(32, 6, 10));
        for img in training_corpus(32).into_iter().chain(test_corpus(32)) {
            assert_eq!((img.image.width(), img.image.height()), (32, 32));
            assert!(img.image.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn names_are_disjoint() {
        let train: Vec<_> = training_corpus(16).into_iter().map(|n| n.name).collect();
        for t in test_corpus(16) {
            assert!(!train.contains(&t.name));
        }
        assert!(train.len() >= 10);
    }

    #[test]
    fn stripes_are_hard_edged() {
        let img = stripes(16, 4.0, 0.0, 0.0, 1.0);
        assert_eq!(img.get(0, 0), 0.0);
        assert_eq!(img.get(0, 2), 1.0);
    }
}
