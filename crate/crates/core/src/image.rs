//! Grayscale images, square patches and contrast normalization.
//!
//! Intensities are `f64` in `[0, 1]`; quantization only happens at the PGM
//! boundary (see [`crate::pgm`]). Patches carry unconstrained values since
//! they also hold contrast-normalized data.

use crate::error::{Error, Result};

/// Additive floor of the patch energy, keeps normalization defined on flat black patches.
pub const ENERGY_OFFSET: f64 = 0.01;

/// Single-channel image, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

/// Width/height pair recorded before padding so results can be cropped back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

impl Image {
    /// Builds an image, rejecting wrong lengths and intensities outside `[0, 1]`.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        if let Some((i, v)) = pixels
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::Precondition(format!(
                "pixel {i} has intensity {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image, clamping every value into `[0, 1]` (NaN maps to 0).
    pub fn from_clamped(width: usize, height: usize, mut pixels: Vec<f64>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        for v in &mut pixels {
            *v = clamp_unit(*v);
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// `f(row, col)`, clamped.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(clamp_unit(f(r, c)));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> Dims {
        Dims {
            width: self.width,
            height: self.height,
        }
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Copies the `size`×`size` block whose top-left corner is `(row, col)`.
    pub fn patch_at(&self, row: usize, col: usize, size: usize) -> Patch {
        assert!(row + size <= self.height && col + size <= self.width);
        let mut values = Vec::with_capacity(size * size);
        for r in row..row + size {
            let start = r * self.width + col;
            values.extend_from_slice(&self.pixels[start..start + size]);
        }
        Patch {
            size,
            origin: (row, col),
            values,
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Shape(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    if width * height != len {
        return Err(Error::Shape(format!(
            "{width}x{height} image needs {} pixels, got {len}",
            width * height
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Square block of values with its position in the source image.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    size: usize,
    origin: (usize, usize),
    values: Vec<f64>,
}

impl Patch {
    pub fn new(size: usize, origin: (usize, usize), values: Vec<f64>) -> Result<Self> {
        if size == 0 || values.len() != size * size {
            return Err(Error::Shape(format!(
                "patch of side {size} needs {} values, got {}",
                size * size,
                values.len()
            )));
        }
        Ok(Self {
            size,
            origin,
            values,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `(row, col)` of the top-left pixel in the source image.
    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size + col]
    }

    pub fn scaled(&self, factor: f64) -> Patch {
        Patch {
            size: self.size,
            origin: self.origin,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn divided(&self, divisor: f64) -> Patch {
        Patch {
            size: self.size,
            origin: self.origin,
            values: self.values.iter().map(|v| v / divisor).collect(),
        }
    }

    pub fn transposed(&self) -> Patch {
        let n = self.size;
        let mut values = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                values[c * n + r] = self.values[r * n + c];
            }
        }
        Patch {
            size: n,
            origin: (self.origin.1, self.origin.0),
            values,
        }
    }
}

/// Non-overlapping raster tiling of an image.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchGrid {
    pub rows: usize,
    pub cols: usize,
    pub patch_size: usize,
    pub patches: Vec<Patch>,
}

impl PatchGrid {
    pub fn get(&self, row: usize, col: usize) -> &Patch {
        &self.patches[row * self.cols + col]
    }
}

/// Edge-replicates `img` up to the next multiple of `n` in both axes.
pub fn pad_to_multiple(img: &Image, n: usize) -> (Image, Dims) {
    assert!(n >= 1, "padding multiple must be at least 1");
    let dims = img.dims();
    let width = dims.width.div_ceil(n) * n;
    let height = dims.height.div_ceil(n) * n;
    if width == dims.width && height == dims.height {
        return (img.clone(), dims);
    }
    let padded = Image {
        width,
        height,
        pixels: (0..height)
            .flat_map(|r| {
                let sr = r.min(dims.height - 1);
                (0..width).map(move |c| (sr, c.min(dims.width - 1)))
            })
            .map(|(r, c)| img.get(r, c))
            .collect(),
    };
    (padded, dims)
}

/// Top-left `dims` region of `img`.
pub fn crop(img: &Image, dims: Dims) -> Result<Image> {
    if dims.width == 0 || dims.height == 0 || dims.width > img.width || dims.height > img.height {
        return Err(Error::Shape(format!(
            "cannot crop {}x{} image to {}x{}",
            img.width, img.height, dims.width, dims.height
        )));
    }
    let mut pixels = Vec::with_capacity(dims.width * dims.height);
    for r in 0..dims.height {
        let start = r * img.width;
        pixels.extend_from_slice(&img.pixels[start..start + dims.width]);
    }
    Ok(Image {
        width: dims.width,
        height: dims.height,
        pixels,
    })
}

/// Tiles `img` into `n`×`n` patches in raster order.
pub fn extract_patches(img: &Image, n: usize) -> Result<PatchGrid> {
    if n == 0 || !img.width.is_multiple_of(n) || !img.height.is_multiple_of(n) {
        return Err(Error::Precondition(format!(
            "{}x{} image is not divisible into {n}x{n} patches",
            img.width, img.height
        )));
    }
    let rows = img.height / n;
    let cols = img.width / n;
    let patches = (0..rows)
        .flat_map(|pr| (0..cols).map(move |pc| (pr, pc)))
        .map(|(pr, pc)| img.patch_at(pr * n, pc * n, n))
        .collect();
    Ok(PatchGrid {
        rows,
        cols,
        patch_size: n,
        patches,
    })
}

/// Inverse of [`extract_patches`].
pub fn stitch_patches(grid: &PatchGrid) -> Result<Image> {
    let n = grid.patch_size;
    if grid.patches.len() != grid.rows * grid.cols || grid.rows == 0 || grid.cols == 0 {
        return Err(Error::Shape(format!(
            "patch grid {}x{} holds {} patches",
            grid.rows,
            grid.cols,
            grid.patches.len()
        )));
    }
    let width = grid.cols * n;
    let height = grid.rows * n;
    let mut pixels = vec![0.0; width * height];
    for (idx, patch) in grid.patches.iter().enumerate() {
        if patch.size != n {
            return Err(Error::Shape(format!(
                "patch {idx} has side {}, grid expects {n}",
                patch.size
            )));
        }
        let (r0, c0) = ((idx / grid.cols) * n, (idx % grid.cols) * n);
        for r in 0..n {
            let dst = (r0 + r) * width + c0;
            pixels[dst..dst + n].copy_from_slice(&patch.values[r * n..(r + 1) * n]);
        }
    }
    Image::new(width, height, pixels)
}

/// `0.01 + Σ|y_i|` over the patch.
pub fn patch_energy(p: &Patch) -> f64 {
    energy_with_offset(p.values(), ENERGY_OFFSET)
}

pub fn energy_with_offset(values: &[f64], offset: f64) -> f64 {
    offset + values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Divides both patches by the energy of the low-resolution one.
pub fn normalize_pair(lr: &Patch, hr: &Patch) -> (Patch, Patch, f64) {
    let energy = patch_energy(lr);
    (lr.divided(energy), hr.divided(energy), energy)
}

/// Undoes [`normalize_pair`].
pub fn denormalize(p: &Patch, energy: f64) -> Patch {
    p.scaled(energy)
}
