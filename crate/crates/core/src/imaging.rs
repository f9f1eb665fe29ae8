//! Image containers, decoding/encoding, bicubic resizing and color-space
//! conversion.
//!
//! All pixel data is kept as `f64` on the 8-bit scale (`[0, 255]`), stored
//! as one row-major plane per channel.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `H x W x C` floating-point raster stored as consecutive row-major planes.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl PlanarImage {
    /// A zero-filled image.
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Self::filled(height, width, channels, 0.0)
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        }
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {height}x{width}x{channels} image",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds an image from equally sized planes.
    pub fn from_planes(height: usize, width: usize, planes: Vec<Vec<f64>>) -> Result<Self> {
        let channels = planes.len();
        let mut data = Vec::with_capacity(height * width * channels);
        for plane in planes {
            if plane.len() != height * width {
                return Err(Error::DimensionMismatch(format!(
                    "plane of {} values for a {height}x{width} image",
                    plane.len()
                )));
            }
            data.extend(plane);
        }
        Self::from_vec(height, width, channels, data)
    }

    /// Builds a single-channel image from a closure over `(row, col)`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self {
            height,
            width,
            channels: 1,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        let n = self.pixel_count();
        &self.data[channel * n..(channel + 1) * n]
    }

    pub fn plane_mut(&mut self, channel: usize) -> &mut [f64] {
        let n = self.pixel_count();
        &mut self.data[channel * n..(channel + 1) * n]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[channel * self.pixel_count() + row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, channel: usize, value: f64) {
        let n = self.pixel_count();
        self.data[channel * n + row * self.width + col] = value;
    }

    /// Copies one channel out as a single-channel image.
    pub fn channel(&self, channel: usize) -> PlanarImage {
        PlanarImage {
            height: self.height,
            width: self.width,
            channels: 1,
            data: self.plane(channel).to_vec(),
        }
    }

    pub fn transpose(&self) -> PlanarImage {
        let mut out = PlanarImage::new(self.width, self.height, self.channels);
        for c in 0..self.channels {
            for y in 0..self.height {
                for x in 0..self.width {
                    out.set(x, y, c, self.get(y, x, c));
                }
            }
        }
        out
    }

    pub fn rotate180(&self) -> PlanarImage {
        let mut out = self.clone();
        let n = self.pixel_count();
        for c in 0..self.channels {
            out.data[c * n..(c + 1) * n].reverse();
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PlanarImage {
        PlanarImage {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Min-max rescales every value to `[0, 1]`; a constant image maps to zeros.
    pub fn normalized_unit(&self) -> PlanarImage {
        let (lo, hi) = self.min_max();
        if !(hi > lo) {
            return PlanarImage::new(self.height, self.width, self.channels);
        }
        let span = hi - lo;
        self.map(|v| (v - lo) / span)
    }
}

/// Non-overlapping `m x n` tiling of a resized image into `w x w` patches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchGrid {
    /// Patch rows.
    pub m: usize,
    /// Patch columns.
    pub n: usize,
    /// Patch side in pixels.
    pub w: usize,
}

impl PatchGrid {
    pub fn height(&self) -> usize {
        self.m * self.w
    }

    pub fn width(&self) -> usize {
        self.n * self.w
    }

    pub fn patch_count(&self) -> usize {
        self.m * self.n
    }

    pub fn transpose(&self) -> PatchGrid {
        PatchGrid {
            m: self.n,
            n: self.m,
            w: self.w,
        }
    }

    /// Pixel rectangle `(row0, col0, row1, col1)` (exclusive end) of a patch.
    pub fn rect(&self, row: usize, col: usize) -> (usize, usize, usize, usize) {
        (
            row * self.w,
            col * self.w,
            (row + 1) * self.w,
            (col + 1) * self.w,
        )
    }

    /// Patch index containing pixel `(y, x)`.
    pub fn patch_of(&self, y: usize, x: usize) -> (usize, usize) {
        (y / self.w, x / self.w)
    }
}

/// Chooses the patch grid for an input of `height x width` pixels.
///
/// The short side receives exactly `min_patches` patches; the long side gets
/// `round(min_patches * long / short)` (ties upward), never fewer than
/// `min_patches`.
pub fn plan_grid(height: usize, width: usize, w: usize, min_patches: usize) -> PatchGrid {
    let short = height.min(width).max(1);
    let long = height.max(width);
    // floor(x + 1/2) with x = min_patches * long / short, in integers
    let rounded = (2 * min_patches * long + short) / (2 * short);
    let long_count = rounded.max(min_patches);
    if height <= width {
        PatchGrid {
            m: min_patches,
            n: long_count,
            w,
        }
    } else {
        PatchGrid {
            m: long_count,
            n: min_patches,
            w,
        }
    }
}

/// Loads a PNG/JPEG/PGM/PPM file as a 3-channel image on the `[0, 255]` scale.
/// Grayscale inputs are replicated to all three channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<PlanarImage> {
    let path = path.as_ref();
    let dynamic = decode(path)?;
    let (width, height) = (dynamic.width() as usize, dynamic.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { height, width });
    }
    let n = width * height;
    let mut data = vec![0.0; 3 * n];
    match dynamic {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageRgb8(_)
        | DynamicImage::ImageRgba8(_) => {
            let rgb = dynamic.to_rgb8();
            for (i, px) in rgb.pixels().enumerate() {
                for c in 0..3 {
                    data[c * n + i] = f64::from(px[c]);
                }
            }
        }
        other => {
            let rgb = other.to_rgb32f();
            for (i, px) in rgb.pixels().enumerate() {
                for c in 0..3 {
                    data[c * n + i] = f64::from(px[c]) * 255.0;
                }
            }
        }
    }
    PlanarImage::from_vec(height, width, 3, data)
}

/// Loads a file as a single grayscale plane on the `[0, 255]` scale.
pub fn load_gray(path: impl AsRef<Path>) -> Result<PlanarImage> {
    let path = path.as_ref();
    let dynamic = decode(path)?;
    let (width, height) = (dynamic.width() as usize, dynamic.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { height, width });
    }
    let data: Vec<f64> = match dynamic {
        DynamicImage::ImageLuma8(g) => g.pixels().map(|p| f64::from(p[0])).collect(),
        other => other
            .to_luma32f()
            .pixels()
            .map(|p| f64::from(p[0]) * 255.0)
            .collect(),
    };
    PlanarImage::from_vec(height, width, 1, data)
}

/// `(height, width)` of an image file, read from its header.
pub fn decode_dims(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let (w, h) = image::image_dimensions(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok((h as usize, w as usize))
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Jpeg | ImageFormat::Pnm) => {}
        Some(other) => return Err(Error::UnsupportedFormat(format!("{other:?}"))),
        None => {
            return Err(Error::UnsupportedFormat(format!(
                "unrecognised file {}",
                path.display()
            )))
        }
    }
    reader.decode().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Quantizes a `[0, 1]` map to 8 bits (clamped, round half up).
pub fn to_gray8(map: &PlanarImage) -> Result<GrayImage> {
    if map.channels() != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            actual: map.channels(),
        });
    }
    let bytes: Vec<u8> = map
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8)
        .collect();
    GrayImage::from_raw(map.width() as u32, map.height() as u32, bytes)
        .ok_or_else(|| Error::DimensionMismatch("gray buffer size".into()))
}

/// Writes a `[0, 1]` map as an 8-bit PNG.
pub fn save_png(map: &PlanarImage, path: impl AsRef<Path>) -> Result<()> {
    save_gray(map, path.as_ref(), ImageFormat::Png)
}

/// Writes a `[0, 1]` map as an 8-bit binary PGM.
pub fn save_pgm(map: &PlanarImage, path: impl AsRef<Path>) -> Result<()> {
    save_gray(map, path.as_ref(), ImageFormat::Pnm)
}

fn save_gray(map: &PlanarImage, path: &Path, format: ImageFormat) -> Result<()> {
    to_gray8(map)?
        .save_with_format(path, format)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Decode {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
}

const CUBIC_A: f64 = -0.5;

/// Catmull-Rom cubic convolution kernel.
pub fn cubic_kernel(t: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        ((CUBIC_A + 2.0) * t - (CUBIC_A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((CUBIC_A * t - 5.0 * CUBIC_A) * t + 8.0 * CUBIC_A) * t - 4.0 * CUBIC_A
    } else {
        0.0
    }
}

/// Taps for one output sample along one axis.
struct Taps {
    index: Vec<usize>,
    weight: Vec<f64>,
    /// Position of the largest weight; used as the subtraction anchor.
    anchor: usize,
}

fn axis_taps(input: usize, output: usize) -> Vec<Taps> {
    let scale = output as f64 / input as f64;
    // widen the kernel when shrinking so it acts as a low-pass filter
    let stretch = if scale < 1.0 { scale } else { 1.0 };
    let support = 2.0 / stretch;
    (0..output)
        .map(|o| {
            let center = (o as f64 + 0.5) / scale - 0.5;
            let lo = (center - support).floor() as isize;
            let hi = (center + support).ceil() as isize;
            let mut index = Vec::new();
            let mut weight = Vec::new();
            for i in lo..=hi {
                let wgt = cubic_kernel((center - i as f64) * stretch);
                if wgt != 0.0 {
                    index.push(i.clamp(0, input as isize - 1) as usize);
                    weight.push(wgt);
                }
            }
            let total: f64 = weight.iter().sum();
            weight.iter_mut().for_each(|w| *w /= total);
            let anchor = weight
                .iter()
                .enumerate()
                .fold(0, |best, (k, &w)| if w > weight[best] { k } else { best });
            Taps {
                index,
                weight,
                anchor,
            }
        })
        .collect()
}

#[inline]
fn apply_taps(taps: &Taps, sample: impl Fn(usize) -> f64) -> f64 {
    // anchored form keeps constant signals exact
    let base = sample(taps.index[taps.anchor]);
    let mut acc = 0.0;
    for (&i, &w) in taps.index.iter().zip(&taps.weight) {
        acc += w * (sample(i) - base);
    }
    base + acc
}

/// Separable bicubic (Catmull-Rom, `a = -0.5`) resize with clamp-to-edge
/// sampling. When shrinking, the kernel is stretched by the inverse scale
/// factor. An axis whose size is unchanged is copied verbatim.
pub fn resize_bicubic(img: &PlanarImage, out_h: usize, out_w: usize) -> PlanarImage {
    let (in_h, in_w) = (img.height(), img.width());
    let channels = img.channels();

    let horizontal = if out_w == in_w {
        img.clone()
    } else {
        let taps = axis_taps(in_w, out_w);
        let mut tmp = PlanarImage::new(in_h, out_w, channels);
        for c in 0..channels {
            let src = img.plane(c);
            let dst = tmp.plane_mut(c);
            for y in 0..in_h {
                let row = &src[y * in_w..(y + 1) * in_w];
                for (x, t) in taps.iter().enumerate() {
                    dst[y * out_w + x] = apply_taps(t, |i| row[i]);
                }
            }
        }
        tmp
    };

    if out_h == in_h {
        return horizontal;
    }
    let taps = axis_taps(in_h, out_h);
    let mut out = PlanarImage::new(out_h, out_w, channels);
    for c in 0..channels {
        let src = horizontal.plane(c);
        let dst = out.plane_mut(c);
        for (y, t) in taps.iter().enumerate() {
            for x in 0..out_w {
                dst[y * out_w + x] = apply_taps(t, |i| src[i * out_w + x]);
            }
        }
    }
    out
}

/// Color spaces the saliency model can operate in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    Yiq,
    YCbCr,
    Rgb,
}

impl ColorSpace {
    pub const ALL: [ColorSpace; 3] = [ColorSpace::Yiq, ColorSpace::YCbCr, ColorSpace::Rgb];

    pub fn name(&self) -> &'static str {
        match self {
            ColorSpace::Yiq => "yiq",
            ColorSpace::YCbCr => "ycbcr",
            ColorSpace::Rgb => "rgb",
        }
    }
}

impl std::str::FromStr for ColorSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "yiq" => Ok(ColorSpace::Yiq),
            "ycbcr" => Ok(ColorSpace::YCbCr),
            "rgb" => Ok(ColorSpace::Rgb),
            other => Err(Error::InvalidConfig(format!("unknown color space `{other}`"))),
        }
    }
}

/// NTSC RGB -> YIQ.
pub const YIQ_MATRIX: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [0.596, -0.274, -0.322],
    [0.211, -0.523, 0.312],
];

/// BT.601 full-range RGB -> YCbCr (before the chroma offset).
pub const YCBCR_MATRIX: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [-0.168_736, -0.331_264, 0.5],
    [0.5, -0.418_688, -0.081_312],
];

pub const YCBCR_OFFSET: [f64; 3] = [0.0, 128.0, 128.0];

/// Converts a 3-channel RGB image into the requested space. RGB is returned
/// unchanged.
pub fn to_color_space(img: &PlanarImage, space: ColorSpace) -> Result<PlanarImage> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            actual: img.channels(),
        });
    }
    let (matrix, offset) = match space {
        ColorSpace::Rgb => return Ok(img.clone()),
        ColorSpace::Yiq => (&YIQ_MATRIX, [0.0; 3]),
        ColorSpace::YCbCr => (&YCBCR_MATRIX, YCBCR_OFFSET),
    };
    let n = img.pixel_count();
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let mut out = PlanarImage::new(img.height(), img.width(), 3);
    for (c, row) in matrix.iter().enumerate() {
        let dst = out.plane_mut(c);
        if (row[0] + row[1] + row[2]).abs() < 1e-12 {
            // chroma rows: a(R-G) + (a+b)(G-B), exactly zero on gray pixels
            let (a, ab) = (row[0], row[0] + row[1]);
            for i in 0..n {
                dst[i] = offset[c] + a * (r[i] - g[i]) + ab * (g[i] - b[i]);
            }
        } else {
            for i in 0..n {
                dst[i] = offset[c] + row[0] * r[i] + row[1] * g[i] + row[2] * b[i];
            }
        }
    }
    Ok(out)
}

/// Edge handling for [`gaussian_blur`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Samples outside the image are zero.
    Zero,
    /// Half-sample symmetric reflection (`... 1 0 | 0 1 2 ...`).
    Reflect,
}

/// Maps an out-of-range index into `[0, n)` by half-sample symmetric reflection.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Normalized 1-D Gaussian taps with radius `ceil(truncate * sigma)`.
pub fn gaussian_taps(sigma: f64, truncate: f64) -> Vec<f64> {
    let radius = (truncate * sigma).ceil().max(0.0) as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    taps
}

/// Separable isotropic Gaussian blur of every channel, truncated at
/// `truncate * sigma`.
pub fn gaussian_blur(img: &PlanarImage, sigma: f64, truncate: f64, boundary: Boundary) -> PlanarImage {
    let taps = gaussian_taps(sigma, truncate);
    let radius = (taps.len() / 2) as isize;
    let (h, w) = (img.height(), img.width());
    let sample = |line: &[f64], i: isize| -> f64 {
        let n = line.len();
        if i >= 0 && (i as usize) < n {
            line[i as usize]
        } else {
            match boundary {
                Boundary::Zero => 0.0,
                Boundary::Reflect => line[reflect_index(i, n)],
            }
        }
    };

    let mut out = PlanarImage::new(h, w, img.channels());
    let mut column = vec![0.0; h];
    let mut tmp = vec![0.0; h * w];
    for c in 0..img.channels() {
        let src = img.plane(c);
        for y in 0..h {
            let line = &src[y * w..(y + 1) * w];
            for x in 0..w {
                let mut acc = 0.0;
                for (k, &t) in taps.iter().enumerate() {
                    acc += t * sample(line, x as isize + k as isize - radius);
                }
                tmp[y * w + x] = acc;
            }
        }
        let dst = out.plane_mut(c);
        for x in 0..w {
            for y in 0..h {
                column[y] = tmp[y * w + x];
            }
            for y in 0..h {
                let mut acc = 0.0;
                for (k, &t) in taps.iter().enumerate() {
                    acc += t * sample(&column, y as isize + k as isize - radius);
                }
                dst[y * w + x] = acc;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_grid_examples() {
        assert_eq!(plan_grid(480, 640, 24, 11), PatchGrid { m: 11, n: 15, w: 24 });
        assert_eq!(plan_grid(512, 512, 24, 11), PatchGrid { m: 11, n: 11, w: 24 });
        assert_eq!(plan_grid(640, 480, 24, 11), PatchGrid { m: 15, n: 11, w: 24 });
    }

    #[test]
    fn plan_grid_rounds_half_up() {
        // 2 * 5 / 4 = 2.5 -> 3
        assert_eq!(plan_grid(4, 5, 2, 2), PatchGrid { m: 2, n: 3, w: 2 });
        // Toronto stimuli are 681x511
        assert_eq!(plan_grid(511, 681, 24, 11), PatchGrid { m: 11, n: 15, w: 24 });
    }

    #[test]
    fn cubic_kernel_interpolates() {
        assert_eq!(cubic_kernel(0.0), 1.0);
        assert_eq!(cubic_kernel(1.0), 0.0);
        assert_eq!(cubic_kernel(2.0), 0.0);
        let total: f64 = [-1.75, -0.75, 0.25, 1.25].iter().map(|&t| cubic_kernel(t)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resize_identity_is_exact() {
        let img = PlanarImage::from_fn(5, 7, |y, x| (y * 7 + x) as f64 * 1.3);
        assert_eq!(resize_bicubic(&img, 5, 7), img);
    }

    #[test]
    fn resize_keeps_constants() {
        let img = PlanarImage::filled(9, 13, 3, 77.25);
        for (h, w) in [(4, 5), (20, 31), (9, 2), (1, 1)] {
            let out = resize_bicubic(&img, h, w);
            assert!(out.data().iter().all(|&v| v == 77.25));
        }
    }

    #[test]
    fn gray_has_no_chroma() {
        let img = PlanarImage::filled(2, 2, 3, 200.0);
        let yiq = to_color_space(&img, ColorSpace::Yiq).unwrap();
        assert!((yiq.get(0, 0, 0) - 200.0).abs() < 1e-9);
        assert!(yiq.get(1, 1, 1).abs() < 1e-9 * 200.0);
        assert!(yiq.get(1, 1, 2).abs() < 1e-9 * 200.0);
    }

    #[test]
    fn pure_red_in_yiq() {
        let img = PlanarImage::from_planes(1, 1, vec![vec![255.0], vec![0.0], vec![0.0]]).unwrap();
        let yiq = to_color_space(&img, ColorSpace::Yiq).unwrap();
        assert!((yiq.get(0, 0, 0) - 76.245).abs() < 1e-9);
        assert!((yiq.get(0, 0, 1) - 151.98).abs() < 1e-9);
        assert!((yiq.get(0, 0, 2) - 53.805).abs() < 1e-9);
    }

    #[test]
    fn rgb_is_passthrough() {
        let img = PlanarImage::from_vec(1, 2, 3, vec![1.5, -2.0, 3.25, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(to_color_space(&img, ColorSpace::Rgb).unwrap(), img);
    }

    #[test]
    fn color_space_rejects_gray() {
        let img = PlanarImage::new(2, 2, 1);
        assert!(matches!(
            to_color_space(&img, ColorSpace::Yiq),
            Err(Error::ChannelMismatch { expected: 3, actual: 1 })
        ));
    }

    #[test]
    fn reflect_index_wraps() {
        let got: Vec<usize> = (-4..7).map(|i| reflect_index(i, 3)).collect();
        assert_eq!(got, vec![2, 2, 1, 0, 0, 1, 2, 2, 1, 0, 0]);
    }

    #[test]
    fn export_rounds_half_up() {
        let map = PlanarImage::from_vec(1, 4, 1, vec![0.0, 0.5, 1.0, 1.7]).unwrap();
        let g = to_gray8(&map).unwrap();
        assert_eq!(g.as_raw(), &vec![0, 128, 255, 255]);
    }

    #[test]
    fn gaussian_blur_zero_boundary_preserves_interior_mass() {
        let mut img = PlanarImage::new(31, 31, 1);
        img.set(15, 15, 0, 1.0);
        let out = gaussian_blur(&img, 2.0, 4.0, Boundary::Zero);
        let total: f64 = out.data().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(out.get(15, 14, 0), out.get(15, 16, 0));
    }
}
