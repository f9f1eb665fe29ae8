//! Structural-dissimilarity saliency.
//!
//! Every patch `x` of the grid is compared point-by-point with the whole
//! image through a duplication map that tiles `x` across the grid. The
//! per-channel dissimilarities are combined with a root-sum, weighted by a
//! Gaussian of the patch-index distance, summed, and raised to `theta`.

mod baseline;

pub use baseline::{mmlm_normalize, normalization_baseline, zero_one_normalize};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureKind, FeatureStack};
use crate::imaging::{plan_grid, resize_bicubic, to_color_space, ColorSpace, PatchGrid, PlanarImage};

/// Point-wise dissimilarity used between a feature map and its duplication map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Correlation-deduced relative difference `(f-r)^2 / (f^2+r^2+c)`.
    Relative,
    /// Squared absolute difference `(f-r)^2`.
    Absolute,
}

/// Per-feature normalization operator of the Itti-style baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    ZeroOne,
    Mmlm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "norm")]
pub enum Variant {
    /// The full model.
    Sds,
    /// Dissimilarity forced to one: only the spatial weighting remains.
    CenterOnly,
    /// `blur(sum_i N(LC_i))` in YIQ, no patches, no exponent.
    NormBaseline(Normalization),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Sds => "sds",
            Variant::CenterOnly => "center-only",
            Variant::NormBaseline(Normalization::ZeroOne) => "norm-zero-one",
            Variant::NormBaseline(Normalization::Mmlm) => "norm-mmlm",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sds" => Ok(Variant::Sds),
            "center-only" | "center_only" => Ok(Variant::CenterOnly),
            "norm-zero-one" | "zero-one" | "norm-01" => {
                Ok(Variant::NormBaseline(Normalization::ZeroOne))
            }
            "norm-mmlm" | "mmlm" => Ok(Variant::NormBaseline(Normalization::Mmlm)),
            other => Err(Error::InvalidConfig(format!("unknown variant `{other}`"))),
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relative" => Ok(Measure::Relative),
            "absolute" => Ok(Measure::Absolute),
            other => Err(Error::InvalidConfig(format!("unknown measure `{other}`"))),
        }
    }
}

/// All knobs of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdsConfig {
    /// Patch side in pixels.
    pub w: usize,
    /// Patch count along the short side.
    pub min_patches: usize,
    /// Normalization constant of the relative measure.
    pub c: f64,
    /// Spatial scale, in squared patch-index units.
    pub sigma2: f64,
    pub theta: f64,
    pub feature: FeatureKind,
    pub space: ColorSpace,
    pub measure: Measure,
    pub variant: Variant,
}

impl Default for SdsConfig {
    fn default() -> Self {
        Self {
            w: 24,
            min_patches: 11,
            c: 20.0,
            sigma2: 3.0,
            theta: 8.0,
            feature: FeatureKind::Gm,
            space: ColorSpace::Yiq,
            measure: Measure::Relative,
            variant: Variant::Sds,
        }
    }
}

impl SdsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return bad(format!("c must be >= 0, got {}", self.c));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return bad(format!("sigma2 must be > 0, got {}", self.sigma2));
        }
        if !(self.theta >= 1.0) || !self.theta.is_finite() {
            return bad(format!("theta must be >= 1, got {}", self.theta));
        }
        if self.w < 2 {
            return bad(format!("w must be >= 2, got {}", self.w));
        }
        if self.min_patches < 2 {
            return bad(format!("min_patches must be >= 2, got {}", self.min_patches));
        }
        Ok(())
    }
}

/// `(f - r)^2 / (f^2 + r^2 + c)`; defined as 0 when the denominator vanishes.
#[inline]
pub fn dissim_relative(f: f64, r: f64, c: f64) -> f64 {
    let den = f * f + r * r + c;
    if den == 0.0 {
        0.0
    } else {
        let d = f - r;
        d * d / den
    }
}

#[inline]
pub fn dissim_absolute(f: f64, r: f64) -> f64 {
    let d = f - r;
    d * d
}

#[inline]
fn dissim(measure: Measure, f: f64, r: f64, c: f64) -> f64 {
    match measure {
        Measure::Relative => dissim_relative(f, r, c),
        Measure::Absolute => dissim_absolute(f, r),
    }
}

/// Row/column position of a patch in its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatchIndex {
    pub row: usize,
    pub col: usize,
}

impl PatchIndex {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    fn check(&self, grid: &PatchGrid) -> Result<()> {
        if self.row >= grid.m || self.col >= grid.n {
            return Err(Error::PatchOutOfRange {
                row: self.row,
                col: self.col,
                rows: grid.m,
                cols: grid.n,
            });
        }
        Ok(())
    }

    fn flat(&self, grid: &PatchGrid) -> usize {
        self.row * grid.n + self.col
    }
}

fn check_stack(stack: &FeatureStack, grid: &PatchGrid) -> Result<()> {
    if stack.height() != grid.height() || stack.width() != grid.width() {
        return Err(Error::DimensionMismatch(format!(
            "feature stack {}x{} does not match grid {}x{}",
            stack.height(),
            stack.width(),
            grid.height(),
            grid.width()
        )));
    }
    Ok(())
}

/// Pixel-level overall dissimilarity map `D^x` between the feature stack and
/// the duplication map of patch `x`.
pub fn combined_dissim_map(
    stack: &FeatureStack,
    grid: &PatchGrid,
    x: PatchIndex,
    cfg: &SdsConfig,
) -> Result<PlanarImage> {
    x.check(grid)?;
    check_stack(stack, grid)?;
    let (x0, y0) = (x.col * grid.w, x.row * grid.w);
    let width = grid.width();
    Ok(PlanarImage::from_fn(grid.height(), width, |py, px| {
        let (ry, rx) = (y0 + py % grid.w, x0 + px % grid.w);
        stack
            .maps
            .iter()
            .map(|f| {
                let fd = f.data();
                dissim(cfg.measure, fd[py * width + px], fd[ry * width + rx], cfg.c)
            })
            .sum::<f64>()
            .sqrt()
    }))
}

#[inline]
fn spatial_weight(a: PatchIndex, b: PatchIndex, sigma2: f64) -> f64 {
    let dr = a.row as f64 - b.row as f64;
    let dc = a.col as f64 - b.col as f64;
    (-(dr * dr + dc * dc) / (2.0 * sigma2)).exp()
}

/// Pixel-level spatial weighting map `W^x`: every pixel of patch `y` carries
/// `exp(-|x - y|^2 / (2 sigma2))` over patch indices.
pub fn spatial_weight_map(grid: &PatchGrid, x: PatchIndex, sigma2: f64) -> Result<PlanarImage> {
    x.check(grid)?;
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidConfig(format!("sigma2 must be > 0, got {sigma2}")));
    }
    Ok(PlanarImage::from_fn(grid.height(), grid.width(), |py, px| {
        let (row, col) = grid.patch_of(py, px);
        spatial_weight(x, PatchIndex::new(row, col), sigma2)
    }))
}

/// Feature values regrouped patch by patch: `[patch][offset][channel]`.
struct BlockLayout {
    data: Vec<f64>,
    stride: usize,
    channels: usize,
}

impl BlockLayout {
    fn new(stack: &FeatureStack, grid: &PatchGrid) -> Self {
        let k = stack.len();
        let area = grid.w * grid.w;
        let width = grid.width();
        let mut data = vec![0.0; grid.patch_count() * area * k];
        for row in 0..grid.m {
            for col in 0..grid.n {
                let base = (row * grid.n + col) * area * k;
                for a in 0..grid.w {
                    for b in 0..grid.w {
                        let p = (row * grid.w + a) * width + col * grid.w + b;
                        let o = base + (a * grid.w + b) * k;
                        for (ch, map) in stack.maps.iter().enumerate() {
                            data[o + ch] = map.data()[p];
                        }
                    }
                }
            }
        }
        Self {
            data,
            stride: area * k,
            channels: k,
        }
    }

    fn block(&self, patch: usize) -> &[f64] {
        &self.data[patch * self.stride..(patch + 1) * self.stride]
    }
}

/// Sum of `D^x` over the pixels of patch `y`. Symmetric in `x` and `y`.
fn block_dissim(a: &[f64], b: &[f64], channels: usize, measure: Measure, c: f64) -> f64 {
    a.chunks_exact(channels)
        .zip(b.chunks_exact(channels))
        .map(|(pa, pb)| {
            pa.iter()
                .zip(pb)
                .map(|(&f, &r)| dissim(measure, f, r, c))
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

/// Symmetric `P x P` table of per-patch dissimilarity sums.
fn pair_table(stack: &FeatureStack, grid: &PatchGrid, cfg: &SdsConfig) -> Vec<f64> {
    let p = grid.patch_count();
    if cfg.variant == Variant::CenterOnly {
        return vec![(grid.w * grid.w) as f64; p * p];
    }
    let layout = BlockLayout::new(stack, grid);
    let upper: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|x| {
            let bx = layout.block(x);
            (x..p)
                .map(|y| {
                    if x == y {
                        0.0
                    } else {
                        block_dissim(bx, layout.block(y), layout.channels, cfg.measure, cfg.c)
                    }
                })
                .collect()
        })
        .collect();
    let mut table = vec![0.0; p * p];
    for (x, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let y = x + k;
            table[x * p + y] = v;
            table[y * p + x] = v;
        }
    }
    table
}

fn weighted_sums(table: &[f64], grid: &PatchGrid, sigma2: f64) -> Vec<f64> {
    let p = grid.patch_count();
    let idx = |q: usize| PatchIndex::new(q / grid.n, q % grid.n);
    (0..p)
        .map(|x| {
            (0..p)
                .map(|y| spatial_weight(idx(x), idx(y), sigma2) * table[x * p + y])
                .sum()
        })
        .collect()
}

/// Salience of one patch before map normalization:
/// `(sum_p D^x(p) W^x(p))^theta`.
pub fn patch_salience(
    stack: &FeatureStack,
    grid: &PatchGrid,
    x: PatchIndex,
    cfg: &SdsConfig,
) -> Result<f64> {
    x.check(grid)?;
    check_stack(stack, grid)?;
    let layout = BlockLayout::new(stack, grid);
    let bx = layout.block(x.flat(grid));
    let mut acc = 0.0;
    for row in 0..grid.m {
        for col in 0..grid.n {
            let y = PatchIndex::new(row, col);
            let inner = if cfg.variant == Variant::CenterOnly {
                (grid.w * grid.w) as f64
            } else if y == x {
                0.0
            } else {
                let by = layout.block(y.flat(grid));
                block_dissim(bx, by, layout.channels, cfg.measure, cfg.c)
            };
            acc += spatial_weight(x, y, cfg.sigma2) * inner;
        }
    }
    Ok(acc.powf(cfg.theta))
}

/// Pre-normalization salience of every patch, row-major over the grid.
pub fn patch_saliences(stack: &FeatureStack, grid: &PatchGrid, cfg: &SdsConfig) -> Result<Vec<f64>> {
    check_stack(stack, grid)?;
    let table = pair_table(stack, grid, cfg);
    Ok(weighted_sums(&table, grid, cfg.sigma2)
        .into_iter()
        .map(|s| s.powf(cfg.theta))
        .collect())
}

/// Mean of `D^x` over the whole image; a diagnostic for how strongly one
/// patch differs from everything else.
pub fn mean_dissimilarity(
    stack: &FeatureStack,
    grid: &PatchGrid,
    x: PatchIndex,
    cfg: &SdsConfig,
) -> Result<f64> {
    let d = combined_dissim_map(stack, grid, x, cfg)?;
    Ok(d.data().iter().sum::<f64>() / d.pixel_count() as f64)
}

/// Patch-level saliency normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    pub grid: PatchGrid,
    /// Row-major `m x n` values.
    pub values: Vec<f64>,
}

impl SaliencyMap {
    /// Min-max normalizes raw saliences; equal values give an all-zero map.
    pub fn from_raw(grid: PatchGrid, raw: Vec<f64>) -> Result<Self> {
        let img = PlanarImage::from_vec(grid.m, grid.n, 1, raw)?;
        Ok(Self {
            grid,
            values: img.normalized_unit().into_data(),
        })
    }

    pub fn get(&self, x: PatchIndex) -> f64 {
        self.values[x.row * self.grid.n + x.col]
    }

    /// The native `m x n` map as a single-channel image.
    pub fn to_image(&self) -> PlanarImage {
        PlanarImage::from_vec(self.grid.m, self.grid.n, 1, self.values.clone())
            .expect("grid-sized values")
    }

    /// Bicubic upsampling to `height x width`, re-normalized to `[0, 1]`.
    pub fn upsample(&self, height: usize, width: usize) -> PlanarImage {
        resize_bicubic(&self.to_image(), height, width).normalized_unit()
    }
}

/// Resizes to the patch-aligned geometry, converts the color space and
/// extracts the configured features.
pub fn prepare_features(img: &PlanarImage, cfg: &SdsConfig) -> Result<(PatchGrid, FeatureStack)> {
    cfg.validate()?;
    if img.height() == 0 || img.width() == 0 {
        return Err(Error::EmptyImage {
            height: img.height(),
            width: img.width(),
        });
    }
    let grid = plan_grid(img.height(), img.width(), cfg.w, cfg.min_patches);
    let resized = resize_bicubic(img, grid.height(), grid.width());
    let converted = to_color_space(&resized, cfg.space)?;
    let stack = extract_features(&converted, cfg.feature)?;
    Ok((grid, stack))
}

/// Runs the patch model on an RGB image.
///
/// Only [`Variant::Sds`] and [`Variant::CenterOnly`] produce patch maps; the
/// normalization baselines are pixel maps, see [`predict`].
pub fn compute_saliency(img: &PlanarImage, cfg: &SdsConfig) -> Result<SaliencyMap> {
    if let Variant::NormBaseline(_) = cfg.variant {
        return Err(Error::InvalidConfig(
            "normalization baselines produce pixel maps; use `predict`".into(),
        ));
    }
    let (grid, stack) = prepare_features(img, cfg)?;
    let raw = patch_saliences(&stack, &grid, cfg)?;
    SaliencyMap::from_raw(grid, raw)
}

/// Model output for any variant as a single-channel `[0, 1]` map: the
/// `m x n` patch map for SDS variants, the resized-image-sized pixel map
/// for the baselines.
pub fn predict(img: &PlanarImage, cfg: &SdsConfig) -> Result<PlanarImage> {
    match cfg.variant {
        Variant::Sds | Variant::CenterOnly => Ok(compute_saliency(img, cfg)?.to_image()),
        Variant::NormBaseline(norm) => {
            cfg.validate()?;
            let grid = plan_grid(img.height(), img.width(), cfg.w, cfg.min_patches);
            let resized = resize_bicubic(img, grid.height(), grid.width());
            normalization_baseline(&resized, norm)
        }
    }
}
