//! Structural feature extraction: gradient magnitude (GM), local contrast
//! (LC), or raw channels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{reflect_index, PlanarImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Gradient magnitude.
    Gm,
    /// Local contrast (Gaussian-weighted local standard deviation).
    Lc,
    /// Channels passed through unchanged.
    Raw,
}

impl FeatureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Gm => "gm",
            FeatureKind::Lc => "lc",
            FeatureKind::Raw => "raw",
        }
    }
}

impl std::str::FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gm" => Ok(FeatureKind::Gm),
            "lc" => Ok(FeatureKind::Lc),
            "raw" => Ok(FeatureKind::Raw),
            other => Err(Error::InvalidConfig(format!("unknown feature `{other}`"))),
        }
    }
}

/// One single-channel feature map per color channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    pub maps: Vec<PlanarImage>,
    pub kind: FeatureKind,
}

impl FeatureStack {
    /// Wraps prebuilt maps; all must be single-channel and equally sized.
    pub fn new(maps: Vec<PlanarImage>, kind: FeatureKind) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty feature stack".into()))?;
        let (h, w) = (first.height(), first.width());
        for m in &maps {
            if m.channels() != 1 {
                return Err(Error::ChannelMismatch {
                    expected: 1,
                    actual: m.channels(),
                });
            }
            if m.height() != h || m.width() != w {
                return Err(Error::DimensionMismatch(format!(
                    "feature map {}x{} differs from {h}x{w}",
                    m.height(),
                    m.width()
                )));
            }
        }
        Ok(Self { maps, kind })
    }

    pub fn height(&self) -> usize {
        self.maps[0].height()
    }

    pub fn width(&self) -> usize {
        self.maps[0].width()
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

fn require_single(channel: &PlanarImage) {
    assert_eq!(channel.channels(), 1, "feature extractors take one plane");
}

/// Gradient magnitude with 3x3 Prewitt kernels scaled by 1/3 and reflective
/// borders.
pub fn gradient_magnitude(channel: &PlanarImage) -> PlanarImage {
    require_single(channel);
    let (h, w) = (channel.height(), channel.width());
    let src = channel.data();
    let at = |y: isize, x: isize| src[reflect_index(y, h) * w + reflect_index(x, w)];
    let mut out = PlanarImage::new(h, w, 1);
    let dst = out.plane_mut(0);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for k in -1..=1 {
                gx += at(y + k, x - 1) - at(y + k, x + 1);
                gy += at(y - 1, x + k) - at(y + 1, x + k);
            }
            gx /= 3.0;
            gy /= 3.0;
            dst[y as usize * w + x as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

pub const LC_WINDOW: usize = 11;
pub const LC_SIGMA: f64 = 1.5;

/// Normalized `LC_WINDOW x LC_WINDOW` Gaussian window, row-major.
pub fn lc_window() -> Vec<f64> {
    let r = (LC_WINDOW / 2) as isize;
    let mut win = Vec::with_capacity(LC_WINDOW * LC_WINDOW);
    for dy in -r..=r {
        for dx in -r..=r {
            win.push((-((dy * dy + dx * dx) as f64) / (2.0 * LC_SIGMA * LC_SIGMA)).exp());
        }
    }
    let total: f64 = win.iter().sum();
    win.iter_mut().for_each(|v| *v /= total);
    win
}

/// Local contrast: Gaussian-weighted standard deviation over an 11x11 window
/// (sigma 1.5), reflective borders.
pub fn local_contrast(channel: &PlanarImage) -> PlanarImage {
    require_single(channel);
    let (h, w) = (channel.height(), channel.width());
    let src = channel.data();
    let win = lc_window();
    let r = (LC_WINDOW / 2) as isize;
    let mut out = PlanarImage::new(h, w, 1);
    let dst = out.plane_mut(0);
    let mut offsets = Vec::with_capacity(LC_WINDOW);
    for y in 0..h {
        for x in 0..w {
            let center = src[y * w + x];
            offsets.clear();
            offsets.extend((-r..=r).map(|dx| reflect_index(x as isize + dx, w)));
            // moments of the deviation from the centre pixel keep constant
            // windows exactly zero
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            let mut k = 0;
            for dy in -r..=r {
                let row = reflect_index(y as isize + dy, h) * w;
                for &col in &offsets {
                    let d = src[row + col] - center;
                    m1 += win[k] * d;
                    m2 += win[k] * d * d;
                    k += 1;
                }
            }
            dst[y * w + x] = (m2 - m1 * m1).max(0.0).sqrt();
        }
    }
    out
}

/// Applies the chosen extractor to each channel independently.
pub fn extract_features(img: &PlanarImage, kind: FeatureKind) -> Result<FeatureStack> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            actual: img.channels(),
        });
    }
    let maps: Vec<PlanarImage> = (0..img.channels())
        .into_par_iter()
        .map(|c| {
            let plane = img.channel(c);
            match kind {
                FeatureKind::Gm => gradient_magnitude(&plane),
                FeatureKind::Lc => local_contrast(&plane),
                FeatureKind::Raw => plane,
            }
        })
        .collect();
    FeatureStack::new(maps, kind)
}
