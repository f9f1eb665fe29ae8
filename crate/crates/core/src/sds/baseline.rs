//! Itti-style baselines: per-feature normalization, summation and blur
//! instead of the patch comparison.

use super::Normalization;
use crate::error::Result;
use crate::features::{extract_features, FeatureKind};
use crate::imaging::{gaussian_blur, to_color_space, Boundary, ColorSpace, PlanarImage};

/// Blur standard deviation as a fraction of the map width.
pub const BASELINE_BLUR_FRACTION: f64 = 0.05;
const BLUR_TRUNCATE: f64 = 4.0;

/// Plain `[0, 1]` rescaling.
pub fn zero_one_normalize(map: &PlanarImage) -> PlanarImage {
    map.normalized_unit()
}

/// Strict 3x3 local maxima (border pixels compare against their truncated
/// neighbourhood). Returns `(flat index, value)` in raster order.
fn strict_local_maxima(map: &PlanarImage) -> Vec<(usize, f64)> {
    let (h, w) = (map.height(), map.width());
    let data = map.data();
    let mut peaks = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = data[y * w + x];
            let mut strict = true;
            'scan: for ny in y.saturating_sub(1)..(y + 2).min(h) {
                for nx in x.saturating_sub(1)..(x + 2).min(w) {
                    if (ny, nx) != (y, x) && data[ny * w + nx] >= v {
                        strict = false;
                        break 'scan;
                    }
                }
            }
            if strict {
                peaks.push((y * w + x, v));
            }
        }
    }
    peaks
}

/// Maximum-minus-mean-of-local-maxima normalization.
///
/// The map is rescaled to `[0, 1]` and multiplied by `(M - m)^2`, with `M`
/// the global maximum and `m` the mean of the other strict local maxima
/// (zero when there are none).
pub fn mmlm_normalize(map: &PlanarImage) -> PlanarImage {
    let scaled = map.normalized_unit();
    let (_, global) = scaled.min_max();
    let mut peaks = strict_local_maxima(&scaled);
    if let Some(pos) = peaks.iter().position(|&(_, v)| v == global) {
        peaks.remove(pos);
    }
    let mean_other = if peaks.is_empty() {
        0.0
    } else {
        peaks.iter().map(|&(_, v)| v).sum::<f64>() / peaks.len() as f64
    };
    let gain = (global - mean_other).powi(2);
    scaled.map(|v| v * gain)
}

/// `blur(sum_i N(LC_i))` over the YIQ channels of an RGB image, min-max
/// normalized. The blur sigma is 5% of the map width.
pub fn normalization_baseline(img: &PlanarImage, norm: Normalization) -> Result<PlanarImage> {
    let yiq = to_color_space(img, ColorSpace::Yiq)?;
    let stack = extract_features(&yiq, FeatureKind::Lc)?;
    let mut sum = PlanarImage::new(img.height(), img.width(), 1);
    for f in &stack.maps {
        let normalized = match norm {
            Normalization::ZeroOne => zero_one_normalize(f),
            Normalization::Mmlm => mmlm_normalize(f),
        };
        for (acc, v) in sum.plane_mut(0).iter_mut().zip(normalized.data()) {
            *acc += v;
        }
    }
    let sigma = BASELINE_BLUR_FRACTION * img.width() as f64;
    let blurred = gaussian_blur(&sum, sigma, BLUR_TRUNCATE, Boundary::Reflect);
    Ok(blurred.normalized_unit())
}
