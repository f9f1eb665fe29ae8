//! Fixation-prediction metrics: NSS, CC, AUC (Judd), EMD, plus the
//! fixation-density construction and a paired t-test for model comparison.

mod emd;
mod ttest;

pub use emd::{emd, emd_same_grid, transport_cost};
pub use ttest::{paired_ttest, TTestOutcome, TTestResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{gaussian_blur, resize_bicubic, Boundary, PlanarImage};

/// Default density blur as a fraction of the map width.
pub const DEFAULT_BLUR_FRACTION: f64 = 0.05;
/// Default maximum side of the grids EMD is solved on.
pub const DEFAULT_EMD_SIDE: usize = 32;
const DENSITY_TRUNCATE: f64 = 4.0;

/// Binary map of fixated pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixationMap {
    height: usize,
    width: usize,
    fixated: Vec<bool>,
}

impl FixationMap {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            fixated: vec![false; height * width],
        }
    }

    /// Nonzero pixels of a single-channel image are fixations.
    pub fn from_image(img: &PlanarImage) -> Self {
        Self {
            height: img.height(),
            width: img.width(),
            fixated: img.plane(0).iter().map(|&v| v != 0.0).collect(),
        }
    }

    /// Marks `(row, col)` points; out-of-range points are ignored.
    pub fn from_points(height: usize, width: usize, points: &[(usize, usize)]) -> Self {
        let mut map = Self::new(height, width);
        for &(r, c) in points {
            if r < height && c < width {
                map.fixated[r * width + c] = true;
            }
        }
        map
    }

    pub fn set(&mut self, row: usize, col: usize) {
        self.fixated[row * self.width + col] = true;
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn count(&self) -> usize {
        self.fixated.iter().filter(|&&f| f).count()
    }

    pub fn mask(&self) -> &[bool] {
        &self.fixated
    }

    pub fn to_image(&self) -> PlanarImage {
        let data = self.fixated.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
        PlanarImage::from_vec(self.height, self.width, 1, data).expect("sized mask")
    }
}

/// Fixation points with their density map.
#[derive(Debug, Clone)]
pub struct FixationData {
    pub points: FixationMap,
    pub density: Option<PlanarImage>,
}

impl FixationData {
    /// Builds the density from the points with the given blur sigma.
    pub fn with_blur(points: FixationMap, blur_sigma: f64) -> Result<Self> {
        let density = density_from_points(&points, blur_sigma)?;
        Ok(Self {
            points,
            density: Some(density),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Nss,
    Cc,
    Auc,
    Emd,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Nss, Metric::Cc, Metric::Auc, Metric::Emd];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Nss => "nss",
            Metric::Cc => "cc",
            Metric::Auc => "auc",
            Metric::Emd => "emd",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nss" => Ok(Metric::Nss),
            "cc" => Ok(Metric::Cc),
            "auc" => Ok(Metric::Auc),
            "emd" => Ok(Metric::Emd),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

/// Scores of one map; `None` marks a metric that was not requested or is
/// undefined for the input (e.g. a constant map).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub nss: Option<f64>,
    pub cc: Option<f64>,
    pub auc: Option<f64>,
    pub emd: Option<f64>,
}

impl MetricScores {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Nss => self.nss,
            Metric::Cc => self.cc,
            Metric::Auc => self.auc,
            Metric::Emd => self.emd,
        }
    }

    pub fn set(&mut self, metric: Metric, value: Option<f64>) {
        match metric {
            Metric::Nss => self.nss = value,
            Metric::Cc => self.cc = value,
            Metric::Auc => self.auc = value,
            Metric::Emd => self.emd = value,
        }
    }
}

fn same_dims(a: &PlanarImage, h: usize, w: usize, what: &str) -> Result<()> {
    if a.height() != h || a.width() != w {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {}x{} vs {h}x{w}",
            a.height(),
            a.width()
        )));
    }
    Ok(())
}

/// Mean and population standard deviation; the deviation of a constant
/// slice is exactly zero.
fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.windows(2).all(|w| w[0] == w[1]) {
        return (values.first().copied().unwrap_or(0.0), 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Gaussian-blurred, sum-normalized fixation map. The blur is truncated at
/// four sigma with zero padding; `blur_sigma <= 0` returns the normalized
/// impulses.
pub fn density_from_points(points: &FixationMap, blur_sigma: f64) -> Result<PlanarImage> {
    let count = points.count();
    if count == 0 {
        return Err(Error::NoFixations);
    }
    let impulses = points.to_image();
    let blurred = if blur_sigma > 0.0 {
        gaussian_blur(&impulses, blur_sigma, DENSITY_TRUNCATE, Boundary::Zero)
    } else {
        impulses
    };
    let total: f64 = blurred.data().iter().sum();
    Ok(blurred.map(|v| v / total))
}

/// Normalized scanpath saliency: mean z-scored saliency at fixated pixels,
/// population standard deviation. `None` for a constant map.
pub fn nss(sal: &PlanarImage, points: &FixationMap) -> Result<Option<f64>> {
    same_dims(sal, points.height(), points.width(), "nss")?;
    let count = points.count();
    if count == 0 {
        return Err(Error::NoFixations);
    }
    let values = sal.plane(0);
    let (mean, std) = mean_std(values);
    if !(std > 0.0) {
        return Ok(None);
    }
    let total: f64 = values
        .iter()
        .zip(points.mask())
        .filter(|(_, &f)| f)
        .map(|(&v, _)| (v - mean) / std)
        .sum();
    Ok(Some(total / count as f64))
}

/// Pearson linear correlation of two maps; `None` if either is constant.
pub fn cc(sal: &PlanarImage, density: &PlanarImage) -> Result<Option<f64>> {
    same_dims(sal, density.height(), density.width(), "cc")?;
    let (a, b) = (sal.plane(0), density.plane(0));
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    if !(sa > 0.0) || !(sb > 0.0) {
        return Ok(None);
    }
    let cov = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / a.len() as f64;
    Ok(Some((cov / (sa * sb)).clamp(-1.0, 1.0)))
}

/// AUC with thresholds at the fixated pixels' saliency values.
///
/// At threshold `t` a pixel counts as positive when its saliency is `>= t`;
/// the true-positive rate is over fixated pixels and the false-positive rate
/// over the remaining pixels. The curve is anchored at (0,0) and (1,1) and
/// integrated with the trapezoid rule. `None` if every pixel is fixated.
pub fn auc_judd(sal: &PlanarImage, points: &FixationMap) -> Result<Option<f64>> {
    same_dims(sal, points.height(), points.width(), "auc")?;
    let values = sal.plane(0);
    let mut fixated: Vec<f64> = values
        .iter()
        .zip(points.mask())
        .filter(|(_, &f)| f)
        .map(|(&v, _)| v)
        .collect();
    let n_fix = fixated.len();
    if n_fix == 0 {
        return Err(Error::NoFixations);
    }
    let n_other = values.len() - n_fix;
    if n_other == 0 {
        return Ok(None);
    }
    let mut all = values.to_vec();
    let desc = |a: &f64, b: &f64| b.total_cmp(a);
    all.sort_by(desc);
    fixated.sort_by(desc);

    let mut tpr = vec![0.0];
    let mut fpr = vec![0.0];
    let mut k = 0;
    while k < n_fix {
        let t = fixated[k];
        while k < n_fix && fixated[k] >= t {
            k += 1;
        }
        let above = all.partition_point(|&v| v >= t);
        tpr.push(k as f64 / n_fix as f64);
        fpr.push((above - k) as f64 / n_other as f64);
    }
    tpr.push(1.0);
    fpr.push(1.0);
    let area = fpr
        .windows(2)
        .zip(tpr.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0)
        .sum();
    Ok(Some(area))
}

/// Bicubic resize to `height x width` followed by `[0, 1]` normalization;
/// how saliency maps are brought to fixation-map resolution before scoring.
pub fn fit_to(map: &PlanarImage, height: usize, width: usize) -> PlanarImage {
    resize_bicubic(map, height, width).normalized_unit()
}

/// Scores an evaluation-resolution saliency map against fixation data.
///
/// CC and EMD compare against the density map; they are skipped (`None`)
/// when no density is available.
pub fn score(
    sal: &PlanarImage,
    fix: &FixationData,
    metrics: &[Metric],
    emd_side: usize,
) -> Result<MetricScores> {
    let mut scores = MetricScores::default();
    for &metric in metrics {
        let value = match (metric, &fix.density) {
            (Metric::Nss, _) => nss(sal, &fix.points)?,
            (Metric::Auc, _) => auc_judd(sal, &fix.points)?,
            (Metric::Cc, Some(d)) => cc(sal, d)?,
            (Metric::Emd, Some(d)) => match emd(sal, d, emd_side) {
                Ok(v) => Some(v),
                Err(Error::ZeroMass) => None,
                Err(e) => return Err(e),
            },
            (_, None) => None,
        };
        scores.set(metric, value);
    }
    Ok(scores)
}
