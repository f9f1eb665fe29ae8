//! Batch evaluation: dataset manifests, model runs, metric aggregation,
//! parameter sweeps, ablations and map export.

mod export;
mod manifest;
mod report;

pub use export::{export_maps, ExportRecord};
pub use manifest::{parse_points, DatasetManifest, ManifestEntry};
pub use report::{
    weighted_average, ConfigSnapshot, EntryResult, GroupSummary, MetricSummary, RunReport,
    UNCATEGORIZED,
};

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureKind;
use crate::imaging::{load_image, ColorSpace};
use crate::metrics::{fit_to, paired_ttest, score, Metric, MetricScores, TTestResult, DEFAULT_EMD_SIDE};
use crate::sds::{predict, Measure, Normalization, SdsConfig, Variant};

/// Evaluation settings that are not model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub metrics: Vec<Metric>,
    pub emd_side: usize,
    /// Worker threads for image-level parallelism; does not affect output.
    pub jobs: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.to_vec(),
            emd_side: DEFAULT_EMD_SIDE,
            jobs: 1,
        }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

fn evaluate_entry(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    cfg: &SdsConfig,
    settings: &RunSettings,
) -> Result<MetricScores> {
    let image = load_image(manifest.resolve(&entry.image))?;
    let fixations = manifest.load_fixations(entry, (image.height(), image.width()))?;
    let map = predict(&image, cfg)?;
    let eval = fit_to(&map, fixations.points.height(), fixations.points.width());
    score(&eval, &fixations, &settings.metrics, settings.emd_side)
}

/// Runs one model configuration over every manifest entry.
///
/// Failing entries are recorded with their error and skipped; the call only
/// fails when no entry succeeds. Output order follows the manifest, so the
/// report does not depend on `settings.jobs`.
pub fn run_dataset(manifest: &DatasetManifest, cfg: &SdsConfig, settings: &RunSettings) -> Result<RunReport> {
    cfg.validate()?;
    let mut metrics = settings.metrics.clone();
    metrics.sort();
    metrics.dedup();
    let settings = RunSettings {
        metrics,
        ..settings.clone()
    };
    let entries: Vec<EntryResult> = pool(settings.jobs)?.install(|| {
        manifest
            .entries
            .par_iter()
            .enumerate()
            .map(|(index, entry)| {
                let start = Instant::now();
                let outcome = evaluate_entry(manifest, entry, cfg, &settings);
                let seconds = start.elapsed().as_secs_f64();
                let (scores, error) = match outcome {
                    Ok(s) => (Some(s), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                EntryResult {
                    index,
                    image: entry.image.to_string_lossy().into_owned(),
                    category: entry.category.clone(),
                    scores,
                    error,
                    seconds,
                }
            })
            .collect()
    });
    if entries.iter().all(|e| e.error.is_some()) {
        let first = entries[0].error.clone().unwrap_or_default();
        return Err(Error::BatchFailed(first));
    }
    let config = ConfigSnapshot {
        dataset: manifest.name.clone(),
        entries: manifest.entries.len(),
        blur_sigma_fraction: manifest.blur_sigma_fraction,
        model: *cfg,
        metrics: settings.metrics.clone(),
        emd_side: settings.emd_side,
    };
    Ok(RunReport::assemble(config, entries))
}

/// Model parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    C,
    Sigma2,
    Theta,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::C => "c",
            SweepParam::Sigma2 => "sigma2",
            SweepParam::Theta => "theta",
        }
    }

    pub fn apply(&self, cfg: &SdsConfig, value: f64) -> SdsConfig {
        let mut out = *cfg;
        match self {
            SweepParam::C => out.c = value,
            SweepParam::Sigma2 => out.sigma2 = value,
            SweepParam::Theta => out.theta = value,
        }
        out
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" => Ok(SweepParam::C),
            "sigma2" | "sigma^2" => Ok(SweepParam::Sigma2),
            "theta" => Ok(SweepParam::Theta),
            other => Err(Error::InvalidConfig(format!("cannot sweep `{other}`"))),
        }
    }
}

/// One run per value of a single parameter.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub param: SweepParam,
    pub runs: Vec<(f64, RunReport)>,
}

impl SweepTable {
    /// Long format: `param,value,category,metric,mean,count`, with the
    /// overall mean under category `all`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,value,category,metric,mean,count\n");
        for (value, report) in &self.runs {
            let groups = std::iter::once(("all", &report.overall))
                .chain(report.categories.iter().map(|g| (g.category.as_str(), &g.metrics)));
            for (category, summaries) in groups {
                for s in summaries {
                    let mean = s.mean.map(|m| m.to_string()).unwrap_or_default();
                    writeln!(
                        out,
                        "{},{value},{},{},{mean},{}",
                        self.param.name(),
                        report::csv_field(category),
                        s.metric.name(),
                        s.count
                    )
                    .unwrap();
                }
            }
        }
        out
    }
}

pub fn sweep(
    manifest: &DatasetManifest,
    cfg: &SdsConfig,
    param: SweepParam,
    values: &[f64],
    settings: &RunSettings,
) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let runs = values
        .iter()
        .map(|&v| Ok((v, run_dataset(manifest, &param.apply(cfg, v), settings)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { param, runs })
}

/// Named model configurations of the ablation study derived from a base
/// configuration.
pub fn ablation_cells(base: &SdsConfig) -> Vec<(String, SdsConfig)> {
    let sds = SdsConfig {
        measure: Measure::Relative,
        variant: Variant::Sds,
        ..*base
    };
    let mut cells = Vec::new();
    for space in ColorSpace::ALL {
        for (feature, sign) in [(FeatureKind::Gm, '+'), (FeatureKind::Raw, '-')] {
            cells.push((
                format!("{}{sign}gm", space.name()),
                SdsConfig {
                    space,
                    feature,
                    ..sds
                },
            ));
        }
    }
    let yiq = SdsConfig {
        space: ColorSpace::Yiq,
        ..sds
    };
    cells.push((
        "yiq+lc".into(),
        SdsConfig {
            feature: FeatureKind::Lc,
            ..yiq
        },
    ));
    cells.push((
        "absolute".into(),
        SdsConfig {
            feature: FeatureKind::Gm,
            measure: Measure::Absolute,
            ..yiq
        },
    ));
    cells.push((
        "center-only".into(),
        SdsConfig {
            feature: FeatureKind::Gm,
            variant: Variant::CenterOnly,
            ..yiq
        },
    ));
    for norm in [Normalization::ZeroOne, Normalization::Mmlm] {
        let variant = Variant::NormBaseline(norm);
        cells.push((
            variant.name().to_string(),
            SdsConfig {
                feature: FeatureKind::Lc,
                variant,
                ..yiq
            },
        ));
    }
    cells
}

#[derive(Debug, Clone)]
pub struct AblationMatrix {
    pub cells: Vec<(String, RunReport)>,
}

impl AblationMatrix {
    pub fn get(&self, name: &str) -> Option<&RunReport> {
        self.cells.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    /// `cell,metric,mean,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,metric,mean,count\n");
        for (name, report) in &self.cells {
            for s in &report.overall {
                let mean = s.mean.map(|m| m.to_string()).unwrap_or_default();
                writeln!(out, "{name},{},{mean},{}", s.metric.name(), s.count).unwrap();
            }
        }
        out
    }
}

/// Runs every ablation cell over the dataset.
pub fn ablate(manifest: &DatasetManifest, base: &SdsConfig, settings: &RunSettings) -> Result<AblationMatrix> {
    let cells = ablation_cells(base)
        .into_iter()
        .map(|(name, cfg)| Ok((name, run_dataset(manifest, &cfg, settings)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationMatrix { cells })
}

/// Paired t-test of two runs over the entries where both define `metric`.
pub fn compare(a: &RunReport, b: &RunReport, metric: Metric, alpha: f64) -> Result<TTestResult> {
    if a.entries.len() != b.entries.len() {
        return Err(Error::LengthMismatch(format!(
            "{} vs {} entries",
            a.entries.len(),
            b.entries.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .column(metric)
        .into_iter()
        .zip(b.column(metric))
        .filter_map(|(x, y)| Some((x?, y?)))
        .unzip();
    paired_ttest(&xs, &ys, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ablation_has_every_cell() {
        let names: Vec<String> = ablation_cells(&SdsConfig::default())
            .into_iter()
            .map(|(n, _)| n)
            .collect();
        for want in [
            "yiq+gm", "yiq-gm", "ycbcr+gm", "ycbcr-gm", "rgb+gm", "rgb-gm", "yiq+lc", "absolute",
            "center-only", "norm-zero-one", "norm-mmlm",
        ] {
            assert!(names.iter().any(|n| n == want), "missing {want}");
        }
    }

    #[test]
    fn sweep_param_overrides_one_field() {
        let base = SdsConfig::default();
        let cfg = SweepParam::Sigma2.apply(&base, 7.0);
        assert_eq!(cfg.sigma2, 7.0);
        assert_eq!(SdsConfig { sigma2: 3.0, ..cfg }, base);
    }
}
