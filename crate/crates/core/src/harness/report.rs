use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricScores};
use crate::sds::SdsConfig;

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub dataset: String,
    pub entries: usize,
    pub blur_sigma_fraction: f64,
    pub model: SdsConfig,
    pub metrics: Vec<Metric>,
    pub emd_side: usize,
}

/// Outcome for one manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryResult {
    pub index: usize,
    pub image: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<MetricScores>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock seconds; kept out of the deterministic report files.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    /// Mean over the entries where the metric is defined.
    pub mean: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub category: String,
    pub images: usize,
    pub metrics: Vec<MetricSummary>,
}

/// Label for entries without a category in a categorized dataset.
pub const UNCATEGORIZED: &str = "(none)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigSnapshot,
    pub overall: Vec<MetricSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub categories: Vec<GroupSummary>,
    pub entries: Vec<EntryResult>,
}

pub(crate) fn summarize<'a>(
    metrics: &[Metric],
    entries: impl Iterator<Item = &'a EntryResult> + Clone,
) -> Vec<MetricSummary> {
    metrics
        .iter()
        .map(|&metric| {
            let values: Vec<f64> = entries
                .clone()
                .filter_map(|e| e.scores.and_then(|s| s.get(metric)))
                .collect();
            let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
            MetricSummary {
                metric,
                mean,
                count: values.len(),
            }
        })
        .collect()
}

impl RunReport {
    pub(crate) fn assemble(config: ConfigSnapshot, entries: Vec<EntryResult>) -> Self {
        let overall = summarize(&config.metrics, entries.iter());
        let mut labels: Vec<String> = entries.iter().filter_map(|e| e.category.clone()).collect();
        labels.sort();
        labels.dedup();
        let categories = if labels.is_empty() {
            Vec::new()
        } else {
            if entries.iter().any(|e| e.category.is_none()) {
                labels.push(UNCATEGORIZED.to_string());
            }
            labels
                .into_iter()
                .map(|label| {
                    let members = entries
                        .iter()
                        .filter(|e| e.category.as_deref().unwrap_or(UNCATEGORIZED) == label);
                    GroupSummary {
                        images: members.clone().count(),
                        metrics: summarize(&config.metrics, members),
                        category: label,
                    }
                })
                .collect()
        };
        Self {
            config,
            overall,
            categories,
            entries,
        }
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        self.overall
            .iter()
            .find(|s| s.metric == metric)
            .and_then(|s| s.mean)
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.error.is_some()).count()
    }

    /// Per-entry values of `metric` (None where undefined or failed).
    pub fn column(&self, metric: Metric) -> Vec<Option<f64>> {
        self.entries
            .iter()
            .map(|e| e.scores.and_then(|s| s.get(metric)))
            .collect()
    }

    /// Long-format CSV, one row per image and metric, preceded by the config
    /// snapshot as a comment line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let config = serde_json::to_string(&self.config).expect("serializable config");
        writeln!(out, "# config: {config}").unwrap();
        out.push_str("dataset,index,image,category,metric,value\n");
        for e in &self.entries {
            let prefix = format!(
                "{},{},{},{}",
                csv_field(&self.config.dataset),
                e.index,
                csv_field(&e.image),
                csv_field(e.category.as_deref().unwrap_or(""))
            );
            match (&e.scores, &e.error) {
                (Some(scores), _) => {
                    for &m in &self.config.metrics {
                        let value = scores.get(m).map(|v| v.to_string()).unwrap_or_default();
                        writeln!(out, "{prefix},{},{value}", m.name()).unwrap();
                    }
                }
                (None, Some(err)) => {
                    writeln!(out, "{prefix},error,{}", csv_field(err)).unwrap();
                }
                (None, None) => {}
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }

    pub fn timings_csv(&self) -> String {
        let mut out = String::from("index,image,seconds\n");
        for e in &self.entries {
            writeln!(out, "{},{},{:.6}", e.index, csv_field(&e.image), e.seconds).unwrap();
        }
        out
    }

    /// Writes `report.csv`, `summary.json` and `timings.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("report.csv", self.to_csv()),
            ("summary.json", self.to_json()),
            ("timings.csv", self.timings_csv()),
        ];
        files
            .into_iter()
            .map(|(name, body)| {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
                Ok(path)
            })
            .collect()
    }
}

/// Image-count weighted mean of one metric across several datasets.
pub fn weighted_average(reports: &[RunReport], metric: Metric) -> Option<f64> {
    let (sum, count) = reports.iter().fold((0.0, 0usize), |(sum, count), r| {
        match r.overall.iter().find(|s| s.metric == metric) {
            Some(MetricSummary {
                mean: Some(mean),
                count: n,
                ..
            }) => (sum + mean * *n as f64, count + n),
            _ => (sum, count),
        }
    });
    (count > 0).then(|| sum / count as f64)
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
