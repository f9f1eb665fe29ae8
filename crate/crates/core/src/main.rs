use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sds::error::{Error, Result};
use sds::harness::{ablate, export_maps, run_dataset, sweep, DatasetManifest, RunSettings, SweepParam};
use sds::imaging::{load_image, plan_grid, save_pgm, save_png, ColorSpace};
use sds::metrics::{fit_to, Metric, DEFAULT_EMD_SIDE};
use sds::sds::{predict, Measure, SdsConfig, Variant};
use sds::FeatureKind;

/// Directory used to resolve relative manifest paths that do not exist
/// relative to the working directory.
const DATASET_ROOT_VAR: &str = "SDS_DATASET_ROOT";

#[derive(Parser)]
#[command(name = "sds", version, about = "Structural-dissimilarity saliency detection and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the saliency map of one image.
    Run {
        #[arg(long)]
        image: PathBuf,
        /// Output PNG, upsampled to the input size.
        #[arg(long)]
        out: PathBuf,
        /// Optional PGM of the native (patch-resolution) map.
        #[arg(long)]
        native: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Score a model over a dataset manifest.
    Bench {
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Re-run a dataset for each value of one parameter.
    Sweep {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run the color-space / feature / measure / baseline ablation matrix.
    Ablate {
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Write native and full-resolution maps for every manifest entry.
    Export {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for report files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "nss,cc,auc,emd")]
    metrics: Vec<Metric>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = DEFAULT_EMD_SIDE)]
    emd_side: usize,
}

impl EvalArgs {
    fn settings(&self) -> RunSettings {
        RunSettings {
            metrics: self.metrics.clone(),
            emd_side: self.emd_side,
            jobs: self.jobs,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 24)]
    w: usize,
    #[arg(long, default_value_t = 11)]
    min_patches: usize,
    #[arg(long, default_value_t = 20.0)]
    c: f64,
    #[arg(long, default_value_t = 3.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 8.0)]
    theta: f64,
    /// gm | lc | raw
    #[arg(long, default_value = "gm")]
    feature: FeatureKind,
    /// yiq | ycbcr | rgb
    #[arg(long, default_value = "yiq")]
    space: ColorSpace,
    /// relative | absolute
    #[arg(long, default_value = "relative")]
    measure: Measure,
    /// sds | center-only | norm-zero-one | norm-mmlm
    #[arg(long, default_value = "sds")]
    variant: Variant,
}

impl ModelArgs {
    fn config(&self) -> Result<SdsConfig> {
        let cfg = SdsConfig {
            w: self.w,
            min_patches: self.min_patches,
            c: self.c,
            sigma2: self.sigma2,
            theta: self.theta,
            feature: self.feature,
            space: self.space,
            measure: self.measure,
            variant: self.variant,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn resolve_manifest(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(root) = std::env::var_os(DATASET_ROOT_VAR) {
            let candidate = Path::new(&root).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    DatasetManifest::load(resolve_manifest(path))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, body).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn execute(command: Command) -> Result<serde_json::Value> {
    match command {
        Command::Run {
            image,
            out,
            native,
            model,
        } => {
            let cfg = model.config()?;
            let img = load_image(&image)?;
            let map = predict(&img, &cfg)?;
            save_png(&fit_to(&map, img.height(), img.width()), &out)?;
            if let Some(native) = &native {
                save_pgm(&map, native)?;
            }
            let grid = match cfg.variant {
                Variant::NormBaseline(_) => None,
                _ => Some(plan_grid(img.height(), img.width(), cfg.w, cfg.min_patches)),
            };
            Ok(json!({ "out": out, "native": native, "grid": grid }))
        }
        Command::Bench { eval, model } => {
            let cfg = model.config()?;
            let manifest = load_manifest(&eval.manifest)?;
            let report = run_dataset(&manifest, &cfg, &eval.settings())?;
            let files = report.write(&eval.out)?;
            Ok(json!({
                "dataset": manifest.name,
                "overall": report.overall,
                "failures": report.failures(),
                "files": files,
            }))
        }
        Command::Sweep {
            eval,
            param,
            values,
            model,
        } => {
            let cfg = model.config()?;
            let manifest = load_manifest(&eval.manifest)?;
            let table = sweep(&manifest, &cfg, param, &values, &eval.settings())?;
            let path = eval.out.join("sweep.csv");
            write_file(&path, &table.to_csv())?;
            Ok(json!({ "param": param, "values": values, "file": path }))
        }
        Command::Ablate { eval, model } => {
            let cfg = model.config()?;
            let manifest = load_manifest(&eval.manifest)?;
            let matrix = ablate(&manifest, &cfg, &eval.settings())?;
            let path = eval.out.join("ablation.csv");
            write_file(&path, &matrix.to_csv())?;
            for (name, report) in &matrix.cells {
                report.write(&eval.out.join(name))?;
            }
            Ok(json!({ "cells": matrix.cells.len(), "file": path }))
        }
        Command::Export {
            manifest,
            out,
            model,
        } => {
            let cfg = model.config()?;
            let manifest = load_manifest(&manifest)?;
            let records = export_maps(&manifest, &cfg, &out)?;
            let failed: Vec<_> = records
                .iter()
                .filter_map(|r| r.error.as_ref().map(|e| json!({ "index": r.index, "error": e })))
                .collect();
            let hits = records.iter().filter(|r| r.cache_hit).count();
            Ok(json!({ "exported": records.len() - failed.len(), "cache_hits": hits, "failed": failed }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            ExitCode::FAILURE
        }
    }
}
