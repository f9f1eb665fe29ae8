mod common;

use std::process::Command;

use sds::harness::{
    ablate, compare, export_maps, run_dataset, sweep, DatasetManifest, RunSettings, SweepParam, UNCATEGORIZED,
};
use sds::imaging::load_gray;
use sds::metrics::{auc_judd, FixationMap, Metric};
use sds::sds::predict;
use sds::{load_image, SdsConfig, Variant};

use common::*;

fn settings(jobs: usize) -> RunSettings {
    RunSettings {
        jobs,
        ..RunSettings::default()
    }
}

#[test]
fn salient_objects_score_well() {
    let data = write_dataset(6, 61);
    let manifest = DatasetManifest::load(&data.manifest).unwrap();
    let report = run_dataset(&manifest, &small_config(), &settings(2)).unwrap();
    assert_eq!(report.failures(), 0);
    assert!(report.mean(Metric::Nss).unwrap() > 0.0);
    assert!(report.mean(Metric::Auc).unwrap() > 0.9);
    assert!(report.mean(Metric::Cc).unwrap() > 0.0);
    assert!(report.mean(Metric::Emd).unwrap() > 0.0);
    let cats: Vec<&str> = report.categories.iter().map(|g| g.category.as_str()).collect();
    assert_eq!(cats, ["odd-one", "plain"]);
    assert_eq!(report.categories.iter().map(|g| g.images).sum::<usize>(), 6);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let data = write_dataset(5, 62);
    let manifest = DatasetManifest::load(&data.manifest).unwrap();
    let one = run_dataset(&manifest, &small_config(), &settings(1)).unwrap();
    let four = run_dataset(&manifest, &small_config(), &settings(4)).unwrap();
    assert_eq!(one.to_csv(), four.to_csv());
    assert_eq!(one.to_json(), four.to_json());
    let csv = one.to_csv();
    assert!(csv.starts_with("# config: {"));
    assert_eq!(csv.lines().count(), 2 + 5 * 4);
}

#[test]
fn failing_entries_are_reported_not_fatal() {
    let data = write_dataset(3, 63);
    std::fs::write(data.dir.path().join("fix0.txt"), "x,y\n").unwrap();
    let manifest = DatasetManifest::load(&data.manifest).unwrap();
    let report = run_dataset(&manifest, &small_config(), &settings(1)).unwrap();
    assert_eq!(report.failures(), 1);
    assert!(report.entries[0].error.is_some());
    assert!(report.to_csv().contains(",error,"));
    assert_eq!(report.overall[0].count, 2);
}

#[test]
fn entries_without_category_form_their_own_group() {
    let data = write_dataset(3, 64);
    let text = std::fs::read_to_string(&data.manifest).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["entries"][1].as_object_mut().unwrap().remove("category");
    let manifest = DatasetManifest::from_json(&json.to_string(), data.dir.path()).unwrap();
    let report = run_dataset(&manifest, &small_config(), &settings(1)).unwrap();
    assert!(report.categories.iter().any(|g| g.category == UNCATEGORIZED && g.images == 1));
}

#[test]
fn export_reuses_cached_maps() {
    let data = write_dataset(2, 65);
    let manifest = DatasetManifest::load(&data.manifest).unwrap();
    let out = data.dir.path().join("maps");
    let cfg = SdsConfig::default();
    let first = export_maps(&manifest, &cfg, &out).unwrap();
    assert!(first.iter().all(|r| r.error.is_none() && !r.cache_hit));
    let native = first[0].native.clone().unwrap();
    let full = first[0].full.clone().unwrap();
    let (native_bytes, full_bytes) = (std::fs::read(&native).unwrap(), std::fs::read(&full).unwrap());

    let second = export_maps(&manifest, &cfg, &out).unwrap();
    assert!(second.iter().all(|r| r.cache_hit));
    assert_eq!(std::fs::read(&native).unwrap(), native_bytes);
    assert_eq!(std::fs::read(&full).unwrap(), full_bytes);

    let map = load_gray(&native).unwrap();
    assert_eq!(map.height().min(map.width()), 11);
    let full_map = load_gray(&full).unwrap();
    assert_eq!((full_map.height(), full_map.width()), (DATASET_H, DATASET_W));

    let other = SdsConfig { theta: 2.0, ..cfg };
    assert!(export_maps(&manifest, &other, &out).unwrap().iter().all(|r| !r.cache_hit));
}

#[test]
fn theta_leaves_native_resolution_auc_unchanged() {
    let data = write_dataset(4, 66);
    let manifest = DatasetManifest::load(&data.manifest).unwrap();
    let cfg = small_config();
    for (entry, &(r0, c0, side)) in manifest.entries.iter().zip(&data.objects) {
        let img = load_image(manifest.resolve(&entry.image)).unwrap();
        let (m, n) = (DATASET_H / cfg.w, DATASET_W / cfg.w);
        let fix = FixationMap::from_points(m, n, &[((r0 + side / 2) / cfg.w, (c0 + side / 2) / cfg.w), (0, 0)]);
        let aucs: Vec<f64> = [1.0, 2.0, 8.0]
            .iter()
            .map(|&theta| {
                let map = predict(&img, &SdsConfig { theta, ..cfg }).unwrap();
                auc_judd(&map, &fix).unwrap().unwrap()
            })
            .collect();
        assert_eq!(aucs[0], aucs[1]);
        assert_eq!(aucs[0], aucs[2]);
    }
}

#[test]
fn sigma2_sweep_covers_every_value() {
    let data = write_dataset(3, 67);
    let manifest = DatasetManifest::load(&data.manifest).unwrap();
    let values: Vec<f64> = (1..=10).map(f64::from).collect();
    let table = sweep(&manifest, &small_config(), SweepParam::Sigma2, &values, &settings(2)).unwrap();
    assert_eq!(table.runs.len(), 10);
    for (_, report) in &table.runs {
        assert!(report.overall.iter().all(|s| s.mean.is_some_and(f64::is_finite)));
    }
    let csv = table.to_csv();
    // header + 10 values x (all + 2 categories) x 4 metrics
    assert_eq!(csv.lines().count(), 1 + 10 * 3 * 4);
    assert!(csv.lines().nth(1).unwrap().starts_with("sigma2,1,all,nss,"));
}

#[test]
fn ablation_runs_every_cell_and_compares() {
    let data = write_dataset(4, 68);
    let manifest = DatasetManifest::load(&data.manifest).unwrap();
    let metrics = RunSettings {
        metrics: vec![Metric::Nss, Metric::Auc],
        jobs: 2,
        ..RunSettings::default()
    };
    let matrix = ablate(&manifest, &small_config(), &metrics).unwrap();
    assert_eq!(matrix.cells.len(), 11);
    assert!(matrix.cells.iter().all(|(_, r)| r.failures() == 0));
    assert_eq!(matrix.to_csv().lines().count(), 1 + 11 * 2);
    let base = matrix.get("yiq+gm").unwrap();
    let center = matrix.get("center-only").unwrap();
    assert_eq!(center.config.model.variant, Variant::CenterOnly);
    let result = compare(base, center, Metric::Nss, 0.05).unwrap();
    assert_eq!(result.df, 3);
    assert!(compare(base, base, Metric::Nss, 0.05).unwrap().p_value == 1.0);
}

fn sds_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sds"))
}

#[test]
fn cli_run_writes_full_and_native_maps() {
    let data = write_dataset(1, 69);
    let (out, native) = (data.dir.path().join("map.png"), data.dir.path().join("map.pgm"));
    let status = sds_cmd()
        .args(["run", "--image", path_str(&data.dir.path().join("img0.png"))])
        .args(["--out", path_str(&out), "--native", path_str(&native)])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let full = load_gray(&out).unwrap();
    assert_eq!((full.height(), full.width()), (DATASET_H, DATASET_W));
    let small = load_gray(&native).unwrap();
    assert_eq!((small.height(), small.width()), (11, 15));
}

#[test]
fn cli_reports_errors_as_json() {
    let output = sds_cmd()
        .args(["bench", "--manifest", "/nonexistent/manifest.json", "--out", "/tmp/unused"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "io");

    let output = sds_cmd()
        .args(["run", "--image", "x.png", "--out", "y.png", "--c=-1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid_config");
}

#[test]
fn cli_sweep_and_export_resolve_the_dataset_root() {
    let data = write_dataset(2, 70);
    let out = data.dir.path().join("sweep");
    let output = sds_cmd()
        .env("SDS_DATASET_ROOT", data.dir.path())
        .args(["sweep", "--manifest", "manifest.json", "--out", path_str(&out)])
        .args(["--param", "c", "--values", "1,20", "--w", "4", "--min-patches", "12", "--metrics", "nss,auc"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.contains("c,20,all,auc,"));

    let maps = data.dir.path().join("maps");
    let output = sds_cmd()
        .args(["export", "--manifest", path_str(&data.manifest), "--out", path_str(&maps)])
        .output()
        .unwrap();
    assert!(output.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(summary["exported"], 2);
    assert!(maps.join("img1_full.png").exists());
}
