//! Shared reference implementations and fixtures for the integration tests.
//!
//! The oracles here are deliberately naive: they follow the textbook
//! definitions loop by loop and share no code with the library beyond the
//! image container.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use image::{GrayImage, Luma, Rgb, RgbImage};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sds::imaging::PlanarImage;
use sds::sds::Measure;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

pub fn random_map(rng: &mut impl Rng, h: usize, w: usize) -> PlanarImage {
    PlanarImage::from_fn(h, w, |_, _| rng.gen::<f64>())
}

/// Pre-normalization salience of every patch computed literally: for each
/// patch `x`, build the duplication map, the dissimilarity map and the
/// spatial weight map pixel by pixel, then sum.
#[allow(clippy::too_many_arguments)]
pub fn oracle_saliences(
    features: &[Vec<f64>],
    m: usize,
    n: usize,
    w: usize,
    c: f64,
    sigma2: f64,
    theta: f64,
    measure: Measure,
) -> Vec<f64> {
    let (h, wd) = (m * w, n * w);
    let mut out = Vec::with_capacity(m * n);
    for xr in 0..m {
        for xc in 0..n {
            let mut total = 0.0;
            for py in 0..h {
                for px in 0..wd {
                    let ry = xr * w + py % w;
                    let rx = xc * w + px % w;
                    let mut sum = 0.0;
                    for f in features {
                        let a = f[py * wd + px];
                        let b = f[ry * wd + rx];
                        sum += match measure {
                            Measure::Relative => {
                                let den = a * a + b * b + c;
                                if den == 0.0 {
                                    0.0
                                } else {
                                    (a - b) * (a - b) / den
                                }
                            }
                            Measure::Absolute => (a - b) * (a - b),
                        };
                    }
                    let d = sum.sqrt();
                    let (yr, yc) = ((py / w) as f64, (px / w) as f64);
                    let dist2 = (yr - xr as f64).powi(2) + (yc - xc as f64).powi(2);
                    total += d * (-dist2 / (2.0 * sigma2)).exp();
                }
            }
            out.push(total.powf(theta));
        }
    }
    out
}

pub fn oracle_nss(sal: &[f64], fix: &[bool]) -> Option<f64> {
    let n = sal.len() as f64;
    let mean = sal.iter().sum::<f64>() / n;
    let var = sal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if sal.iter().all(|&v| v == sal[0]) {
        return None;
    }
    let std = var.sqrt();
    let picked: Vec<f64> = sal
        .iter()
        .zip(fix)
        .filter(|(_, &f)| f)
        .map(|(&v, _)| (v - mean) / std)
        .collect();
    Some(picked.iter().sum::<f64>() / picked.len() as f64)
}

pub fn oracle_cc(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if a.iter().all(|&v| v == a[0]) || b.iter().all(|&v| v == b[0]) {
        return None;
    }
    Some(sab / (saa.sqrt() * sbb.sqrt()))
}

/// ROC area enumerating every distinct fixated value as a threshold and
/// counting pixels at or above it directly.
pub fn oracle_auc(sal: &[f64], fix: &[bool]) -> Option<f64> {
    let n_fix = fix.iter().filter(|&&f| f).count();
    let n_other = sal.len() - n_fix;
    if n_other == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = sal
        .iter()
        .zip(fix)
        .filter(|(_, &f)| f)
        .map(|(&v, _)| v)
        .collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut points = vec![(0.0, 0.0)];
    for t in thresholds {
        let tp = sal.iter().zip(fix).filter(|(&v, &f)| f && v >= t).count();
        let fp = sal.iter().zip(fix).filter(|(&v, &f)| !f && v >= t).count();
        points.push((fp as f64 / n_other as f64, tp as f64 / n_fix as f64));
    }
    points.push((1.0, 1.0));
    let mut area = 0.0;
    for pair in points.windows(2) {
        area += (pair[1].0 - pair[0].0) * (pair[0].1 + pair[1].1) / 2.0;
    }
    Some(area)
}

/// EMD between two `h x w` maps (already on the comparison grid) solved as a
/// dense linear program.
pub fn oracle_emd(a: &[f64], b: &[f64], w: usize) -> f64 {
    let norm = |v: &[f64]| {
        let clipped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        clipped.into_iter().map(|x| x / total).collect::<Vec<_>>()
    };
    let (a, b) = (norm(a), norm(b));
    let n = a.len();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut vars = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (yi, xi) = ((i / w) as f64, (i % w) as f64);
            let (yj, xj) = ((j / w) as f64, (j % w) as f64);
            let cost = ((yi - yj).powi(2) + (xi - xj).powi(2)).sqrt();
            vars.push(problem.add_var(cost, (0.0, f64::INFINITY)));
        }
    }
    for i in 0..n {
        let row: Vec<_> = (0..n).map(|j| (vars[i * n + j], 1.0)).collect();
        problem.add_constraint(&row, ComparisonOp::Eq, a[i]);
    }
    // one demand row is implied by the others
    for j in 0..n - 1 {
        let col: Vec<_> = (0..n).map(|i| (vars[i * n + j], 1.0)).collect();
        problem.add_constraint(&col, ComparisonOp::Eq, b[j]);
    }
    problem.solve().expect("feasible transport problem").objective()
}

/// A small synthetic benchmark: textured gray backgrounds with one strongly
/// colored, textured square per image, aligned to 4-pixel patches and
/// fixated only inside the square.
pub struct Dataset {
    pub dir: tempfile::TempDir,
    pub manifest: PathBuf,
    /// Square position `(row0, col0, side)` per image.
    pub objects: Vec<(usize, usize, usize)>,
}

pub const DATASET_H: usize = 48;
pub const DATASET_W: usize = 64;

pub fn write_dataset(images: usize, seed: u64) -> Dataset {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rng(seed);
    let mut entries = Vec::new();
    let mut objects = Vec::new();
    for k in 0..images {
        let side = 8;
        let r0 = 4 * rng.gen_range(1..(DATASET_H - side) / 4);
        let c0 = 4 * rng.gen_range(1..(DATASET_W - side) / 4);
        let img = RgbImage::from_fn(DATASET_W as u32, DATASET_H as u32, |x, y| {
            let (x, y) = (x as usize, y as usize);
            if (r0..r0 + side).contains(&y) && (c0..c0 + side).contains(&x) {
                let t = if (x + y) % 2 == 0 { 40 } else { 0 };
                Rgb([200 + t as u8 / 2, 30 + t as u8, 20])
            } else {
                let v = 110 + rng.gen_range(0..6u8);
                Rgb([v, v, v])
            }
        });
        let name = format!("img{k}.png");
        img.save(dir.path().join(&name)).unwrap();

        let points: Vec<(usize, usize)> = (0..6)
            .map(|_| (rng.gen_range(r0 + 1..r0 + side - 1), rng.gen_range(c0 + 1..c0 + side - 1)))
            .collect();
        let fix_name = if k % 2 == 0 {
            let name = format!("fix{k}.txt");
            let body: String = std::iter::once("x,y\n".to_string())
                .chain(points.iter().map(|(r, c)| format!("{c},{r}\n")))
                .collect();
            std::fs::write(dir.path().join(&name), body).unwrap();
            name
        } else {
            let name = format!("fix{k}.png");
            let mut fix = GrayImage::new(DATASET_W as u32, DATASET_H as u32);
            for &(r, c) in &points {
                fix.put_pixel(c as u32, r as u32, Luma([255]));
            }
            fix.save(dir.path().join(&name)).unwrap();
            name
        };
        let category = if k % 3 == 0 { "odd-one" } else { "plain" };
        entries.push(serde_json::json!({
            "image": name,
            "fixations": fix_name,
            "category": category,
        }));
        objects.push((r0, c0, side));
    }
    let manifest = dir.path().join("manifest.json");
    let body = serde_json::json!({ "name": "synthetic", "entries": entries });
    std::fs::write(&manifest, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    Dataset {
        dir,
        manifest,
        objects,
    }
}

/// Model configuration sized for the synthetic dataset: 4-pixel patches on
/// a 12 x 16 grid, so images are used at native resolution.
pub fn small_config() -> sds::SdsConfig {
    sds::SdsConfig {
        w: 4,
        min_patches: 12,
        ..sds::SdsConfig::default()
    }
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
