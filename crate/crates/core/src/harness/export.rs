use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::manifest::{DatasetManifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::imaging::{decode_dims, save_pgm, save_png, PlanarImage};
use crate::metrics::fit_to;
use crate::sds::{predict, SdsConfig};

const CACHE_MAGIC: &[u8; 8] = b"SDSMAP1\n";

#[derive(Debug, Clone, PartialEq)]
pub struct ExportRecord {
    pub index: usize,
    pub image: PathBuf,
    pub native: Option<PathBuf>,
    pub full: Option<PathBuf>,
    pub cache_hit: bool,
    pub error: Option<String>,
}

fn cache_key(cfg: &SdsConfig, image_bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(cfg).expect("serializable config"));
    hasher.update([0u8]);
    hasher.update(image_bytes);
    hex::encode(hasher.finalize())
}

fn write_cache(path: &Path, map: &PlanarImage) -> Result<()> {
    let mut bytes = Vec::with_capacity(24 + 8 * map.data().len());
    bytes.extend_from_slice(CACHE_MAGIC);
    bytes.extend_from_slice(&(map.height() as u64).to_le_bytes());
    bytes.extend_from_slice(&(map.width() as u64).to_le_bytes());
    for v in map.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_cache(path: &Path) -> Option<PlanarImage> {
    let bytes = fs::read(path).ok()?;
    let body = bytes.strip_prefix(CACHE_MAGIC.as_slice())?;
    let word = |i: usize| -> Option<u64> { Some(u64::from_le_bytes(body.get(i * 8..i * 8 + 8)?.try_into().ok()?)) };
    let (h, w) = (word(0)? as usize, word(1)? as usize);
    let values: Vec<f64> = body
        .get(16..)?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PlanarImage::from_vec(h, w, 1, values).ok()
}

fn export_one(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    cfg: &SdsConfig,
    out_dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf, bool)> {
    let image_path = manifest.resolve(&entry.image);
    let bytes = fs::read(&image_path).map_err(|e| Error::io(&image_path, e))?;
    let cache_dir = out_dir.join(".cache");
    fs::create_dir_all(&cache_dir).map_err(|e| Error::io(&cache_dir, e))?;
    let cache_path = cache_dir.join(format!("{}.map", cache_key(cfg, &bytes)));

    let (map, hit, dims) = match read_cache(&cache_path) {
        Some(map) => (map, true, decode_dims(&image_path)?),
        None => {
            let image = crate::imaging::load_image(&image_path)?;
            let map = predict(&image, cfg)?;
            write_cache(&cache_path, &map)?;
            (map, false, (image.height(), image.width()))
        }
    };

    let native = out_dir.join(format!("{stem}_native.pgm"));
    let full = out_dir.join(format!("{stem}_full.png"));
    save_pgm(&map, &native)?;
    save_png(&fit_to(&map, dims.0, dims.1), &full)?;
    Ok((native, full, hit))
}

/// Writes the native map (PGM) and the map upsampled to the input size (PNG)
/// for every entry. Computed maps are cached under `out_dir/.cache`, keyed
/// by a hash of the configuration and the image bytes.
pub fn export_maps(manifest: &DatasetManifest, cfg: &SdsConfig, out_dir: &Path) -> Result<Vec<ExportRecord>> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut used = HashSet::new();
    let mut records = Vec::with_capacity(manifest.entries.len());
    for (index, entry) in manifest.entries.iter().enumerate() {
        let base = entry
            .image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("image{index}"));
        let stem = if used.insert(base.clone()) {
            base
        } else {
            format!("{base}_{index}")
        };
        let mut record = ExportRecord {
            index,
            image: entry.image.clone(),
            native: None,
            full: None,
            cache_hit: false,
            error: None,
        };
        match export_one(manifest, entry, cfg, out_dir, &stem) {
            Ok((native, full, hit)) => {
                record.native = Some(native);
                record.full = Some(full);
                record.cache_hit = hit;
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        records.push(record);
    }
    Ok(records)
}
