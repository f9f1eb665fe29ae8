use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{load_gray, PlanarImage};
use crate::metrics::{density_from_points, FixationData, FixationMap, DEFAULT_BLUR_FRACTION};

/// One stimulus with its eye-tracking data. Paths are relative to the
/// manifest's directory unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    /// Grayscale image (nonzero = fixated) or a text file of `x,y` pairs.
    pub fixations: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

fn default_blur() -> f64 {
    DEFAULT_BLUR_FRACTION
}

/// A dataset description loaded from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub entries: Vec<ManifestEntry>,
    /// Density blur sigma as a fraction of the fixation-map width.
    #[serde(default = "default_blur")]
    pub blur_sigma_fraction: f64,
    #[serde(skip)]
    pub root: PathBuf,
}

impl DatasetManifest {
    /// Reads and validates a manifest file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, root)
    }

    /// Parses a manifest whose relative paths resolve against `root`.
    pub fn from_json(text: &str, root: impl Into<PathBuf>) -> Result<Self> {
        let mut manifest: DatasetManifest =
            serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        manifest.root = root.into();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Manifest(format!("dataset `{}` has no entries", self.name)));
        }
        if !(self.blur_sigma_fraction >= 0.0) {
            return Err(Error::Manifest("blur_sigma_fraction must be >= 0".into()));
        }
        for (i, entry) in self.entries.iter().enumerate() {
            if let Some(cat) = &entry.category {
                if cat.trim().is_empty() {
                    return Err(Error::Manifest(format!("entry {i}: empty category label")));
                }
            }
            let files = [Some(&entry.image), Some(&entry.fixations), entry.density.as_ref()];
            for file in files.into_iter().flatten() {
                let resolved = self.resolve(file);
                if !resolved.is_file() {
                    return Err(Error::Manifest(format!(
                        "entry {i}: missing file {}",
                        resolved.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.root.join(path)
        }
    }

    pub fn categories(&self) -> Vec<String> {
        let mut cats: Vec<String> = self
            .entries
            .iter()
            .filter_map(|e| e.category.clone())
            .collect();
        cats.sort();
        cats.dedup();
        cats
    }

    /// Loads the fixation points and density of an entry. `image_dims` sizes
    /// text point lists.
    pub fn load_fixations(&self, entry: &ManifestEntry, image_dims: (usize, usize)) -> Result<FixationData> {
        let points = load_points(&self.resolve(&entry.fixations), image_dims)?;
        if points.count() == 0 {
            return Err(Error::NoFixations);
        }
        let density = match &entry.density {
            Some(path) => {
                let img = load_gray(self.resolve(path))?;
                if img.height() != points.height() || img.width() != points.width() {
                    return Err(Error::DimensionMismatch(format!(
                        "density {}x{} vs fixations {}x{}",
                        img.height(),
                        img.width(),
                        points.height(),
                        points.width()
                    )));
                }
                let total: f64 = img.data().iter().sum();
                if !(total > 0.0) {
                    return Err(Error::ZeroMass);
                }
                img.map(|v| v / total)
            }
            None => {
                let sigma = self.blur_sigma_fraction * points.width() as f64;
                density_from_points(&points, sigma)?
            }
        };
        Ok(FixationData {
            points,
            density: Some(density),
        })
    }
}

fn is_text(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref(),
        Some("txt" | "csv")
    )
}

fn load_points(path: &Path, (height, width): (usize, usize)) -> Result<FixationMap> {
    if !is_text(path) {
        let img: PlanarImage = load_gray(path)?;
        return Ok(FixationMap::from_image(&img));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(FixationMap::from_points(height, width, &parse_points(&text)))
}

/// Parses `x,y` (or whitespace separated) pairs into `(row, col)` pixels.
/// Non-numeric lines such as headers and `#` comments are skipped; negative
/// coordinates are dropped.
pub fn parse_points(text: &str) -> Vec<(usize, usize)> {
    text.lines()
        .filter_map(|line| {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                return None;
            }
            let mut fields = line
                .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                .filter(|f| !f.is_empty());
            let x: f64 = fields.next()?.parse().ok()?;
            let y: f64 = fields.next()?.parse().ok()?;
            let (x, y) = (x.round(), y.round());
            (x >= 0.0 && y >= 0.0).then_some((y as usize, x as usize))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_with_header_and_comments() {
        let text = "x,y\n# viewer 1\n10,20\n 3.6 4.2\n-1,5\n\n7;8\n";
        assert_eq!(parse_points(text), vec![(20, 10), (4, 4), (8, 7)]);
    }

    #[test]
    fn empty_manifest_is_rejected() {
        let err = DatasetManifest::from_json(r#"{"name":"x","entries":[]}"#, ".");
        assert!(matches!(err, Err(Error::Manifest(_))));
    }

    #[test]
    fn missing_file_is_rejected() {
        let json = r#"{"name":"x","entries":[{"image":"nope.png","fixations":"nope.txt"}]}"#;
        assert!(matches!(
            DatasetManifest::from_json(json, "/nonexistent"),
            Err(Error::Manifest(_))
        ));
    }
}
