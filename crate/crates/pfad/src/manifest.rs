//! Dataset manifests: which corrupted file came from which clean file,
//! and the exact simulator parameters that produced it.
//!
//! The JSON on disk stores paths relative to the manifest's own
//! directory, so a dataset directory can be moved wholesale. Parameters
//! are stored as full-precision floats (serde emits shortest
//! round-tripping decimal), which is what makes regeneration
//! bit-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PfadError, Result};
use crate::image::Image;
use crate::sim::{simulate_respiratory, simulate_rigid, RespiratoryParams, RigidMotionParams};

/// Current manifest schema version.
pub const MANIFEST_VERSION: u32 = 1;

/// A simulated-corpus description, one entry per image pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub manifest_version: u32,
    pub entries: Vec<ManifestEntry>,
}

/// One clean/corrupted pair and the event that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Clean image, relative to the manifest directory.
    pub clean_path: String,
    /// Corrupted image, relative to the manifest directory.
    pub corrupted_path: String,
    /// Seed recorded for provenance of the sampled parameters.
    pub seed: u64,
    /// The full parameter record; sufficient to regenerate the
    /// corrupted image from the clean one.
    pub params: SimEvent,
}

/// Simulator parameters, tagged by artifact model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimEvent {
    Rigid {
        delta_k: f64,
        rotation_deg: f64,
        k0: f64,
        pixel_spacing_cm: f64,
    },
    Respiratory {
        delta_k: f64,
        period_m: f64,
        phase_n: f64,
        k0: f64,
        pixel_spacing_cm: f64,
    },
}

impl SimEvent {
    /// Applies the recorded event to a clean image.
    pub fn simulate(&self, clean: &Image, seed: u64) -> Result<Image> {
        match *self {
            SimEvent::Rigid {
                delta_k,
                rotation_deg,
                k0,
                pixel_spacing_cm,
            } => simulate_rigid(
                clean,
                &RigidMotionParams {
                    delta_k,
                    rotation_deg,
                    k0,
                    pixel_spacing_cm,
                    seed,
                },
            ),
            SimEvent::Respiratory {
                delta_k,
                period_m,
                phase_n,
                k0,
                pixel_spacing_cm,
            } => simulate_respiratory(
                clean,
                &RespiratoryParams {
                    delta_k,
                    period_m,
                    phase_n,
                    k0,
                    pixel_spacing_cm,
                    seed,
                },
            ),
        }
    }

    /// The tag used in reports and file listings.
    pub fn kind_name(&self) -> &'static str {
        match self {
            SimEvent::Rigid { .. } => "rigid",
            SimEvent::Respiratory { .. } => "respiratory",
        }
    }
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            entries,
        }
    }

    /// Writes the manifest as pretty JSON.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)
            .map_err(|e| PfadError::Manifest(format!("{}: {e}", path.display())))?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    /// Reads a manifest and checks that every referenced file exists
    /// next to it.
    pub fn load(path: &Path) -> Result<DatasetManifest> {
        let r = BufReader::new(File::open(path)?);
        let manifest: DatasetManifest = serde_json::from_reader(r)
            .map_err(|e| PfadError::Manifest(format!("{}: {e}", path.display())))?;
        if manifest.manifest_version != MANIFEST_VERSION {
            return Err(PfadError::Manifest(format!(
                "{}: version {} not supported (expected {MANIFEST_VERSION})",
                path.display(),
                manifest.manifest_version
            )));
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for entry in &manifest.entries {
            for rel in [&entry.clean_path, &entry.corrupted_path] {
                let p = base.join(rel);
                if !p.is_file() {
                    return Err(PfadError::Manifest(format!(
                        "{}: referenced file `{rel}` does not exist",
                        path.display()
                    )));
                }
            }
        }
        Ok(manifest)
    }

    /// Absolute (manifest-relative) paths of one entry.
    pub fn resolve(&self, manifest_path: &Path, entry: &ManifestEntry) -> (PathBuf, PathBuf) {
        let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        (
            base.join(&entry.clean_path),
            base.join(&entry.corrupted_path),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::save_png16;
    use crate::phantom::{generate_phantom, PhantomSpec};
    use std::fs;

    fn sample_entry() -> ManifestEntry {
        ManifestEntry {
            clean_path: "clean/img_000.png".to_string(),
            corrupted_path: "corrupted/img_000.png".to_string(),
            seed: 7,
            params: SimEvent::Rigid {
                delta_k: 2.5 + 0.4 / 3.0, // deliberately not short in decimal
                rotation_deg: -1.25,
                k0: std::f64::consts::PI / 10.0,
                pixel_spacing_cm: 0.4,
            },
        }
    }

    #[test]
    fn json_round_trip_preserves_parameters_exactly() {
        let manifest = DatasetManifest::new(vec![sample_entry()]);
        let text = serde_json::to_string(&manifest).unwrap();
        let back: DatasetManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, manifest);
    }

    #[test]
    fn load_checks_referenced_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let manifest = DatasetManifest::new(vec![sample_entry()]);
        manifest.save(&path).unwrap();
        // Files missing: load must fail and name the path.
        let err = DatasetManifest::load(&path).unwrap_err();
        assert!(matches!(
            &err,
            PfadError::Manifest(m) if m.contains("img_000.png")
        ));
        // Create them and the load goes through.
        let img = generate_phantom(&PhantomSpec {
            size: 16,
            ellipse_count: 2,
            intensity_range: (0.1, 0.9),
            seed: 3,
        })
        .unwrap();
        for sub in ["clean", "corrupted"] {
            fs::create_dir(dir.path().join(sub)).unwrap();
            save_png16(&dir.path().join(sub).join("img_000.png"), &img).unwrap();
        }
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(back, manifest);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let mut manifest = DatasetManifest::new(vec![]);
        manifest.manifest_version = 9;
        manifest.save(&path).unwrap();
        assert!(matches!(
            DatasetManifest::load(&path),
            Err(PfadError::Manifest(m)) if m.contains("version 9")
        ));
    }

    #[test]
    fn recorded_event_regenerates_identical_image() {
        let clean = generate_phantom(&PhantomSpec {
            size: 32,
            ellipse_count: 3,
            intensity_range: (0.1, 0.9),
            seed: 5,
        })
        .unwrap();
        let entry = sample_entry();
        let a = entry.params.simulate(&clean, entry.seed).unwrap();
        let b = entry.params.simulate(&clean, entry.seed).unwrap();
        assert_eq!(a.data(), b.data());
    }
}
