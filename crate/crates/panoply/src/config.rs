//! Pipeline configuration: a TOML file naming the inputs, outputs, and the
//! numeric parameters of every stage. Relative paths resolve against the
//! config file's directory. CLI flags may override the run parameters.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classes::ClassTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default)]
    pub panorama: PanoramaConfig,
    #[serde(default)]
    pub projection: ProjectionConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Every stage writes beneath this directory.
    pub output_dir: PathBuf,
    /// Equirectangular capture frames (PNG/JPEG), ordered by file name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames_dir: Option<PathBuf>,
    /// Where face masks live; defaults to `<output_dir>/face_masks`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_masks_dir: Option<PathBuf>,
    /// Per-face suppression rasters (same file names as the face images).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suppression_dir: Option<PathBuf>,
    /// Photogrammetric point cloud (PLY).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<PathBuf>,
    /// Camera pose manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poses: Option<PathBuf>,
    /// Building model surface mesh (OBJ or PLY).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    /// Registration point pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<PathBuf>,
    /// Surveyed ground-truth assets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<PathBuf>,
    /// Class table manifest; the built-in table applies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PanoramaConfig {
    /// Faces per ring; three rings exist, so a frame yields 3 × nb_splits.
    pub nb_splits: u32,
    /// Side length of each square face view, pixels.
    pub face_resolution: u32,
    /// Width of the equirectangular frames; height is width / 2.
    pub width: u32,
}

impl Default for PanoramaConfig {
    fn default() -> Self {
        PanoramaConfig {
            nb_splits: 6,
            face_resolution: 640,
            width: 3840,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionConfig {
    /// Only points within this distance (meters) of a camera receive votes.
    pub radius: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig { radius: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    /// Matching gate (meters) between predictions and ground truth.
    pub max_dist: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig { max_dist: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    /// Synthetic model-cloud point budget.
    pub total_points: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            total_points: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    /// Segmentation backend command; `{manifest}` and `{output}` are
    /// substituted and the result runs under `sh -c`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segmenter: Option<String>,
}

/// CLI overrides applied on top of a loaded config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub radius: Option<f64>,
    pub max_dist: Option<f64>,
}

impl PipelineConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::parse(path, 0, e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn emit(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply_overrides(&mut self, overrides: &Overrides) {
        if let Some(workers) = overrides.workers {
            self.run.workers = workers;
        }
        if let Some(seed) = overrides.seed {
            self.run.seed = seed;
        }
        if let Some(radius) = overrides.radius {
            self.projection.radius = radius;
        }
        if let Some(max_dist) = overrides.max_dist {
            self.evaluation.max_dist = max_dist;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.panorama;
        if p.nb_splits == 0 {
            return Err(Error::invalid_input("panorama.nb_splits must be positive"));
        }
        if p.face_resolution == 0 {
            return Err(Error::invalid_input(
                "panorama.face_resolution must be positive",
            ));
        }
        if p.width == 0 || !p.width.is_multiple_of(2) {
            return Err(Error::invalid_input(
                "panorama.width must be a positive even number",
            ));
        }
        if !self.projection.radius.is_finite() || self.projection.radius <= 0.0 {
            return Err(Error::invalid_input("projection.radius must be positive"));
        }
        if !self.evaluation.max_dist.is_finite() || self.evaluation.max_dist <= 0.0 {
            return Err(Error::invalid_input("evaluation.max_dist must be positive"));
        }
        if self.sampling.total_points == 0 {
            return Err(Error::invalid_input(
                "sampling.total_points must be positive",
            ));
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        resolve(&mut self.paths.output_dir);
        for p in [
            &mut self.paths.frames_dir,
            &mut self.paths.face_masks_dir,
            &mut self.paths.suppression_dir,
            &mut self.paths.cloud,
            &mut self.paths.poses,
            &mut self.paths.mesh,
            &mut self.paths.pairs,
            &mut self.paths.ground_truth,
            &mut self.paths.class_table,
        ]
        .into_iter()
        .flatten()
        {
            resolve(p);
        }
    }

    /// Height of the equirectangular frames (width / 2).
    pub fn pano_height(&self) -> u32 {
        self.panorama.width / 2
    }

    pub fn face_masks_dir(&self) -> PathBuf {
        self.paths
            .face_masks_dir
            .clone()
            .unwrap_or_else(|| self.paths.output_dir.join("face_masks"))
    }

    /// Loads the configured class table, or the built-in default.
    pub fn class_table(&self) -> Result<ClassTable> {
        match &self.paths.class_table {
            Some(path) => ClassTable::load(path),
            None => Ok(ClassTable::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> PipelineConfig {
        PipelineConfig {
            paths: Paths {
                output_dir: PathBuf::from("out"),
                frames_dir: Some(PathBuf::from("frames")),
                face_masks_dir: None,
                suppression_dir: None,
                cloud: Some(PathBuf::from("cloud.ply")),
                poses: Some(PathBuf::from("poses.txt")),
                mesh: None,
                pairs: None,
                ground_truth: None,
                class_table: None,
            },
            panorama: PanoramaConfig::default(),
            projection: ProjectionConfig::default(),
            evaluation: EvaluationConfig::default(),
            sampling: SamplingConfig::default(),
            run: RunConfig::default(),
        }
    }

    #[test]
    fn round_trip_is_value_identical() {
        let config = minimal();
        let text = config.emit();
        let parsed = PipelineConfig::parse(&text, Path::new("panoply.toml")).unwrap();
        assert_eq!(config, parsed);
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let text = "[paths]\noutput_dir = \"out\"\n";
        let config = PipelineConfig::parse(text, Path::new("panoply.toml")).unwrap();
        assert_eq!(config.panorama.nb_splits, 6);
        assert_eq!(config.projection.radius, 5.0);
        assert_eq!(config.evaluation.max_dist, 1.5);
        assert_eq!(config.sampling.total_points, 1_000_000);
        assert_eq!(config.pano_height(), 1920);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[paths]\noutput_dir = \"out\"\nbogus = 1\n";
        assert!(PipelineConfig::parse(text, Path::new("panoply.toml")).is_err());
    }

    #[test]
    fn bad_numbers_are_rejected() {
        let mut config = minimal();
        config.projection.radius = 0.0;
        assert!(config.validate().is_err());
        let mut config = minimal();
        config.panorama.width = 3841;
        assert!(config.validate().is_err());
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("panoply.toml");
        std::fs::write(&path, "[paths]\noutput_dir = \"out\"\n").unwrap();
        let config = PipelineConfig::load(&path).unwrap();
        assert_eq!(config.paths.output_dir, dir.path().join("out"));
    }

    #[test]
    fn overrides_apply() {
        let mut config = minimal();
        config.apply_overrides(&Overrides {
            workers: Some(3),
            seed: Some(9),
            radius: Some(2.5),
            max_dist: Some(0.75),
        });
        assert_eq!(config.run.workers, 3);
        assert_eq!(config.run.seed, 9);
        assert_eq!(config.projection.radius, 2.5);
        assert_eq!(config.evaluation.max_dist, 0.75);
    }
}
