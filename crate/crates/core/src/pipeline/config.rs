//! Pipeline configuration — one TOML file with per-stage sections — and the
//! on-disk layout the stages communicate through.
//!
//! A minimal configuration:
//!
//! ```toml
//! [run]
//! out_dir = "campaign"
//!
//! [scene]
//! seed = 7
//!
//! [scene.timing]
//! duration_s = 122.0
//! radar_frames = 248
//! camera_frames = 1220
//!
//! [[scene.objects]]
//! class = "pedestrians"
//! start = [18.0, -2.0]
//! velocity = [1.0, 0.0]
//!
//! [grid]
//! origin_x = 0.0
//! origin_y = -20.0
//! cell_size_m = 0.2
//! nx = 200
//! ny = 200
//! ```
//!
//! The `[fusion]`, `[perturb]`, and `[eval]` sections default to a 50 ms
//! pairing window with a 0.5 m margin, no label perturbation, and the
//! standard 0.50:0.05:0.95 IoU sweep. Everything is validated up front so a
//! broken configuration fails before any stage writes a byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FormatSet;
use crate::grid::GridSpec;
use crate::metrics::{MatchSpec, COCO_THRESHOLDS};
use crate::radar::CfarConfig;
use crate::seg::{ClassId, PerturbParams};
use crate::sim::Scene;

/// Run-wide plumbing: output directory, worker count, artifact formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Root directory for all stage outputs.
    pub out_dir: PathBuf,
    /// Worker-pool size for frame-parallel sections; library default when
    /// omitted (all cores with the `parallel` feature, one without).
    pub jobs: Option<usize>,
    /// Comma-separated artifact formats for the emitted dataset
    /// (`rd,rda,targets,features`); all four when omitted.
    pub formats: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            out_dir: PathBuf::from("out"),
            jobs: None,
            formats: None,
        }
    }
}

/// Knobs of the fuse stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionSection {
    /// Largest |camera stamp − radar stamp| that still pairs the frames.
    pub max_skew_s: f64,
    /// World-box padding applied before the range–azimuth conversion, so
    /// label, sync, and pose errors up to this size keep the true object
    /// inside the crop.
    pub margin_m: f64,
    /// Detector configuration for the `targets`/`features` artifacts.
    pub cfar: CfarConfig,
}

impl Default for FusionSection {
    fn default() -> Self {
        FusionSection {
            max_skew_s: 0.05,
            margin_m: 0.5,
            cfar: CfarConfig::default(),
        }
    }
}

impl FusionSection {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_skew_s >= 0.0 && self.max_skew_s.is_finite()) {
            return Err(Error::Config(format!(
                "fusion.max_skew_s must be finite and non-negative, got {}",
                self.max_skew_s
            )));
        }
        if !(self.margin_m >= 0.0 && self.margin_m.is_finite()) {
            return Err(Error::Config(format!(
                "fusion.margin_m must be finite and non-negative, got {}",
                self.margin_m
            )));
        }
        self.cfar.validate()
    }
}

/// Knobs of the evaluate stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// IoU thresholds for the average-precision sweep.
    pub iou_thresholds: Vec<f64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            iou_thresholds: COCO_THRESHOLDS.to_vec(),
        }
    }
}

/// The whole pipeline configuration. Every stage reads the same file; the
/// stages communicate only through the files under `run.out_dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub run: RunSection,
    pub scene: Scene,
    /// World ground grid that image instances are projected onto.
    pub grid: GridSpec,
    pub fusion: FusionSection,
    /// Label degradation applied to the simulated camera frames, emulating
    /// an imperfect segmentation network. Identity by default.
    pub perturb: PerturbParams,
    pub eval: EvalSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            run: RunSection::default(),
            scene: Scene::default(),
            // 40 m x 40 m in front of the default radar at 0.2 m cells.
            grid: GridSpec {
                origin_x: 0.0,
                origin_y: -20.0,
                cell_size_m: 0.2,
                nx: 200,
                ny: 200,
            },
            fusion: FusionSection::default(),
            perturb: PerturbParams::default(),
            eval: EvalSection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<PipelineConfig> {
        toml::from_str(text).map_err(|e| {
            Error::Config(format!("pipeline config {}: {e}", origin.display()))
        })
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingInput(path.to_path_buf())
            } else {
                Error::io(path, e)
            }
        })?;
        PipelineConfig::from_toml_str(&text, path)
    }

    /// Command-line overrides, applied after loading and before validation.
    pub fn apply_overrides(
        &mut self,
        out: Option<&Path>,
        jobs: Option<usize>,
        seed: Option<u64>,
        formats: Option<&str>,
    ) {
        if let Some(out) = out {
            self.run.out_dir = out.to_path_buf();
        }
        if let Some(jobs) = jobs {
            self.run.jobs = Some(jobs);
        }
        if let Some(seed) = seed {
            self.scene.seed = seed;
        }
        if let Some(formats) = formats {
            self.run.formats = Some(formats.to_string());
        }
    }

    /// Fail-fast validation of every section.
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.grid.validate()?;
        self.fusion.validate()?;
        self.perturb.validate()?;
        self.match_spec().validate()?;
        self.formats()?;
        if let Some(0) = self.run.jobs {
            return Err(Error::Config("run.jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn formats(&self) -> Result<FormatSet> {
        match &self.run.formats {
            Some(spec) => FormatSet::parse(spec),
            None => Ok(FormatSet::all()),
        }
    }

    pub fn match_spec(&self) -> MatchSpec {
        MatchSpec {
            iou_thresholds: self.eval.iou_thresholds.clone(),
        }
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.run.out_dir)
    }
}

/// Where each stage reads and writes under the run's output directory:
///
/// ```text
/// <out_dir>/
///   sim/
///     truth.jsonl            one ground-truth record per radar frame
///     radar/index.json       raw-cube listing with timestamps
///     radar/frameNNNNN.rdc   raw ADC cubes
///     camera/index.json      label-frame listing with timestamps
///     camera/frameNNNNN.{classes.png,instances.png,toml}
///   proc/
///     index.json             processed-cube listing with timestamps
///     rda/frameNNNNN.rda.bin range–Doppler–azimuth cubes
///   fuse/
///     dataset/               emitted artifacts + manifest.jsonl
///     skips.jsonl            why frames/instances were dropped
///     summary.json           paired/detected/mapped ledger counts
///   eval/
///     metrics.json, metrics.txt
///   report.txt
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn sim_dir(&self) -> PathBuf {
        self.root.join("sim")
    }

    pub fn radar_dir(&self) -> PathBuf {
        self.sim_dir().join("radar")
    }

    pub fn camera_dir(&self) -> PathBuf {
        self.sim_dir().join("camera")
    }

    pub fn truth_path(&self) -> PathBuf {
        self.sim_dir().join("truth.jsonl")
    }

    pub fn radar_index_path(&self) -> PathBuf {
        self.radar_dir().join("index.json")
    }

    pub fn camera_index_path(&self) -> PathBuf {
        self.camera_dir().join("index.json")
    }

    pub fn proc_dir(&self) -> PathBuf {
        self.root.join("proc")
    }

    pub fn rda_dir(&self) -> PathBuf {
        self.proc_dir().join("rda")
    }

    pub fn proc_index_path(&self) -> PathBuf {
        self.proc_dir().join("index.json")
    }

    pub fn fuse_dir(&self) -> PathBuf {
        self.root.join("fuse")
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.fuse_dir().join("dataset")
    }

    pub fn skips_path(&self) -> PathBuf {
        self.fuse_dir().join("skips.jsonl")
    }

    pub fn fusion_summary_path(&self) -> PathBuf {
        self.fuse_dir().join("summary.json")
    }

    pub fn eval_dir(&self) -> PathBuf {
        self.root.join("eval")
    }

    pub fn metrics_json_path(&self) -> PathBuf {
        self.eval_dir().join("metrics.json")
    }

    pub fn metrics_text_path(&self) -> PathBuf {
        self.eval_dir().join("metrics.txt")
    }

    pub fn report_path(&self) -> PathBuf {
        self.root.join("report.txt")
    }
}

/// One frame file in a stage's index: path relative to the index's
/// directory plus the frame's own stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFileEntry {
    pub index: usize,
    pub file: String,
    pub timestamp: f64,
}

/// One camera frame in the simulation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraIndexEntry {
    pub index: usize,
    pub classes: String,
    pub instances: String,
    pub timestamp: f64,
}

/// Ledger counts produced by the fuse stage: how many instance appearances
/// the label frames contained (detected) and how many ended up as emitted
/// annotations (mapped), overall and per class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FusionSummary {
    pub radar_frames: usize,
    pub paired_frames: usize,
    pub detected_instances: usize,
    pub mapped_instances: usize,
    pub per_class_detected: BTreeMap<ClassId, usize>,
    pub per_class_mapped: BTreeMap<ClassId, usize>,
    /// Skip-ledger entry counts by pipeline step.
    pub skipped: BTreeMap<String, usize>,
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}
