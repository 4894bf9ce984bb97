//! Panoptic label frames and their on-disk representation: an 8-bit class
//! PNG, a 16-bit instance PNG, and a structured-text sidecar for timestamp,
//! pose, and per-instance scores.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::RigPose;
use crate::seg::classes::ClassId;

/// One segmented aerial frame: per-pixel class ids plus per-pixel instance
/// ids (0 = no instance). Maps are indexed `[row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanopticFrame {
    pub class_map: Array2<u8>,
    pub instance_map: Array2<u16>,
    /// Per-instance confidence in [0, 1]; instances absent from the map
    /// default to 1.0 (ground truth).
    pub scores: BTreeMap<u16, f64>,
    pub timestamp: f64,
    pub camera_pose: RigPose,
}

impl PanopticFrame {
    /// Builds and validates a frame.
    pub fn new(
        class_map: Array2<u8>,
        instance_map: Array2<u16>,
        timestamp: f64,
        camera_pose: RigPose,
    ) -> Result<Self> {
        let frame = PanopticFrame {
            class_map,
            instance_map,
            scores: BTreeMap::new(),
            timestamp,
            camera_pose,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.class_map.dim()
    }

    /// Confidence for an instance, defaulting to 1.0.
    pub fn score(&self, instance: u16) -> f64 {
        self.scores.get(&instance).copied().unwrap_or(1.0)
    }

    /// Enforces the frame invariants: equal dimensions, known class values,
    /// instances only on countable pixels, and one class per instance id.
    pub fn validate(&self) -> Result<()> {
        if self.class_map.dim() != self.instance_map.dim() {
            return Err(Error::Shape {
                context: "panoptic frame maps",
                expected: format!("{:?}", self.class_map.dim()),
                actual: format!("{:?}", self.instance_map.dim()),
            });
        }
        let (rows, cols) = self.class_map.dim();
        let mut instance_class: BTreeMap<u16, ClassId> = BTreeMap::new();
        for row in 0..rows {
            for col in 0..cols {
                let class = ClassId::from_pixel_value(self.class_map[[row, col]], col, row)?;
                let instance = self.instance_map[[row, col]];
                if instance == 0 {
                    continue;
                }
                if !class.is_countable() {
                    return Err(Error::Label(format!(
                        "instance id {instance} on uncountable {} pixel at ({col}, {row})",
                        class.name()
                    )));
                }
                if let Some(prev) = instance_class.insert(instance, class) {
                    if prev != class {
                        return Err(Error::Label(format!(
                            "instance id {instance} spans two classes: {} and {} (at pixel ({col}, {row}))",
                            prev.name(),
                            class.name()
                        )));
                    }
                }
            }
        }
        for (&id, score) in &self.scores {
            if !(0.0..=1.0).contains(score) {
                return Err(Error::Label(format!(
                    "score {score} for instance {id} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    timestamp: f64,
    pose: RigPose,
    #[serde(default)]
    scores: BTreeMap<String, f64>,
}

/// Derives the sidecar path from the class-map path: `x.classes.png` →
/// `x.toml`, otherwise the class path with a `.toml` extension.
fn sidecar_path(class_path: &Path) -> PathBuf {
    let name = class_path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    if let Some(stem) = name.strip_suffix(".classes.png") {
        class_path.with_file_name(format!("{stem}.toml"))
    } else {
        class_path.with_extension("toml")
    }
}

/// Writes `<stem>.classes.png`, `<stem>.instances.png`, and `<stem>.toml`
/// and returns the two image paths.
pub fn save_panoptic(frame: &PanopticFrame, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    frame.validate()?;
    let class_path = stem.with_file_name(format!(
        "{}.classes.png",
        stem.file_name().and_then(|n| n.to_str()).unwrap_or("frame")
    ));
    let instance_path = stem.with_file_name(format!(
        "{}.instances.png",
        stem.file_name().and_then(|n| n.to_str()).unwrap_or("frame")
    ));
    let (rows, cols) = frame.dims();

    let class_img: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_fn(
        cols as u32,
        rows as u32,
        |x, y| Luma([frame.class_map[[y as usize, x as usize]]]),
    );
    class_img
        .save(&class_path)
        .map_err(|e| Error::format(&class_path, format!("cannot encode class map: {e}")))?;

    let instance_img: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(
        cols as u32,
        rows as u32,
        |x, y| Luma([frame.instance_map[[y as usize, x as usize]]]),
    );
    instance_img
        .save(&instance_path)
        .map_err(|e| Error::format(&instance_path, format!("cannot encode instance map: {e}")))?;

    let sidecar = Sidecar {
        timestamp: frame.timestamp,
        pose: frame.camera_pose,
        scores: frame
            .scores
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
    };
    let toml_path = sidecar_path(&class_path);
    let text = toml::to_string_pretty(&sidecar)
        .map_err(|e| Error::format(&toml_path, format!("cannot serialize sidecar: {e}")))?;
    std::fs::write(&toml_path, text).map_err(|e| Error::io(&toml_path, e))?;
    Ok((class_path, instance_path))
}

fn open_gray8(path: &Path) -> Result<Array2<u8>> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(ref io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::MissingInput(path.to_path_buf())
        }
        other => Error::format(path, format!("cannot decode image: {other}")),
    })?;
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    Ok(Array2::from_shape_fn((h as usize, w as usize), |(y, x)| {
        gray.get_pixel(x as u32, y as u32)[0]
    }))
}

fn open_gray16(path: &Path) -> Result<Array2<u16>> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(ref io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::MissingInput(path.to_path_buf())
        }
        other => Error::format(path, format!("cannot decode image: {other}")),
    })?;
    let gray = img.into_luma16();
    let (w, h) = gray.dimensions();
    Ok(Array2::from_shape_fn((h as usize, w as usize), |(y, x)| {
        gray.get_pixel(x as u32, y as u32)[0]
    }))
}

/// Loads a frame from its class/instance image pair, picking up the sidecar
/// next to the class map when present.
pub fn load_panoptic(class_path: &Path, instance_path: &Path) -> Result<PanopticFrame> {
    let class_map = open_gray8(class_path)?;
    let instance_map = open_gray16(instance_path)?;
    if class_map.dim() != instance_map.dim() {
        return Err(Error::Shape {
            context: "panoptic image pair",
            expected: format!("{:?} (class map)", class_map.dim()),
            actual: format!("{:?} (instance map)", instance_map.dim()),
        });
    }

    let mut frame = PanopticFrame {
        class_map,
        instance_map,
        scores: BTreeMap::new(),
        timestamp: 0.0,
        camera_pose: RigPose::default(),
    };

    let sc_path = sidecar_path(class_path);
    if sc_path.exists() {
        let text = std::fs::read_to_string(&sc_path).map_err(|e| Error::io(&sc_path, e))?;
        let sidecar: Sidecar = toml::from_str(&text)
            .map_err(|e| Error::format(&sc_path, format!("invalid sidecar: {e}")))?;
        frame.timestamp = sidecar.timestamp;
        frame.camera_pose = sidecar.pose;
        for (k, v) in sidecar.scores {
            let id: u16 = k.parse().map_err(|_| {
                Error::format(&sc_path, format!("score key {k:?} is not an instance id"))
            })?;
            frame.scores.insert(id, v);
        }
    }

    frame.validate()?;
    Ok(frame)
}
