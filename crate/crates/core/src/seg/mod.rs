//! Panoptic segmentation labels: the 12-class taxonomy, label-map frames
//! with file ingestion, per-instance mask extraction, dataset statistics,
//! and a seeded perturbation operator that emulates imperfect network
//! output.
//!
//! Frames pair an 8-bit class map with a 16-bit instance map (0 = none) and
//! an optional structured-text sidecar carrying timestamp, camera pose, and
//! per-instance confidence scores.

pub mod classes;
pub mod frame;
pub mod masks;
pub mod perturb;

pub use classes::ClassId;
pub use frame::{load_panoptic, save_panoptic, PanopticFrame};
pub use masks::{class_statistics, extract_instances, ClassStatistics, InstanceMask, RunLengthMask};
pub use perturb::{perturb_segmentation, PerturbParams};
