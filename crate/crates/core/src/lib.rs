//! Automatic annotation of FMCW radar recordings from segmented aerial images.
//!
//! The library covers the full offline pipeline for building labeled radar
//! datasets without manual annotation in the radar domain:
//!
//! * [`radar`] — the FMCW processing chain: raw ADC cubes to range–Doppler
//!   maps, angle spectra over a calibrated virtual array, range–azimuth
//!   images, Cartesian ground-plane rasters, and CA-CFAR target extraction.
//! * [`camera`] — ground-plane geometry for a downward-looking UAV camera:
//!   lens distortion, footprint estimation, homography fitting, and
//!   image-to-ground warping.
//! * [`seg`] — panoptic label frames (class + instance maps), instance
//!   extraction, per-class statistics, and a deterministic perturbation model
//!   that mimics segmentation-network errors.
//! * [`fusion`] — temporal frame matching, projection of image instances onto
//!   a world grid, world-box to range–azimuth conversion, radar cube
//!   cropping, and dataset emission with a replayable manifest.
//! * [`metrics`] — COCO-style evaluation: IoU, greedy matching,
//!   precision/recall, and interpolated average precision.
//! * [`sim`] — a point-scatterer scene simulator that produces raw radar
//!   cubes and the matching aerial label frames, so the whole pipeline can be
//!   exercised and verified end to end without hardware.
//! * [`pipeline`] — the configuration format and stage drivers behind the
//!   `rlforge` command-line tool.
//!
//! Everything is deterministic: random processes are seeded explicitly and
//! per-frame streams are derived from (seed, frame) so results do not depend
//! on thread scheduling. With the default `parallel` feature the hot loops
//! run on rayon; disabling it yields a sequential build with byte-identical
//! outputs.

pub mod camera;
pub mod error;
pub mod fusion;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod parallel;
pub mod pipeline;
pub mod pose;
pub mod radar;
pub mod seeding;
pub mod seg;
pub mod sim;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
