//! Synthetic scene simulation: a small world of moving objects observed by
//! both sensors.
//!
//! A [`Scene`] (typically loaded from TOML) describes objects as rectangles
//! on straight-line trajectories carrying point scatterers. From it the
//! simulator produces, per scheduled frame, the raw radar ADC cube
//! ([`synthesize_raw`]), the aerial panoptic label image
//! ([`render_aerial_labels`]), and a ground-truth record of where each
//! object must appear in the processed radar cube. Everything downstream of
//! the scene seed is deterministic, so whole datasets can be regenerated
//! bit-for-bit.

pub mod render;
pub mod scene;
pub mod sequence;
pub mod synth;

pub use render::render_aerial_labels;
pub use scene::{
    ObjectInstant, ResolvedObject, ResolvedScene, Scatterer, Scene, SceneObject, SensorTiming,
    WorldScatterer,
};
pub use sequence::{
    camera_frame, generate_sequence, plan_sequence, radar_frame, FrameBundle, FrameTime,
    RadarFrameTruth, SequencePlan, TruthObject,
};
pub use synth::{coherent_gain, noise_sigma_for_snr, synthesize_raw};
