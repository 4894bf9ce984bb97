//! Cross-sensor fusion: turning time-aligned aerial label images into
//! annotated radar samples.
//!
//! The stages run in order per radar frame:
//!
//! 1. [`sync::match_frames`] — pair each radar timestamp with the nearest
//!    camera timestamp inside the allowed skew.
//! 2. [`project::project_instances`] — warp the paired label image onto the
//!    world ground grid and split it into per-instance occupancy masks.
//! 3. [`project::extract_rois`] — tighten each mask to a margin-padded
//!    world-frame box.
//! 4. [`roi::world_box_to_ra`] — convert the box to a range–azimuth
//!    interval as seen from the radar, snapped outward to whole bins.
//! 5. [`roi::crop_rda`] — cut the labeled section out of the processed
//!    cube (the Doppler axis always stays whole).
//! 6. [`emit::emit_dataset`] — write the selected artifact formats plus a
//!    JSON-lines manifest; drops along the way land in a skip ledger.

pub mod emit;
pub mod project;
pub mod roi;
pub mod sync;

pub use emit::{
    crop_statistics, emit_dataset, read_manifest, read_skips, write_skips, AnnotationRecord,
    CropStatistics, EmitSession, EmitSummary, FormatSet, FrameAnnotations, InstanceLabel,
    ManifestHeader, SkipEntry,
};
pub use project::{
    extract_rois, project_instances, DroppedInstance, ProjectionOutcome, WorldBox,
    WorldInstanceMask,
};
pub use roi::{crop_rda, world_box_to_ra, RaRoi};
pub use sync::{match_frames, SyncPair, SyncReport};
