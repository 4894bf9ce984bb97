//! Configuration format and stage drivers behind the `rlforge` tool.
//!
//! One TOML file configures five stages that communicate only through the
//! files they leave under the run's output directory:
//!
//! 1. **simulate** — synthesize raw radar cubes, ground truth, and aerial
//!    label frames for the configured scene.
//! 2. **process** — run the radar chain on every raw cube to get
//!    range–Doppler–azimuth cubes.
//! 3. **fuse** — pair radar and camera frames, project labeled instances
//!    onto the ground grid, and emit the annotated dataset.
//! 4. **evaluate** — score the emitted annotations against the simulated
//!    ground truth (average precision, precision/recall).
//! 5. **report** — summarize the campaign: appearances, detections, mapped
//!    annotations, drops, recall.

pub mod config;
pub mod stages;

pub use config::{
    CameraIndexEntry, EvalSection, FrameFileEntry, FusionSection, FusionSummary, Layout,
    PipelineConfig, RunSection,
};
pub use stages::{
    run_evaluate, run_fuse, run_process, run_report, run_simulate, ClassMetrics, EvalMetrics,
    EvaluateOutcome, FuseOutcome, ProcessSummary, ReportOutcome, SimulateSummary, ThresholdScore,
};
