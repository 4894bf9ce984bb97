//! The five stage drivers: simulate → process → fuse → evaluate → report.
//!
//! Each stage reads the shared [`PipelineConfig`] plus the files earlier
//! stages left under the output directory, and writes its own files there
//! (see [`Layout`]). Stages can therefore be re-run individually, and two
//! runs from the same configuration produce byte-identical trees except for
//! the manifest header's creation stamp.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::camera::ground_homography;
use crate::error::{Error, Result};
use crate::fusion::{
    extract_rois, match_frames, project_instances, read_manifest, world_box_to_ra, write_skips,
    EmitSession, FrameAnnotations, InstanceLabel, SkipEntry, SyncPair,
};
use crate::io::{read_raw_cube, read_rda_cube, write_raw_cube, write_rda_cube};
use crate::metrics::{
    average_precision, match_detections, Detection, GroundTruth, Rect, Region,
};
use crate::parallel::{map_indexed, with_jobs};
use crate::radar::{angle_fft, range_doppler_map, RdaCube};
use crate::seg::{load_panoptic, perturb_segmentation, save_panoptic, ClassId};
use crate::sim::{camera_frame, plan_sequence, radar_frame, RadarFrameTruth};

use super::config::{
    read_json, write_json, CameraIndexEntry, FrameFileEntry, FusionSummary, Layout,
    PipelineConfig,
};

/// Frames prepared per parallel batch in the fuse stage; bounds how many
/// processed cubes are resident at once.
const FUSE_CHUNK: usize = 16;

/// World-x offset between consecutive frames when evaluation flattens all
/// frames into one set of regions. Far larger than any scene, so regions
/// from different frames never overlap and scores still sweep globally.
const FRAME_SEPARATION_M: f64 = 1.0e5;

fn radar_file_name(index: usize) -> String {
    format!("frame{index:05}.rdc")
}

fn camera_stem(index: usize) -> String {
    format!("frame{index:05}")
}

fn rda_file_name(index: usize) -> String {
    format!("frame{index:05}.rda.bin")
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut text = String::new();
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        })?;
        text.push_str(&line);
        text.push('\n');
    }
    write_text(path, &text)
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// What the simulate stage produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub radar_frames: usize,
    pub camera_frames: usize,
}

/// Synthesizes the whole sequence: raw radar cubes plus per-frame ground
/// truth, and label frames as an aerial segmentation network would emit
/// them (rendered from the true pose, stamped with the reported one, then
/// degraded by the configured perturbation).
pub fn run_simulate(cfg: &PipelineConfig) -> Result<SimulateSummary> {
    cfg.validate()?;
    let layout = cfg.layout();
    let radar_dir = layout.radar_dir();
    let camera_dir = layout.camera_dir();
    create_dir(&radar_dir)?;
    create_dir(&camera_dir)?;

    let resolved = cfg.scene.clone().resolve()?;
    let plan = plan_sequence(&cfg.scene.timing)?;

    let (radar_entries, truths, camera_entries) = with_jobs(cfg.run.jobs, || -> Result<_> {
        let radar_results = map_indexed(plan.radar.len(), |k| -> Result<_> {
            let (cube, truth) = radar_frame(&resolved, &plan.radar[k])?;
            let file = radar_file_name(k);
            write_raw_cube(radar_dir.join(&file), &cube)?;
            let entry = FrameFileEntry {
                index: k,
                file,
                timestamp: cube.timestamp,
            };
            Ok((entry, truth))
        });
        let mut radar_entries = Vec::with_capacity(radar_results.len());
        let mut truths = Vec::with_capacity(radar_results.len());
        for result in radar_results {
            let (entry, truth) = result?;
            radar_entries.push(entry);
            truths.push(truth);
        }

        let camera_results = map_indexed(plan.camera.len(), |k| -> Result<_> {
            let mut frame = camera_frame(&resolved, &plan.camera[k])?;
            if !cfg.perturb.is_identity() {
                frame = perturb_segmentation(&frame, &cfg.perturb, cfg.scene.seed)?;
            }
            let stem = camera_stem(k);
            save_panoptic(&frame, &camera_dir.join(&stem))?;
            Ok(CameraIndexEntry {
                index: k,
                classes: format!("{stem}.classes.png"),
                instances: format!("{stem}.instances.png"),
                timestamp: frame.timestamp,
            })
        });
        let camera_entries = camera_results.into_iter().collect::<Result<Vec<_>>>()?;
        Ok((radar_entries, truths, camera_entries))
    })?;

    write_jsonl(&layout.truth_path(), &truths)?;
    write_json(&layout.radar_index_path(), &radar_entries)?;
    write_json(&layout.camera_index_path(), &camera_entries)?;

    log::info!(
        "simulated {} radar and {} camera frames into {}",
        radar_entries.len(),
        camera_entries.len(),
        layout.sim_dir().display()
    );
    Ok(SimulateSummary {
        radar_frames: radar_entries.len(),
        camera_frames: camera_entries.len(),
    })
}

/// What the process stage produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSummary {
    pub frames: usize,
}

/// Runs the radar chain on every recorded raw cube: windowed range–Doppler
/// transform, then the angle spectrum over the virtual array.
pub fn run_process(cfg: &PipelineConfig) -> Result<ProcessSummary> {
    cfg.validate()?;
    let layout = cfg.layout();
    let entries: Vec<FrameFileEntry> = read_json(&layout.radar_index_path())?;
    let radar_dir = layout.radar_dir();
    let proc_dir = layout.proc_dir();
    create_dir(&layout.rda_dir())?;

    let proc_entries = with_jobs(cfg.run.jobs, || -> Result<Vec<FrameFileEntry>> {
        map_indexed(entries.len(), |i| -> Result<FrameFileEntry> {
            let entry = &entries[i];
            let raw = read_raw_cube(radar_dir.join(&entry.file), &cfg.scene.radar)?;
            let stack = range_doppler_map(&raw)?;
            let cube = angle_fft(&stack, None)?;
            let file = format!("rda/{}", rda_file_name(entry.index));
            write_rda_cube(proc_dir.join(&file), &cube)?;
            Ok(FrameFileEntry {
                index: entry.index,
                file,
                timestamp: cube.timestamp,
            })
        })
        .into_iter()
        .collect()
    })?;

    write_json(&layout.proc_index_path(), &proc_entries)?;
    log::info!(
        "processed {} cubes into {}",
        proc_entries.len(),
        layout.rda_dir().display()
    );
    Ok(ProcessSummary {
        frames: proc_entries.len(),
    })
}

/// What the fuse stage produced.
#[derive(Debug, Clone, PartialEq)]
pub struct FuseOutcome {
    pub summary: FusionSummary,
    pub manifest_path: PathBuf,
    pub files_written: usize,
}

/// One radar frame loaded and labeled, ready for emission.
struct PreparedFrame {
    frame_index: usize,
    cube: RdaCube,
    camera_timestamp: f64,
    skew_s: f64,
    labels: Vec<InstanceLabel>,
    /// Classes of every instance present in the paired label frame, whether
    /// or not it survived projection.
    detected: Vec<ClassId>,
    skips: Vec<SkipEntry>,
}

fn prepare_frame(
    cfg: &PipelineConfig,
    layout: &Layout,
    proc_entry: &FrameFileEntry,
    cam_entry: &CameraIndexEntry,
    pair: &SyncPair,
) -> Result<PreparedFrame> {
    let cube = read_rda_cube(layout.proc_dir().join(&proc_entry.file))?;
    let camera_dir = layout.camera_dir();
    let frame = load_panoptic(
        &camera_dir.join(&cam_entry.classes),
        &camera_dir.join(&cam_entry.instances),
    )?;
    // The geometry the pipeline believes in: the camera's *reported* pose.
    let h = ground_homography(&cfg.scene.camera, &frame.camera_pose)?;
    let outcome = project_instances(&frame, &h, &cfg.grid)?;

    let mut detected = Vec::with_capacity(outcome.masks.len() + outcome.dropped.len());
    let mut skips = Vec::new();
    for drop in &outcome.dropped {
        detected.push(drop.class);
        skips.push(SkipEntry {
            frame_index: proc_entry.index,
            instance_id: Some(drop.instance_id),
            class: Some(drop.class),
            stage: "projection".into(),
            reason: format!(
                "instance covered {} pixels but projected onto no grid cell",
                drop.pixel_count
            ),
        });
    }
    for mask in &outcome.masks {
        detected.push(mask.class);
    }

    let boxes = extract_rois(&outcome.masks, &cfg.grid, cfg.fusion.margin_m)?;
    let mut labels = Vec::with_capacity(boxes.len());
    for world_box in boxes {
        let roi = world_box_to_ra(
            &world_box,
            &cube.pose,
            &cube.range_axis_m,
            &cube.azimuth_axis.angles_deg,
        )?;
        match roi {
            Some(roi) => labels.push(InstanceLabel { world_box, roi }),
            None => skips.push(SkipEntry {
                frame_index: proc_entry.index,
                instance_id: Some(world_box.instance_id),
                class: Some(world_box.class),
                stage: "field-of-view".into(),
                reason: format!(
                    "world box x [{:.2}, {:.2}] m, y [{:.2}, {:.2}] m lies outside \
                     the radar's range/azimuth span",
                    world_box.x_min, world_box.x_max, world_box.y_min, world_box.y_max
                ),
            }),
        }
    }

    Ok(PreparedFrame {
        frame_index: proc_entry.index,
        cube,
        camera_timestamp: pair.camera_timestamp,
        skew_s: pair.skew_s,
        labels,
        detected,
        skips,
    })
}

/// Pairs processed radar frames with label frames, projects every labeled
/// instance into the radar's world frame, and emits the annotated dataset
/// plus a ledger of everything that was dropped along the way.
pub fn run_fuse(cfg: &PipelineConfig) -> Result<FuseOutcome> {
    cfg.validate()?;
    let layout = cfg.layout();
    let formats = cfg.formats()?;
    let proc_entries: Vec<FrameFileEntry> = read_json(&layout.proc_index_path())?;
    let camera_entries: Vec<CameraIndexEntry> = read_json(&layout.camera_index_path())?;

    let radar_ts: Vec<f64> = proc_entries.iter().map(|e| e.timestamp).collect();
    let camera_ts: Vec<f64> = camera_entries.iter().map(|e| e.timestamp).collect();
    let sync = match_frames(&radar_ts, &camera_ts, cfg.fusion.max_skew_s)?;

    let mut skips: Vec<SkipEntry> = sync
        .unpaired_radar
        .iter()
        .map(|&i| SkipEntry {
            frame_index: proc_entries[i].index,
            instance_id: None,
            class: None,
            stage: "sync".into(),
            reason: format!(
                "no camera frame within {} s of stamp {}",
                cfg.fusion.max_skew_s, proc_entries[i].timestamp
            ),
        })
        .collect();

    let mut session = EmitSession::new(&layout.dataset_dir(), &formats, &cfg.fusion.cfar)?;
    let mut summary = FusionSummary {
        radar_frames: proc_entries.len(),
        paired_frames: sync.pairs.len(),
        ..FusionSummary::default()
    };

    with_jobs(cfg.run.jobs, || -> Result<()> {
        for chunk in sync.pairs.chunks(FUSE_CHUNK) {
            // Load and label a bounded batch in parallel, then emit it in
            // frame order so the manifest and artifact set are stable.
            let prepared = map_indexed(chunk.len(), |i| {
                let pair = &chunk[i];
                prepare_frame(
                    cfg,
                    &layout,
                    &proc_entries[pair.radar_index],
                    &camera_entries[pair.camera_index],
                    pair,
                )
            });
            for result in prepared {
                let frame = result?;
                for &class in &frame.detected {
                    summary.detected_instances += 1;
                    *summary.per_class_detected.entry(class).or_insert(0) += 1;
                }
                for label in &frame.labels {
                    summary.mapped_instances += 1;
                    *summary
                        .per_class_mapped
                        .entry(label.world_box.class)
                        .or_insert(0) += 1;
                }
                skips.extend(frame.skips);
                session.add_frame(&FrameAnnotations {
                    frame_index: frame.frame_index,
                    cube: &frame.cube,
                    camera_timestamp: frame.camera_timestamp,
                    sync_skew_s: frame.skew_s,
                    labels: frame.labels,
                })?;
            }
        }
        Ok(())
    })?;

    for skip in &skips {
        *summary.skipped.entry(skip.stage.clone()).or_insert(0) += 1;
    }

    let emit = session.finish()?;
    write_skips(layout.skips_path(), &skips)?;
    write_json(&layout.fusion_summary_path(), &summary)?;

    log::info!(
        "fused {} of {} radar frames into {} annotations ({} files)",
        summary.paired_frames,
        summary.radar_frames,
        summary.mapped_instances,
        emit.files_written
    );
    Ok(FuseOutcome {
        summary,
        manifest_path: emit.manifest_path,
        files_written: emit.files_written,
    })
}

/// Average precision of one IoU threshold within a class sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScore {
    pub iou_threshold: f64,
    pub average_precision: f64,
}

/// Evaluation numbers for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    /// Mean over the configured IoU thresholds.
    pub average_precision: f64,
    pub ap_by_threshold: Vec<ThresholdScore>,
    /// Operating-point numbers at IoU 0.5; `None` when undefined.
    pub precision_at_50: Option<f64>,
    pub recall_at_50: Option<f64>,
}

/// Everything the evaluate stage measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub iou_thresholds: Vec<f64>,
    pub ground_truth_count: usize,
    pub detection_count: usize,
    pub per_class: BTreeMap<ClassId, ClassMetrics>,
    pub mean_ap: Option<f64>,
    /// Classes that were detected but never annotated, excluded from the
    /// mean.
    pub skipped_classes: Vec<ClassId>,
}

/// What the evaluate stage produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutcome {
    pub metrics: EvalMetrics,
    /// The human-readable summary, as written to `metrics.txt`.
    pub text: String,
}

fn threshold_label(thresholds: &[f64]) -> String {
    match thresholds {
        [single] => format!("{single:.2}"),
        [first, .., last] => format!("{first:.2}:{last:.2}"),
        [] => String::new(),
    }
}

fn option_text(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.4}"),
        None => "undefined".into(),
    }
}

/// Scores the emitted annotations against the simulated ground truth.
///
/// Both sides are compared as world boxes. Each emitted annotation is the
/// margin-padded region the dataset labels, so ground-truth footprints are
/// padded by the same margin — the comparison asks "is the label where it
/// should be", not "is the margin zero". Only objects inside the radar's
/// field of view count as ground truth; frames are kept disjoint by
/// spreading them along x far beyond any scene extent while scores sweep
/// globally, matching the usual whole-dataset average-precision protocol.
pub fn run_evaluate(cfg: &PipelineConfig) -> Result<EvaluateOutcome> {
    cfg.validate()?;
    let layout = cfg.layout();
    let truths: Vec<RadarFrameTruth> = read_jsonl(&layout.truth_path())?;
    let (_, records) = read_manifest(layout.dataset_dir().join("manifest.jsonl"))?;

    let margin = cfg.fusion.margin_m;
    let mut ground_truths = Vec::new();
    for frame in &truths {
        let offset = frame.frame_index as f64 * FRAME_SEPARATION_M;
        for obj in &frame.objects {
            if !obj.in_fov {
                continue;
            }
            let [x_min, x_max, y_min, y_max] = obj.box_world;
            ground_truths.push(GroundTruth {
                class: obj.class,
                region: Region::Box(Rect::new(
                    x_min - margin + offset,
                    x_max + margin + offset,
                    y_min - margin,
                    y_max + margin,
                )?),
            });
        }
    }
    let mut detections = Vec::new();
    for record in &records {
        let offset = record.frame_index as f64 * FRAME_SEPARATION_M;
        let [x_min, x_max, y_min, y_max] = record.world_box_m;
        detections.push(Detection {
            class: record.class,
            region: Region::Box(Rect::new(
                x_min + offset,
                x_max + offset,
                y_min,
                y_max,
            )?),
            score: record.score,
        });
    }

    let spec = cfg.match_spec();
    let ap = average_precision(&ground_truths, &detections, &spec)?;
    let report = match_detections(&ground_truths, &detections, 0.5)?;

    let mut per_class = BTreeMap::new();
    for (class, class_ap) in &ap.per_class {
        let counts = report.counts(*class);
        per_class.insert(
            *class,
            ClassMetrics {
                average_precision: class_ap.average_precision,
                ap_by_threshold: class_ap
                    .per_threshold
                    .iter()
                    .map(|t| ThresholdScore {
                        iou_threshold: t.iou_threshold,
                        average_precision: t.average_precision,
                    })
                    .collect(),
                precision_at_50: counts.precision().value(),
                recall_at_50: counts.recall().value(),
            },
        );
    }
    let metrics = EvalMetrics {
        iou_thresholds: spec.iou_thresholds.clone(),
        ground_truth_count: ground_truths.len(),
        detection_count: detections.len(),
        per_class,
        mean_ap: ap.mean_ap,
        skipped_classes: ap.skipped_classes.clone(),
    };

    let label = threshold_label(&spec.iou_thresholds);
    let mut text = String::new();
    writeln!(text, "ground truths: {}", metrics.ground_truth_count).unwrap();
    writeln!(text, "detections: {}", metrics.detection_count).unwrap();
    for (class, cm) in &metrics.per_class {
        writeln!(
            text,
            "AP @ IoU {label} {}: {:.2}%",
            class.name(),
            cm.average_precision * 100.0
        )
        .unwrap();
    }
    match metrics.mean_ap {
        Some(mean) => writeln!(text, "mAP @ IoU {label}: {:.2}%", mean * 100.0).unwrap(),
        None => writeln!(text, "mAP @ IoU {label}: undefined").unwrap(),
    }
    for (class, cm) in &metrics.per_class {
        writeln!(
            text,
            "precision @ IoU 0.50 {}: {}",
            class.name(),
            option_text(cm.precision_at_50)
        )
        .unwrap();
        writeln!(
            text,
            "recall @ IoU 0.50 {}: {}",
            class.name(),
            option_text(cm.recall_at_50)
        )
        .unwrap();
    }
    let totals = report.totals();
    writeln!(
        text,
        "precision @ IoU 0.50 overall: {}",
        option_text(totals.precision().value())
    )
    .unwrap();
    writeln!(
        text,
        "recall @ IoU 0.50 overall: {}",
        option_text(totals.recall().value())
    )
    .unwrap();
    if !metrics.skipped_classes.is_empty() {
        let names: Vec<&str> = metrics.skipped_classes.iter().map(|c| c.name()).collect();
        writeln!(text, "skipped classes (no ground truth): {}", names.join(", ")).unwrap();
    }

    create_dir(&layout.eval_dir())?;
    write_json(&layout.metrics_json_path(), &metrics)?;
    write_text(&layout.metrics_text_path(), &text)?;
    Ok(EvaluateOutcome { metrics, text })
}

/// What the report stage produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutcome {
    /// The campaign summary, as written to `report.txt`.
    pub text: String,
}

fn fraction_text(numerator: usize, denominator: usize) -> String {
    if denominator == 0 {
        "undefined".into()
    } else {
        format!("{:.15}", numerator as f64 / denominator as f64)
    }
}

/// Writes the campaign ledger: how many instance appearances the sequence
/// contained, how many the label frames detected, and how many were mapped
/// into emitted annotations, with recall = detected / total.
pub fn run_report(cfg: &PipelineConfig) -> Result<ReportOutcome> {
    cfg.validate()?;
    let layout = cfg.layout();
    let truths: Vec<RadarFrameTruth> = read_jsonl(&layout.truth_path())?;
    let summary: FusionSummary = read_json(&layout.fusion_summary_path())?;

    let mut totals: BTreeMap<ClassId, usize> = BTreeMap::new();
    for frame in &truths {
        for obj in &frame.objects {
            *totals.entry(obj.class).or_insert(0) += 1;
        }
    }
    let total_all: usize = totals.values().sum();

    let classes: BTreeSet<ClassId> = totals
        .keys()
        .chain(summary.per_class_detected.keys())
        .chain(summary.per_class_mapped.keys())
        .copied()
        .collect();

    let mut text = String::new();
    writeln!(text, "frames: {}", truths.len()).unwrap();
    writeln!(text, "duration: {} s", cfg.scene.timing.duration_s).unwrap();
    writeln!(text, "paired frames: {}", summary.paired_frames).unwrap();
    for class in classes {
        let total = totals.get(&class).copied().unwrap_or(0);
        let detected = summary.per_class_detected.get(&class).copied().unwrap_or(0);
        let mapped = summary.per_class_mapped.get(&class).copied().unwrap_or(0);
        writeln!(
            text,
            "{}: total {}, detected {}, mapped {}, recall {}",
            class.name(),
            total,
            detected,
            mapped,
            fraction_text(detected, total)
        )
        .unwrap();
    }
    writeln!(
        text,
        "all: total {}, detected {}, mapped {}",
        total_all, summary.detected_instances, summary.mapped_instances
    )
    .unwrap();
    writeln!(
        text,
        "detected/total: {}",
        fraction_text(summary.detected_instances, total_all)
    )
    .unwrap();
    writeln!(
        text,
        "mapped/detected: {}",
        fraction_text(summary.mapped_instances, summary.detected_instances)
    )
    .unwrap();
    writeln!(
        text,
        "recall: {}",
        fraction_text(summary.detected_instances, total_all)
    )
    .unwrap();
    for (stage, count) in &summary.skipped {
        writeln!(text, "skipped ({stage}): {count}").unwrap();
    }

    write_text(&layout.report_path(), &text)?;
    Ok(ReportOutcome { text })
}
