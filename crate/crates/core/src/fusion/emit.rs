//! Labeled-dataset emission: per-instance radar artifacts in four formats
//! plus a replayable JSON-lines manifest and a skip ledger.
//!
//! Formats, chosen per run:
//!
//! * `rd` — the crop's range–Doppler magnitude map (dB, azimuth collapsed
//!   by peak power), a 2-D raster in an `RAI1` envelope.
//! * `rda` — the complex range–Doppler–azimuth sub-cube (`RDA1` envelope).
//! * `targets` — CSV of the frame's CFAR detections that fall inside the
//!   instance's section.
//! * `features` — the `targets` rows augmented with whole-crop statistics:
//!   peak power (dB), total energy, and the power-weighted centroid and
//!   spread along each axis.
//!
//! The manifest is one JSON object per line: a header (the only line that
//! carries a wall-clock timestamp) followed by one [`AnnotationRecord`] per
//! emitted instance. Re-running emission on the same inputs reproduces
//! every artifact byte for byte; only the header timestamp may differ.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::project::WorldBox;
use crate::fusion::roi::{crop_rda, RaRoi};
use crate::io::{write_rda_cube, write_real_raster, RealRaster};
use crate::radar::{cfar_detect, CfarConfig, RdaCube, Target};
use crate::seg::ClassId;

/// Which artifact formats a run emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatSet {
    pub rd: bool,
    pub rda: bool,
    pub targets: bool,
    pub features: bool,
}

impl Default for FormatSet {
    fn default() -> Self {
        FormatSet::all()
    }
}

impl FormatSet {
    pub fn all() -> Self {
        FormatSet {
            rd: true,
            rda: true,
            targets: true,
            features: true,
        }
    }

    /// Parses a comma-separated subset of `rd,rda,targets,features`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut set = FormatSet {
            rd: false,
            rda: false,
            targets: false,
            features: false,
        };
        for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "rd" => set.rd = true,
                "rda" => set.rda = true,
                "targets" => set.targets = true,
                "features" => set.features = true,
                other => {
                    return Err(Error::Config(format!(
                        "unknown dataset format '{other}'; expected a subset of \
                         rd, rda, targets, features"
                    )))
                }
            }
        }
        if set == (FormatSet { rd: false, rda: false, targets: false, features: false }) {
            return Err(Error::Config(format!(
                "no dataset formats selected in '{spec}'"
            )));
        }
        Ok(set)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.rd {
            v.push("rd");
        }
        if self.rda {
            v.push("rda");
        }
        if self.targets {
            v.push("targets");
        }
        if self.features {
            v.push("features");
        }
        v
    }

    fn needs_cfar(&self) -> bool {
        self.targets || self.features
    }
}

/// One labeled instance in a frame: where it is in the world and which cube
/// section belongs to it.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceLabel {
    pub world_box: WorldBox,
    pub roi: RaRoi,
}

/// Everything needed to emit one radar frame's annotations.
#[derive(Debug, Clone)]
pub struct FrameAnnotations<'a> {
    pub frame_index: usize,
    /// The frame's full processed cube; crops are cut from it on the fly.
    pub cube: &'a RdaCube,
    pub camera_timestamp: f64,
    pub sync_skew_s: f64,
    pub labels: Vec<InstanceLabel>,
}

/// One manifest line: a labeled instance and the artifacts written for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub frame_index: usize,
    pub radar_timestamp: f64,
    pub camera_timestamp: f64,
    pub sync_skew_s: f64,
    pub class: ClassId,
    pub instance_id: u16,
    pub score: f64,
    /// World box as (x_min, x_max, y_min, y_max), meters.
    pub world_box_m: [f64; 4],
    pub range_interval_m: [f64; 2],
    /// Inclusive bin interval into the frame cube's range axis.
    pub range_bins: [usize; 2],
    pub azimuth_interval_deg: [f64; 2],
    pub azimuth_bins: [usize; 2],
    /// Length of the (never cropped) Doppler axis.
    pub doppler_bin_count: usize,
    /// Format name → file name relative to the output directory.
    pub artifacts: BTreeMap<String, String>,
}

/// First manifest line. `created_unix_s` is the only wall-clock value in
/// the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub manifest_version: u32,
    pub created_unix_s: u64,
    pub formats: Vec<String>,
    pub record_count: usize,
}

/// What emission produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitSummary {
    pub manifest_path: PathBuf,
    pub records: Vec<AnnotationRecord>,
    pub files_written: usize,
}

/// Why an object or frame produced no annotation; consumed by campaign
/// reports so drops stay countable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipEntry {
    pub frame_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassId>,
    /// Pipeline step that dropped it (`sync`, `projection`, `field-of-view`).
    pub stage: String,
    pub reason: String,
}

/// Whole-crop statistics attached to every `features` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropStatistics {
    /// Peak cell power, dB (the cube's floor for an all-zero crop).
    pub peak_db: f64,
    /// Sum of cell powers.
    pub energy: f64,
    pub range_centroid_m: f64,
    pub range_spread_m: f64,
    pub velocity_centroid_mps: f64,
    pub velocity_spread_mps: f64,
    pub azimuth_centroid_deg: f64,
    pub azimuth_spread_deg: f64,
}

/// Power-weighted first and second moments of the crop along each axis.
/// An all-zero crop centers on the axis midpoints with zero spread.
pub fn crop_statistics(crop: &RdaCube) -> CropStatistics {
    let (nr, nd, na) = crop.dims();
    let mut energy = 0.0f64;
    let mut peak = 0.0f64;
    let mut first = [0.0f64; 3];
    for r in 0..nr {
        for d in 0..nd {
            for a in 0..na {
                let p = crop.data[[r, d, a]].norm_sqr();
                energy += p;
                peak = peak.max(p);
                first[0] += p * crop.range_axis_m[r];
                first[1] += p * crop.velocity_axis_mps[d];
                first[2] += p * crop.azimuth_axis.angles_deg[a];
            }
        }
    }
    let midpoint = |axis: &[f64]| (axis[0] + axis[axis.len() - 1]) / 2.0;
    let centroid = if energy > 0.0 {
        [first[0] / energy, first[1] / energy, first[2] / energy]
    } else {
        [
            midpoint(&crop.range_axis_m),
            midpoint(&crop.velocity_axis_mps),
            midpoint(&crop.azimuth_axis.angles_deg),
        ]
    };
    let mut second = [0.0f64; 3];
    if energy > 0.0 {
        for r in 0..nr {
            for d in 0..nd {
                for a in 0..na {
                    let p = crop.data[[r, d, a]].norm_sqr();
                    second[0] += p * (crop.range_axis_m[r] - centroid[0]).powi(2);
                    second[1] += p * (crop.velocity_axis_mps[d] - centroid[1]).powi(2);
                    second[2] += p * (crop.azimuth_axis.angles_deg[a] - centroid[2]).powi(2);
                }
            }
        }
        for s in &mut second {
            *s = (*s / energy).sqrt();
        }
    }
    CropStatistics {
        peak_db: if peak > 0.0 {
            (10.0 * peak.log10()).max(crop.db_floor)
        } else {
            crop.db_floor
        },
        energy,
        range_centroid_m: centroid[0],
        range_spread_m: second[0],
        velocity_centroid_mps: centroid[1],
        velocity_spread_mps: second[1],
        azimuth_centroid_deg: centroid[2],
        azimuth_spread_deg: second[2],
    }
}

/// The crop's range–Doppler magnitude map: rows = Doppler (velocity axis),
/// columns = range, each cell the dB of the strongest azimuth bin.
fn rd_magnitude_raster(crop: &RdaCube) -> RealRaster {
    let (nr, nd, na) = crop.dims();
    let mut db = Array2::from_elem((nd, nr), crop.db_floor);
    for d in 0..nd {
        for r in 0..nr {
            let mut peak = 0.0f64;
            for a in 0..na {
                peak = peak.max(crop.data[[r, d, a]].norm_sqr());
            }
            if peak > 0.0 {
                db[[d, r]] = (10.0 * peak.log10()).max(crop.db_floor);
            }
        }
    }
    RealRaster {
        data: db,
        row_axis: crop.velocity_axis_mps.clone(),
        col_axis: crop.range_axis_m.clone(),
        timestamp: crop.timestamp,
        pose: crop.pose,
    }
}

const TARGET_COLUMNS: [&str; 10] = [
    "range_m",
    "velocity_mps",
    "azimuth_deg",
    "magnitude_db",
    "snr_db",
    "world_x_m",
    "world_y_m",
    "range_bin",
    "doppler_bin",
    "azimuth_bin",
];

const FEATURE_COLUMNS: [&str; 8] = [
    "peak_db",
    "energy",
    "range_centroid_m",
    "range_spread_m",
    "velocity_centroid_mps",
    "velocity_spread_mps",
    "azimuth_centroid_deg",
    "azimuth_spread_deg",
];

fn target_fields(t: &Target) -> Vec<String> {
    vec![
        t.range_m.to_string(),
        t.velocity_mps.to_string(),
        t.azimuth_deg.to_string(),
        t.magnitude_db.to_string(),
        t.snr_db.to_string(),
        t.world_x_m.to_string(),
        t.world_y_m.to_string(),
        t.range_bin.to_string(),
        t.doppler_bin.to_string(),
        t.azimuth_bin.to_string(),
    ]
}

fn stats_fields(s: &CropStatistics) -> Vec<String> {
    vec![
        s.peak_db.to_string(),
        s.energy.to_string(),
        s.range_centroid_m.to_string(),
        s.range_spread_m.to_string(),
        s.velocity_centroid_mps.to_string(),
        s.velocity_spread_mps.to_string(),
        s.azimuth_centroid_deg.to_string(),
        s.azimuth_spread_deg.to_string(),
    ]
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    let io_err = |e: csv::Error| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    writer.write_record(header).map_err(io_err)?;
    for row in rows {
        writer.write_record(row).map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn targets_in_roi<'a>(targets: &'a [Target], roi: &RaRoi) -> Vec<&'a Target> {
    targets
        .iter()
        .filter(|t| {
            (roi.range_bin_lo..=roi.range_bin_hi).contains(&t.range_bin)
                && (roi.azimuth_bin_lo..=roi.azimuth_bin_hi).contains(&t.azimuth_bin)
        })
        .collect()
}

/// Incremental dataset writer: feed it one frame at a time, then `finish`
/// to write the manifest. Lets the caller keep only one processed cube in
/// memory.
#[derive(Debug)]
pub struct EmitSession {
    out_dir: PathBuf,
    formats: FormatSet,
    cfar: CfarConfig,
    records: Vec<AnnotationRecord>,
    files_written: usize,
}

impl EmitSession {
    pub fn new(out_dir: &Path, formats: &FormatSet, cfar: &CfarConfig) -> Result<Self> {
        if formats.names().is_empty() {
            return Err(Error::Config("no dataset formats selected".into()));
        }
        cfar.validate()?;
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        Ok(EmitSession {
            out_dir: out_dir.to_path_buf(),
            formats: *formats,
            cfar: *cfar,
            records: Vec::new(),
            files_written: 0,
        })
    }

    /// Writes every selected artifact for every label in the frame and
    /// appends the matching records.
    pub fn add_frame(&mut self, frame: &FrameAnnotations) -> Result<()> {
        let frame_targets = if self.formats.needs_cfar() && !frame.labels.is_empty() {
            cfar_detect(frame.cube, &self.cfar)?.targets
        } else {
            Vec::new()
        };
        for label in &frame.labels {
            let crop = crop_rda(frame.cube, &label.roi)?;
            let stem = format!(
                "frame{:05}_inst{:04}",
                frame.frame_index, label.world_box.instance_id
            );
            let mut artifacts = BTreeMap::new();

            if self.formats.rd {
                let name = format!("{stem}.rd.bin");
                write_real_raster(self.out_dir.join(&name), &rd_magnitude_raster(&crop))?;
                artifacts.insert("rd".to_string(), name);
                self.files_written += 1;
            }
            if self.formats.rda {
                let name = format!("{stem}.rda.bin");
                write_rda_cube(self.out_dir.join(&name), &crop)?;
                artifacts.insert("rda".to_string(), name);
                self.files_written += 1;
            }
            if self.formats.targets || self.formats.features {
                let hits = targets_in_roi(&frame_targets, &label.roi);
                if self.formats.targets {
                    let name = format!("{stem}.targets.csv");
                    let rows: Vec<Vec<String>> =
                        hits.iter().map(|t| target_fields(t)).collect();
                    write_csv(&self.out_dir.join(&name), &TARGET_COLUMNS, &rows)?;
                    artifacts.insert("targets".to_string(), name);
                    self.files_written += 1;
                }
                if self.formats.features {
                    let stats = crop_statistics(&crop);
                    let stat_cols = stats_fields(&stats);
                    let header: Vec<&str> = TARGET_COLUMNS
                        .iter()
                        .chain(FEATURE_COLUMNS.iter())
                        .copied()
                        .collect();
                    let rows: Vec<Vec<String>> = hits
                        .iter()
                        .map(|t| {
                            let mut row = target_fields(t);
                            row.extend(stat_cols.iter().cloned());
                            row
                        })
                        .collect();
                    let name = format!("{stem}.features.csv");
                    write_csv(&self.out_dir.join(&name), &header, &rows)?;
                    artifacts.insert("features".to_string(), name);
                    self.files_written += 1;
                }
            }

            self.records.push(AnnotationRecord {
                frame_index: frame.frame_index,
                radar_timestamp: frame.cube.timestamp,
                camera_timestamp: frame.camera_timestamp,
                sync_skew_s: frame.sync_skew_s,
                class: label.world_box.class,
                instance_id: label.world_box.instance_id,
                score: label.world_box.score,
                world_box_m: [
                    label.world_box.x_min,
                    label.world_box.x_max,
                    label.world_box.y_min,
                    label.world_box.y_max,
                ],
                range_interval_m: [label.roi.range_lo_m, label.roi.range_hi_m],
                range_bins: [label.roi.range_bin_lo, label.roi.range_bin_hi],
                azimuth_interval_deg: [label.roi.azimuth_lo_deg, label.roi.azimuth_hi_deg],
                azimuth_bins: [label.roi.azimuth_bin_lo, label.roi.azimuth_bin_hi],
                doppler_bin_count: frame.cube.dims().1,
                artifacts,
            });
        }
        Ok(())
    }

    /// Writes the manifest and returns the summary.
    pub fn finish(self) -> Result<EmitSummary> {
        let manifest_path = self.out_dir.join("manifest.jsonl");
        let file =
            fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let mut w = BufWriter::new(file);
        let header = ManifestHeader {
            manifest_version: 1,
            created_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            formats: self.formats.names().iter().map(|s| s.to_string()).collect(),
            record_count: self.records.len(),
        };
        let json_err = |e: serde_json::Error| Error::Io {
            path: manifest_path.clone(),
            source: std::io::Error::other(e),
        };
        let line = serde_json::to_string(&header).map_err(json_err)?;
        writeln!(w, "{line}").map_err(|e| Error::io(&manifest_path, e))?;
        for record in &self.records {
            let line = serde_json::to_string(record).map_err(json_err)?;
            writeln!(w, "{line}").map_err(|e| Error::io(&manifest_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&manifest_path, e))?;

        Ok(EmitSummary {
            manifest_path,
            records: self.records,
            files_written: self.files_written,
        })
    }
}

/// Writes every selected artifact for every labeled instance, then the
/// manifest. Returns the records in emission order (frames as given,
/// labels in order within each frame).
pub fn emit_dataset(
    frames: &[FrameAnnotations],
    formats: &FormatSet,
    cfar: &CfarConfig,
    out_dir: &Path,
) -> Result<EmitSummary> {
    let mut session = EmitSession::new(out_dir, formats, cfar)?;
    for frame in frames {
        session.add_frame(frame)?;
    }
    session.finish()
}

/// Reads a manifest back: the header plus all records.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<(ManifestHeader, Vec<AnnotationRecord>)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::format(path, "manifest is empty"))?
        .map_err(|e| Error::io(path, e))?;
    let header: ManifestHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::format(path, format!("bad manifest header: {e}")))?;
    let mut records = Vec::with_capacity(header.record_count);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: AnnotationRecord = serde_json::from_str(&line)
            .map_err(|e| Error::format(path, format!("bad manifest record on line {}: {e}", i + 2)))?;
        records.push(record);
    }
    if records.len() != header.record_count {
        return Err(Error::format(
            path,
            format!(
                "manifest header promises {} records but {} lines follow",
                header.record_count,
                records.len()
            ),
        ));
    }
    Ok((header, records))
}

/// Writes the skip ledger, one JSON object per line.
pub fn write_skips(path: impl AsRef<Path>, skips: &[SkipEntry]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for skip in skips {
        let line = serde_json::to_string(skip).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        })?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a skip ledger written by [`write_skips`].
pub fn read_skips(path: impl AsRef<Path>) -> Result<Vec<SkipEntry>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let mut skips = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let skip: SkipEntry = serde_json::from_str(&line)
            .map_err(|e| Error::format(path, format!("bad skip entry on line {}: {e}", i + 1)))?;
        skips.push(skip);
    }
    Ok(skips)
}
