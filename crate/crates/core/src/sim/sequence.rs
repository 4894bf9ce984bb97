//! Frame schedules and whole-sequence generation for both sensors.
//!
//! Each sensor captures frames at `k · duration / frames` in *true* time
//! but stamps them with its own clock (true time plus a fixed offset), so
//! downstream synchronization has realistic skew to resolve. Radar frames
//! come paired with a ground-truth record: per countable object, the world
//! box and the expected processing-chain bins of its strongest scatterer.
//! Camera frames are rendered from the true UAV pose and stamped with a
//! *reported* pose drawn around it, so pose uncertainty degrades fusion the
//! way an imperfect GNSS/AHRS would.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::radar::{axis, RawAdcCube};
use crate::seeding::{frame_rng, StreamKind};
use crate::seg::{ClassId, PanopticFrame};
use crate::sim::render::render_aerial_labels;
use crate::sim::scene::{ObjectInstant, ResolvedScene, SensorTiming};
use crate::sim::synth::synthesize_raw;

/// One slot in a sensor's schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTime {
    pub index: usize,
    /// Wall-clock capture instant.
    pub true_time_s: f64,
    /// What the sensor writes into the frame (true time + clock offset).
    pub stamp: f64,
}

/// Capture schedules of both sensors over one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequencePlan {
    pub radar: Vec<FrameTime>,
    pub camera: Vec<FrameTime>,
}

/// Lays out both sensors' capture instants for one sequence.
pub fn plan_sequence(timing: &SensorTiming) -> Result<SequencePlan> {
    timing.validate()?;
    let schedule = |frames: usize, offset: f64| {
        (0..frames)
            .map(|k| {
                let t = k as f64 * timing.duration_s / frames as f64;
                FrameTime {
                    index: k,
                    true_time_s: t,
                    stamp: t + offset,
                }
            })
            .collect()
    };
    Ok(SequencePlan {
        radar: schedule(timing.radar_frames, timing.radar_clock_offset_s),
        camera: schedule(timing.camera_frames, timing.camera_clock_offset_s),
    })
}

/// Ground truth for one countable object in one radar frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthObject {
    pub instance_id: u16,
    pub class: ClassId,
    pub center_world: [f64; 2],
    /// Footprint as (x_min, x_max, y_min, y_max), world meters.
    pub box_world: [f64; 4],
    /// Geometry of the strongest scatterer relative to the radar.
    pub range_m: f64,
    pub radial_velocity_mps: f64,
    pub azimuth_deg: f64,
    /// Expected peak bins in the processed cube; `None` per axis when the
    /// scatterer falls outside that axis' span.
    pub range_bin: Option<usize>,
    pub doppler_bin: Option<usize>,
    pub azimuth_bin: Option<usize>,
    /// Whether all three bins exist, i.e. the radar can see the object.
    pub in_fov: bool,
}

/// Ground truth attached to one radar frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarFrameTruth {
    pub frame_index: usize,
    pub true_time_s: f64,
    /// The frame's own stamp (true time + radar clock offset).
    pub timestamp: f64,
    pub objects: Vec<TruthObject>,
}

fn truth_for(scene: &ResolvedScene, obj: &ObjectInstant) -> TruthObject {
    let cfg = &scene.scene.radar;
    let pose = &scene.scene.radar_pose;
    // The processing chain sees the strongest scatterer as the peak; an
    // object with no scatterers is judged by its center.
    let point = obj
        .strongest_scatterer()
        .map(|s| (s.position, s.velocity))
        .unwrap_or((obj.center, obj.velocity));
    let (range, bearing) = pose.range_bearing_to(point.0[0], point.0[1]);
    let radial = if range > 0.0 {
        let ux = (point.0[0] - pose.x) / range;
        let uy = (point.0[1] - pose.y) / range;
        point.1[0] * ux + point.1[1] * uy
    } else {
        0.0
    };

    let range_bin = axis::nearest(&cfg.range_axis(), range);
    let doppler_bin = axis::nearest(&cfg.velocity_axis(), radial);
    // Angle bins are uniform in sin(azimuth), not in degrees, so the
    // nearest bin is found in sin space.
    let sines: Vec<f64> = cfg
        .azimuth_axis()
        .angles_deg
        .iter()
        .map(|a| a.to_radians().sin())
        .collect();
    let azimuth_bin = axis::nearest(&sines, bearing.sin());
    let in_fov = range_bin.is_some() && doppler_bin.is_some() && azimuth_bin.is_some();

    TruthObject {
        instance_id: obj.instance_id,
        class: obj.class,
        center_world: obj.center,
        box_world: obj.footprint_bounds(),
        range_m: range,
        radial_velocity_mps: radial,
        azimuth_deg: bearing.to_degrees(),
        range_bin,
        doppler_bin,
        azimuth_bin,
        in_fov,
    }
}

/// Synthesizes one radar frame plus its ground truth.
pub fn radar_frame(
    scene: &ResolvedScene,
    slot: &FrameTime,
) -> Result<(RawAdcCube, RadarFrameTruth)> {
    let cube = synthesize_raw(scene, slot.true_time_s)?;
    let objects = scene
        .instant(slot.true_time_s)
        .iter()
        .filter(|obj| obj.instance_id != 0)
        .map(|obj| truth_for(scene, obj))
        .collect();
    let truth = RadarFrameTruth {
        frame_index: slot.index,
        true_time_s: slot.true_time_s,
        timestamp: cube.timestamp,
        objects,
    };
    Ok((cube, truth))
}

/// Renders one camera frame: true-pose imagery stamped with the sensor's
/// clock and its (possibly noisy) reported pose.
pub fn camera_frame(scene: &ResolvedScene, slot: &FrameTime) -> Result<PanopticFrame> {
    let sc = &scene.scene;
    let true_pose = sc.uav_pose_at(slot.true_time_s);
    let mut frame = render_aerial_labels(scene, slot.true_time_s, &true_pose, &sc.camera)?;

    let mut reported = true_pose;
    let sigma = sc.timing.camera_pose_sigma_m;
    if sigma > 0.0 {
        let mut rng = frame_rng(sc.seed, slot.stamp, StreamKind::PoseJitter);
        let normal = Normal::new(0.0, sigma).expect("validated sigma");
        reported.x += normal.sample(&mut rng);
        reported.y += normal.sample(&mut rng);
        reported.z += normal.sample(&mut rng);
    }
    reported.timestamp = slot.stamp;
    frame.timestamp = slot.stamp;
    frame.camera_pose = reported;
    Ok(frame)
}

/// Output of one schedule slot: whichever sensors fired at that instant.
#[derive(Debug, Clone)]
pub struct FrameBundle {
    pub true_time_s: f64,
    pub radar: Option<(RawAdcCube, RadarFrameTruth)>,
    pub camera: Option<PanopticFrame>,
}

/// Generates the whole sequence, merged by true capture time (radar first
/// when both sensors fire at the same instant).
pub fn generate_sequence(scene: &ResolvedScene) -> Result<Vec<FrameBundle>> {
    let plan = plan_sequence(&scene.scene.timing)?;
    let mut bundles: Vec<FrameBundle> = Vec::new();
    let (mut ri, mut ci) = (0, 0);
    while ri < plan.radar.len() || ci < plan.camera.len() {
        let take_radar = match (plan.radar.get(ri), plan.camera.get(ci)) {
            (Some(r), Some(c)) => r.true_time_s <= c.true_time_s,
            (Some(_), None) => true,
            _ => false,
        };
        if take_radar {
            let slot = &plan.radar[ri];
            bundles.push(FrameBundle {
                true_time_s: slot.true_time_s,
                radar: Some(radar_frame(scene, slot)?),
                camera: None,
            });
            ri += 1;
        } else {
            let slot = &plan.camera[ci];
            bundles.push(FrameBundle {
                true_time_s: slot.true_time_s,
                radar: None,
                camera: Some(camera_frame(scene, slot)?),
            });
            ci += 1;
        }
    }
    Ok(bundles)
}
