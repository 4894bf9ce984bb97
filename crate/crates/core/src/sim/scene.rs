//! Scene descriptions: objects with classes, footprints, scatterers, and
//! straight-line trajectories, plus the sensor rigs observing them.
//!
//! Scenes are written as TOML. A minimal example:
//!
//! ```toml
//! seed = 7
//! noise_snr_db = 25.0            # omit for noise-free cubes
//!
//! [radar]                        # waveform table, all keys optional
//! tx_count_used = 1
//! rx_count = 8
//!
//! [radar_pose]
//! x = 0.0
//! y = 0.0
//! z = 0.5
//!
//! [camera]                       # lens table, all keys optional
//!
//! [uav_pose]
//! x = 20.0
//! y = 0.0
//! z = 25.0
//! pitch_deg = 90.0               # nadir
//!
//! [timing]
//! duration_s = 122.0
//! radar_frames = 248
//! camera_frames = 1220
//!
//! [[objects]]
//! name = "ped-1"
//! class = "pedestrians"
//! start = [18.0, -2.0]
//! velocity = [1.0, 0.0]
//! ```
//!
//! Object footprints are axis-aligned rectangles centered on the trajectory
//! position (sizes default per class). Scatterers may be given explicitly
//! (offsets from the object center) or synthesized: the per-class default
//! counts put 1–3 scatterers on a pedestrian's 0.4 m × 0.6 m footprint and
//! 5–10 on a car's 4.5 m × 1.8 m footprint. Synthesis is seeded from
//! `(seed, object index)`, so a scene file always resolves to the same
//! scatterer layout.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::pose::RigPose;
use crate::radar::RadarConfig;
use crate::seeding::{frame_rng, StreamKind};
use crate::seg::ClassId;

/// One point reflector, relative to its object's center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    /// Offset from the object center in world meters (x, y).
    pub offset_m: [f64; 2],
    /// Linear reflection amplitude (multiplied by the object's `rcs`).
    pub amplitude: f64,
}

/// One simulated object: a classed, rectangular ground footprint moving on a
/// straight line, carrying point scatterers for the radar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneObject {
    pub name: String,
    pub class: ClassId,
    /// Footprint size (x extent, y extent) in meters; per-class default when
    /// omitted. The rectangle stays axis-aligned regardless of velocity.
    pub footprint: Option<[f64; 2]>,
    /// Center position at t = 0, world meters.
    pub start: [f64; 2],
    /// Constant velocity, m/s.
    pub velocity: [f64; 2],
    /// Lifetime [spawn, despawn) in seconds; alive for the whole sequence
    /// when omitted. Aliveness is `spawn ≤ t < despawn`.
    pub exists: Option<[f64; 2]>,
    /// Amplitude gain applied to every scatterer of this object.
    pub rcs: f64,
    /// Number of scatterers to synthesize; per-class default when omitted.
    /// Mutually exclusive with `scatterers`.
    pub scatterer_count: Option<usize>,
    /// Explicit scatterer list; synthesized when omitted.
    pub scatterers: Option<Vec<Scatterer>>,
}

impl Default for SceneObject {
    fn default() -> Self {
        SceneObject {
            name: String::new(),
            class: ClassId::Pedestrians,
            footprint: None,
            start: [0.0, 0.0],
            velocity: [0.0, 0.0],
            exists: None,
            rcs: 1.0,
            scatterer_count: None,
            scatterers: None,
        }
    }
}

/// Default footprint (x, y) in meters for each class.
fn default_footprint(class: ClassId) -> [f64; 2] {
    match class {
        ClassId::Pedestrians => [0.4, 0.6],
        ClassId::Cars => [4.5, 1.8],
        ClassId::Trucks => [8.0, 2.5],
        ClassId::Motorbikes => [2.0, 0.8],
        ClassId::Bikes => [1.8, 0.6],
        ClassId::Poles => [0.3, 0.3],
        ClassId::Barriers => [2.0, 0.3],
        ClassId::Obstacles => [1.0, 1.0],
        _ => [1.0, 1.0],
    }
}

/// Default (min, max) synthesized scatterer count per class. Stuff classes
/// get none (they can still carry explicit clutter scatterers).
fn default_scatterer_range(class: ClassId) -> (usize, usize) {
    match class {
        ClassId::Pedestrians => (1, 3),
        ClassId::Cars => (5, 10),
        ClassId::Trucks => (8, 14),
        ClassId::Motorbikes | ClassId::Bikes => (2, 4),
        ClassId::Barriers | ClassId::Poles | ClassId::Obstacles => (1, 3),
        _ => (0, 0),
    }
}

impl SceneObject {
    pub fn footprint_m(&self) -> [f64; 2] {
        self.footprint.unwrap_or_else(|| default_footprint(self.class))
    }

    pub fn alive_at(&self, t: f64) -> bool {
        match self.exists {
            None => true,
            Some([spawn, despawn]) => t >= spawn && t < despawn,
        }
    }

    pub fn center_at(&self, t: f64) -> [f64; 2] {
        [
            self.start[0] + self.velocity[0] * t,
            self.start[1] + self.velocity[1] * t,
        ]
    }

    fn validate(&self, index: usize) -> Result<()> {
        let label = if self.name.is_empty() {
            format!("object {index}")
        } else {
            format!("object '{}'", self.name)
        };
        let fp = self.footprint_m();
        if !(fp[0] > 0.0 && fp[1] > 0.0 && fp[0].is_finite() && fp[1].is_finite()) {
            return Err(Error::Config(format!(
                "{label}: footprint must be positive, got {fp:?}"
            )));
        }
        for v in self.start.iter().chain(self.velocity.iter()) {
            if !v.is_finite() {
                return Err(Error::Config(format!(
                    "{label}: positions and velocities must be finite"
                )));
            }
        }
        if let Some([spawn, despawn]) = self.exists {
            if !(spawn.is_finite() && despawn.is_finite() && spawn < despawn) {
                return Err(Error::Config(format!(
                    "{label}: lifetime must satisfy spawn < despawn, got [{spawn}, {despawn}]"
                )));
            }
        }
        if !(self.rcs >= 0.0 && self.rcs.is_finite()) {
            return Err(Error::Config(format!(
                "{label}: rcs must be non-negative, got {}",
                self.rcs
            )));
        }
        if self.scatterer_count.is_some() && self.scatterers.is_some() {
            return Err(Error::Config(format!(
                "{label}: give either scatterer_count or an explicit scatterer list, not both"
            )));
        }
        if let Some(list) = &self.scatterers {
            for (i, sc) in list.iter().enumerate() {
                if sc.offset_m[0].abs() > fp[0] / 2.0 + 1e-9
                    || sc.offset_m[1].abs() > fp[1] / 2.0 + 1e-9
                {
                    return Err(Error::Config(format!(
                        "{label}: scatterer {i} at offset {:?} lies outside the \
                         {} m x {} m footprint",
                        sc.offset_m, fp[0], fp[1]
                    )));
                }
                if !(sc.amplitude >= 0.0 && sc.amplitude.is_finite()) {
                    return Err(Error::Config(format!(
                        "{label}: scatterer {i} amplitude must be non-negative"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Frame schedules and clock behavior of the two sensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorTiming {
    pub duration_s: f64,
    /// Radar frames, taken at `k · duration / frames` for k = 0..frames.
    pub radar_frames: usize,
    pub camera_frames: usize,
    /// Clock offset added to radar frame stamps (the sensor's clock error).
    pub radar_clock_offset_s: f64,
    /// Clock offset added to camera frame stamps.
    pub camera_clock_offset_s: f64,
    /// Standard deviation of the error between the camera's *reported* pose
    /// and its true pose, per position axis, meters. Frames are rendered
    /// from the true pose and stamped with the noisy estimate, emulating
    /// GNSS/AHRS uncertainty.
    pub camera_pose_sigma_m: f64,
}

impl Default for SensorTiming {
    fn default() -> Self {
        SensorTiming {
            duration_s: 1.0,
            radar_frames: 2,
            camera_frames: 2,
            radar_clock_offset_s: 0.0,
            camera_clock_offset_s: 0.012,
            camera_pose_sigma_m: 0.0,
        }
    }
}

impl SensorTiming {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Config(format!(
                "sequence duration must be positive, got {}",
                self.duration_s
            )));
        }
        if self.radar_frames == 0 || self.camera_frames == 0 {
            return Err(Error::Config(
                "each sensor needs at least one frame in the schedule".into(),
            ));
        }
        if !self.radar_clock_offset_s.is_finite() || !self.camera_clock_offset_s.is_finite() {
            return Err(Error::Config("clock offsets must be finite".into()));
        }
        if !(self.camera_pose_sigma_m >= 0.0 && self.camera_pose_sigma_m.is_finite()) {
            return Err(Error::Config(format!(
                "camera_pose_sigma_m must be non-negative, got {}",
                self.camera_pose_sigma_m
            )));
        }
        Ok(())
    }

    pub fn radar_rate_hz(&self) -> f64 {
        self.radar_frames as f64 / self.duration_s
    }

    pub fn camera_rate_hz(&self) -> f64 {
        self.camera_frames as f64 / self.duration_s
    }
}

/// A complete simulated world: objects plus the radar and UAV rigs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scene {
    pub seed: u64,
    /// Post-processing SNR (dB) that a unit-amplitude scatterer attains at
    /// an exact bin center; `None` disables noise.
    pub noise_snr_db: Option<f64>,
    pub radar: RadarConfig,
    pub radar_pose: RigPose,
    pub camera: CameraModel,
    /// UAV pose at t = 0 (typically hovering at nadir).
    pub uav_pose: RigPose,
    /// Constant UAV drift velocity (x, y, z), m/s.
    pub uav_velocity: [f64; 3],
    pub timing: SensorTiming,
    pub objects: Vec<SceneObject>,
}

impl Default for Scene {
    fn default() -> Self {
        Scene {
            seed: 0,
            noise_snr_db: None,
            radar: RadarConfig::default(),
            radar_pose: RigPose::at(0.0, 0.0, 0.5),
            camera: CameraModel::default(),
            uav_pose: RigPose::at(0.0, 0.0, 25.0).with_orientation(0.0, 90.0, 0.0),
            uav_velocity: [0.0, 0.0, 0.0],
            timing: SensorTiming::default(),
            objects: Vec::new(),
        }
    }
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        for warning in self.camera.validate()? {
            log::warn!("scene camera: {warning}");
        }
        self.timing.validate()?;
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return Err(Error::Config(format!(
                    "noise_snr_db must be finite, got {snr}"
                )));
            }
        }
        if !(self.uav_pose.z > 0.0) {
            return Err(Error::Config(format!(
                "the UAV must fly above the ground, got z = {}",
                self.uav_pose.z
            )));
        }
        for v in self.uav_velocity {
            if !v.is_finite() {
                return Err(Error::Config("uav_velocity must be finite".into()));
            }
        }
        for (i, obj) in self.objects.iter().enumerate() {
            obj.validate(i)?;
        }
        Ok(())
    }

    /// UAV pose at true time `t` (before any reported-pose noise).
    pub fn uav_pose_at(&self, t: f64) -> RigPose {
        let mut pose = self.uav_pose;
        pose.x += self.uav_velocity[0] * t;
        pose.y += self.uav_velocity[1] * t;
        pose.z += self.uav_velocity[2] * t;
        pose.timestamp = t;
        pose
    }

    /// Validates and fixes the scatterer layout of every object.
    pub fn resolve(self) -> Result<ResolvedScene> {
        self.validate()?;
        let mut objects = Vec::with_capacity(self.objects.len());
        let mut next_instance: u16 = 1;
        for (index, obj) in self.objects.iter().enumerate() {
            let scatterers = match &obj.scatterers {
                Some(list) => list.clone(),
                None => synthesize_scatterers(&self, index, obj),
            };
            let instance_id = if obj.class.is_countable() {
                let id = next_instance;
                next_instance = next_instance.checked_add(1).ok_or_else(|| {
                    Error::Config("more than 65535 countable objects in one scene".into())
                })?;
                id
            } else {
                0
            };
            objects.push(ResolvedObject {
                object_index: index,
                instance_id,
                scatterers,
            });
        }
        Ok(ResolvedScene {
            scene: self,
            objects,
        })
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Scene> {
        toml::from_str(text).map_err(|e| Error::format(origin, format!("scene file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Scene> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingInput(path.to_path_buf())
            } else {
                Error::io(path, e)
            }
        })?;
        Scene::from_toml_str(&text, path)
    }
}

/// Draws a seeded scatterer layout inside the object's footprint.
fn synthesize_scatterers(scene: &Scene, index: usize, obj: &SceneObject) -> Vec<Scatterer> {
    let mut rng = frame_rng(scene.seed, index as f64, StreamKind::SceneSynthesis);
    let (lo, hi) = default_scatterer_range(obj.class);
    let count = obj.scatterer_count.unwrap_or_else(|| rng.gen_range(lo..=hi));
    let fp = obj.footprint_m();
    (0..count)
        .map(|_| Scatterer {
            offset_m: [
                rng.gen_range(-fp[0] / 2.0..=fp[0] / 2.0),
                rng.gen_range(-fp[1] / 2.0..=fp[1] / 2.0),
            ],
            amplitude: rng.gen_range(0.5..=1.0),
        })
        .collect()
}

/// A validated scene whose scatterer layouts are fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScene {
    pub scene: Scene,
    pub objects: Vec<ResolvedObject>,
}

/// Per-object resolution: stable instance id plus concrete scatterers.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedObject {
    pub object_index: usize,
    /// Stable across the sequence: countable objects are numbered 1.. in
    /// scene order; stuff objects carry 0.
    pub instance_id: u16,
    pub scatterers: Vec<Scatterer>,
}

/// World-frame state of one alive object at a single instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectInstant {
    pub object_index: usize,
    pub instance_id: u16,
    pub class: ClassId,
    pub center: [f64; 2],
    pub velocity: [f64; 2],
    /// Footprint half extents (x, y), meters.
    pub half_extent: [f64; 2],
    /// Scatterers in world coordinates with effective amplitudes (rcs
    /// applied).
    pub scatterers: Vec<WorldScatterer>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldScatterer {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub amplitude: f64,
}

impl ObjectInstant {
    /// Footprint rectangle as (x_min, x_max, y_min, y_max).
    pub fn footprint_bounds(&self) -> [f64; 4] {
        [
            self.center[0] - self.half_extent[0],
            self.center[0] + self.half_extent[0],
            self.center[1] - self.half_extent[1],
            self.center[1] + self.half_extent[1],
        ]
    }

    /// The scatterer with the largest amplitude (first on ties), if any.
    pub fn strongest_scatterer(&self) -> Option<&WorldScatterer> {
        self.scatterers.iter().reduce(|best, sc| {
            if sc.amplitude > best.amplitude {
                sc
            } else {
                best
            }
        })
    }
}

impl ResolvedScene {
    /// States of all objects alive at true time `t`, in scene order.
    pub fn instant(&self, t: f64) -> Vec<ObjectInstant> {
        self.objects
            .iter()
            .filter_map(|res| {
                let obj = &self.scene.objects[res.object_index];
                if !obj.alive_at(t) {
                    return None;
                }
                let center = obj.center_at(t);
                let fp = obj.footprint_m();
                let scatterers = res
                    .scatterers
                    .iter()
                    .map(|sc| WorldScatterer {
                        position: [center[0] + sc.offset_m[0], center[1] + sc.offset_m[1]],
                        velocity: obj.velocity,
                        amplitude: sc.amplitude * obj.rcs,
                    })
                    .collect();
                Some(ObjectInstant {
                    object_index: res.object_index,
                    instance_id: res.instance_id,
                    class: obj.class,
                    center,
                    velocity: obj.velocity,
                    half_extent: [fp[0] / 2.0, fp[1] / 2.0],
                    scatterers,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ped(start: [f64; 2], velocity: [f64; 2]) -> SceneObject {
        SceneObject {
            name: "ped".into(),
            class: ClassId::Pedestrians,
            start,
            velocity,
            ..SceneObject::default()
        }
    }

    #[test]
    fn toml_round_trip_preserves_the_scene() {
        let mut scene = Scene {
            seed: 9,
            noise_snr_db: Some(22.0),
            ..Scene::default()
        };
        scene.objects.push(ped([18.0, -2.0], [1.0, 0.0]));
        scene.objects.push(SceneObject {
            name: "car".into(),
            class: ClassId::Cars,
            start: [30.0, 5.0],
            exists: Some([2.0, 10.0]),
            scatterer_count: Some(6),
            ..SceneObject::default()
        });
        let text = toml::to_string(&scene).unwrap();
        let back = Scene::from_toml_str(&text, Path::new("inline")).unwrap();
        assert_eq!(back, scene);
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let text = r#"
            [[objects]]
            class = "pedestrians"
            start = [10.0, 0.0]
        "#;
        let scene = Scene::from_toml_str(text, Path::new("inline")).unwrap();
        assert_eq!(scene.objects.len(), 1);
        assert_eq!(scene.objects[0].footprint_m(), [0.4, 0.6]);
        assert_eq!(scene.uav_pose.pitch_deg, 90.0);
        scene.validate().unwrap();
    }

    #[test]
    fn scatterer_synthesis_is_seeded_and_stays_inside_the_footprint() {
        let mut scene = Scene {
            seed: 4,
            ..Scene::default()
        };
        scene.objects.push(ped([10.0, 0.0], [0.0, 0.0]));
        scene.objects.push(SceneObject {
            class: ClassId::Cars,
            start: [20.0, 3.0],
            ..SceneObject::default()
        });
        let a = scene.clone().resolve().unwrap();
        let b = scene.clone().resolve().unwrap();
        assert_eq!(a.objects, b.objects);

        let ped_count = a.objects[0].scatterers.len();
        assert!((1..=3).contains(&ped_count), "{ped_count}");
        let car_count = a.objects[1].scatterers.len();
        assert!((5..=10).contains(&car_count), "{car_count}");
        for (res, obj) in a.objects.iter().zip(&scene.objects) {
            let fp = obj.footprint_m();
            for sc in &res.scatterers {
                assert!(sc.offset_m[0].abs() <= fp[0] / 2.0);
                assert!(sc.offset_m[1].abs() <= fp[1] / 2.0);
                assert!((0.5..=1.0).contains(&sc.amplitude));
            }
        }

        // A different seed draws a different layout.
        let mut other = scene.clone();
        other.seed = 5;
        let c = other.resolve().unwrap();
        assert_ne!(a.objects, c.objects);
    }

    #[test]
    fn instance_ids_count_things_and_skip_stuff() {
        let mut scene = Scene::default();
        scene.objects.push(SceneObject {
            class: ClassId::Street,
            footprint: Some([30.0, 8.0]),
            start: [15.0, 0.0],
            ..SceneObject::default()
        });
        scene.objects.push(ped([10.0, 0.0], [0.0, 0.0]));
        scene.objects.push(ped([14.0, 2.0], [0.0, 0.0]));
        let resolved = scene.resolve().unwrap();
        let ids: Vec<u16> = resolved.objects.iter().map(|o| o.instance_id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn lifetimes_gate_the_instant_and_trajectories_advance() {
        let mut scene = Scene::default();
        scene.timing.duration_s = 20.0;
        let mut walker = ped([10.0, 0.0], [1.0, 0.5]);
        walker.exists = Some([5.0, 15.0]);
        scene.objects.push(walker);
        let resolved = scene.resolve().unwrap();

        assert!(resolved.instant(4.999).is_empty());
        let at_spawn = resolved.instant(5.0);
        assert_eq!(at_spawn.len(), 1);
        assert_eq!(at_spawn[0].center, [15.0, 2.5]);
        assert!(resolved.instant(15.0).is_empty(), "despawn is exclusive");

        let mid = resolved.instant(10.0);
        assert_eq!(mid[0].center, [20.0, 5.0]);
        // Scatterers ride along with the center.
        let sc = mid[0].scatterers[0];
        let off = resolved.objects[0].scatterers[0].offset_m;
        assert_eq!(sc.position, [20.0 + off[0], 5.0 + off[1]]);
        assert_eq!(sc.velocity, [1.0, 0.5]);
    }

    #[test]
    fn invalid_objects_are_rejected() {
        let bad_footprint = SceneObject {
            footprint: Some([0.0, 1.0]),
            ..SceneObject::default()
        };
        let mut scene = Scene::default();
        scene.objects.push(bad_footprint);
        assert!(scene.validate().is_err());

        let outside = SceneObject {
            scatterers: Some(vec![Scatterer {
                offset_m: [5.0, 0.0],
                amplitude: 1.0,
            }]),
            ..SceneObject::default()
        };
        let mut scene = Scene::default();
        scene.objects.push(outside);
        let err = scene.validate().unwrap_err();
        assert!(err.to_string().contains("outside"), "{err}");

        let both = SceneObject {
            scatterer_count: Some(2),
            scatterers: Some(vec![]),
            ..SceneObject::default()
        };
        let mut scene = Scene::default();
        scene.objects.push(both);
        assert!(scene.validate().is_err());

        let mut grounded = Scene::default();
        grounded.uav_pose.z = 0.0;
        assert!(grounded.validate().is_err());

        let mut no_frames = Scene::default();
        no_frames.timing.radar_frames = 0;
        assert!(no_frames.validate().is_err());
    }

    #[test]
    fn strongest_scatterer_prefers_amplitude_then_order() {
        let mut scene = Scene::default();
        scene.objects.push(SceneObject {
            scatterers: Some(vec![
                Scatterer {
                    offset_m: [0.1, 0.0],
                    amplitude: 0.7,
                },
                Scatterer {
                    offset_m: [-0.1, 0.0],
                    amplitude: 0.9,
                },
                Scatterer {
                    offset_m: [0.0, 0.1],
                    amplitude: 0.9,
                },
            ]),
            ..SceneObject::default()
        });
        let resolved = scene.resolve().unwrap();
        let instant = resolved.instant(0.0);
        let strongest = instant[0].strongest_scatterer().unwrap();
        assert_eq!(strongest.position[0], -0.1);
    }
}
