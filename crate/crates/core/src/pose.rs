//! Rig poses and the orientation conventions shared by every sensor.
//!
//! World frame: right-handed, `x`/`y` span the ground plane, `z` points up.
//! The ground itself is the plane `z = 0`.
//!
//! Orientation is yaw/pitch/roll in degrees:
//!
//! * At zero orientation a sensor looks along world `+x`, horizontally.
//! * `yaw` rotates the view counterclockwise (seen from above) about world
//!   `z`; a yaw of 90° looks along `+y`.
//! * `pitch` tilts the view **downward**; 90° looks straight at the ground
//!   (nadir), which is the natural hover attitude for the aerial camera.
//! * `roll` turns the sensor about its own viewing axis (positive rolls the
//!   image clockwise as seen by the sensor).
//!
//! Camera-frame axes follow the usual computer-vision convention: `+x` is
//! image right, `+y` is image down, `+z` is the viewing direction. At nadir
//! with zero yaw the top of the image points along world `+x`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Pose of a sensor rig: position in meters, orientation in degrees, and the
/// time at which the pose was sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(default)]
    pub yaw_deg: f64,
    #[serde(default)]
    pub pitch_deg: f64,
    #[serde(default)]
    pub roll_deg: f64,
    #[serde(default)]
    pub timestamp: f64,
}

impl Default for RigPose {
    fn default() -> Self {
        RigPose {
            x: 0.0,
            y: 0.0,
            z: 0.0,
            yaw_deg: 0.0,
            pitch_deg: 0.0,
            roll_deg: 0.0,
            timestamp: 0.0,
        }
    }
}

impl RigPose {
    pub fn at(x: f64, y: f64, z: f64) -> Self {
        RigPose {
            x,
            y,
            z,
            ..Default::default()
        }
    }

    pub fn with_orientation(mut self, yaw_deg: f64, pitch_deg: f64, roll_deg: f64) -> Self {
        self.yaw_deg = yaw_deg;
        self.pitch_deg = pitch_deg;
        self.roll_deg = roll_deg;
        self
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn yaw_rad(&self) -> f64 {
        self.yaw_deg.to_radians()
    }

    pub fn pitch_rad(&self) -> f64 {
        self.pitch_deg.to_radians()
    }

    pub fn roll_rad(&self) -> f64 {
        self.roll_deg.to_radians()
    }

    /// Viewing direction in world coordinates (unit vector).
    pub fn view_direction(&self) -> Vector3<f64> {
        let (sy, cy) = self.yaw_rad().sin_cos();
        let (sp, cp) = self.pitch_rad().sin_cos();
        Vector3::new(cp * cy, cp * sy, -sp)
    }

    /// Rotation taking camera-frame vectors (x right, y down, z view) to
    /// world-frame vectors. Columns are the camera axes expressed in world
    /// coordinates; the construction stays well-defined at nadir.
    pub fn rotation_camera_to_world(&self) -> Matrix3<f64> {
        let (sy, cy) = self.yaw_rad().sin_cos();
        let view = self.view_direction();
        // Right axis is unaffected by pitch: it stays horizontal until roll.
        let right0 = Vector3::new(sy, -cy, 0.0);
        let down0 = view.cross(&right0);
        let (sr, cr) = self.roll_rad().sin_cos();
        let right = right0 * cr + down0 * sr;
        let down = down0 * cr - right0 * sr;
        Matrix3::from_columns(&[right, down, view])
    }

    /// World point expressed in the camera frame.
    pub fn world_to_camera(&self, p_world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_camera_to_world().transpose() * (p_world - self.position())
    }

    /// Camera-frame point expressed in world coordinates.
    pub fn camera_to_world(&self, p_cam: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_camera_to_world() * p_cam + self.position()
    }

    /// Range and bearing (radians, counterclockwise from the boresight set by
    /// `yaw`) of a ground point relative to this pose, ignoring height.
    pub fn range_bearing_to(&self, x: f64, y: f64) -> (f64, f64) {
        let dx = x - self.x;
        let dy = y - self.y;
        let range = dx.hypot(dy);
        let bearing = wrap_angle(dy.atan2(dx) - self.yaw_rad());
        (range, bearing)
    }

    /// Serializes position and orientation as the six floats used by the
    /// binary frame headers: x, y, z, yaw, pitch, roll.
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.x,
            self.y,
            self.z,
            self.yaw_deg,
            self.pitch_deg,
            self.roll_deg,
        ]
    }

    pub fn from_array(a: [f64; 6], timestamp: f64) -> Self {
        RigPose {
            x: a[0],
            y: a[1],
            z: a[2],
            yaw_deg: a[3],
            pitch_deg: a[4],
            roll_deg: a[5],
            timestamp,
        }
    }
}

/// Wraps an angle in radians to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a <= -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    } else if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_orientation_looks_along_x() {
        let p = RigPose::default();
        let v = p.view_direction();
        assert_relative_eq!(v.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(v.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(v.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nadir_pitch_looks_straight_down() {
        let p = RigPose::at(0.0, 0.0, 25.0).with_orientation(0.0, 90.0, 0.0);
        let v = p.view_direction();
        assert_relative_eq!(v.z, -1.0, epsilon = 1e-12);
        // Image down points backward (−x), so image top faces +x.
        let r = p.rotation_camera_to_world();
        let down = r.column(1);
        assert_relative_eq!(down[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let p = RigPose::at(1.0, 2.0, 3.0).with_orientation(33.0, 57.0, -12.0);
        let r = p.rotation_camera_to_world();
        let should_be_eye = r.transpose() * r;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(should_be_eye[(i, j)], expect, epsilon = 1e-12);
            }
        }
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn world_camera_round_trip() {
        let p = RigPose::at(5.0, -3.0, 12.0).with_orientation(120.0, 45.0, 10.0);
        let w = Vector3::new(7.5, 2.0, 0.0);
        let back = p.camera_to_world(&p.world_to_camera(&w));
        assert_relative_eq!((back - w).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn bearing_follows_yaw() {
        // A target straight ahead of a 90°-yawed radar sits on the +y axis.
        let p = RigPose::at(0.0, 0.0, 0.0).with_orientation(90.0, 0.0, 0.0);
        let (range, bearing) = p.range_bearing_to(0.0, 10.0);
        assert_relative_eq!(range, 10.0, epsilon = 1e-12);
        assert_relative_eq!(bearing, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn wrap_angle_stays_in_half_open_interval() {
        for k in -8..=8 {
            let a = 0.3 + k as f64 * std::f64::consts::TAU;
            assert_relative_eq!(wrap_angle(a), 0.3, epsilon = 1e-9);
        }
        assert!(wrap_angle(std::f64::consts::PI) > 0.0);
        assert!(wrap_angle(-std::f64::consts::PI) > 0.0);
    }
}
