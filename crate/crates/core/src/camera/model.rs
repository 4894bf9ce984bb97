//! Camera intrinsics and the Brown–Conrady lens distortion model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intrinsic description of the aerial camera.
///
/// The physical lens fields of view (`fov_v_deg`, `fov_h_deg`) are carried
/// separately from the sensor geometry (`sensor_*_mm`, `focal_length_mm`):
/// for a strongly distorting wide-angle lens the two disagree, and both
/// enter the observed-ground-area computation. Lengths only ever appear as
/// ratios, so millimetres work throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub focal_length_mm: f64,
    pub sensor_w_mm: f64,
    pub sensor_h_mm: f64,
    pub width_px: usize,
    pub height_px: usize,
    /// Principal point; defaults to the image center.
    pub cx_px: Option<f64>,
    pub cy_px: Option<f64>,
    /// Physical vertical field of view of the lens, degrees.
    pub fov_v_deg: f64,
    /// Physical horizontal field of view of the lens, degrees.
    pub fov_h_deg: f64,
    /// Radial distortion coefficients.
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Tangential distortion coefficients.
    pub p1: f64,
    pub p2: f64,
    /// Relative tolerance for the lens-FoV vs sensor-geometry consistency
    /// check; disagreement beyond it is reported as a warning, not an error.
    pub fov_tolerance: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        // Raspberry Pi Camera Module V2.1 behind a wide-angle lens.
        CameraModel {
            focal_length_mm: 3.04,
            sensor_w_mm: 3.68,
            sensor_h_mm: 2.76,
            width_px: 1640,
            height_px: 1232,
            cx_px: None,
            cy_px: None,
            fov_v_deg: 115.0,
            fov_h_deg: 80.0,
            k1: 0.0,
            k2: 0.0,
            k3: 0.0,
            p1: 0.0,
            p2: 0.0,
            fov_tolerance: 0.05,
        }
    }
}

/// Maximum fixed-point iterations when inverting the distortion model.
const UNDISTORT_MAX_ITER: usize = 50;
/// Convergence tolerance in normalized image units.
const UNDISTORT_TOL: f64 = 1e-12;

impl CameraModel {
    /// Validates hard invariants and returns soft consistency warnings.
    ///
    /// The warning compares `tan(fov/2)` against the sensor-geometry ratio
    /// (`h/2f` vertically, `w/2f` horizontally); the two are independent
    /// inputs and routinely disagree for wide lenses.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.focal_length_mm > 0.0 && self.sensor_w_mm > 0.0 && self.sensor_h_mm > 0.0) {
            return Err(Error::Config(format!(
                "camera focal length and sensor dimensions must be positive, got f = {}, w = {}, h = {}",
                self.focal_length_mm, self.sensor_w_mm, self.sensor_h_mm
            )));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::Config("camera pixel dimensions must be nonzero".into()));
        }
        for (name, v) in [("fov_v_deg", self.fov_v_deg), ("fov_h_deg", self.fov_h_deg)] {
            if !(v > 0.0 && v < 180.0) {
                return Err(Error::Config(format!(
                    "camera {name} must lie in (0, 180), got {v}"
                )));
            }
        }
        let mut warnings = Vec::new();
        for (name, fov_deg, sensor, extent_name) in [
            ("vertical", self.fov_v_deg, self.sensor_h_mm, "h/2f"),
            ("horizontal", self.fov_h_deg, self.sensor_w_mm, "w/2f"),
        ] {
            let lens = (fov_deg.to_radians() / 2.0).tan();
            let geom = sensor / (2.0 * self.focal_length_mm);
            let rel = (lens - geom).abs() / lens.abs().max(geom.abs());
            if rel > self.fov_tolerance {
                let msg = format!(
                    "{name} lens FoV and sensor geometry disagree: tan(fov/2) = {lens:.4} vs {extent_name} = {geom:.4} ({:.0}% apart)",
                    rel * 100.0
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
        Ok(warnings)
    }

    pub fn cx(&self) -> f64 {
        self.cx_px.unwrap_or(self.width_px as f64 / 2.0)
    }

    pub fn cy(&self) -> f64 {
        self.cy_px.unwrap_or(self.height_px as f64 / 2.0)
    }

    /// Focal length in pixels along u.
    pub fn fx(&self) -> f64 {
        self.focal_length_mm / self.sensor_w_mm * self.width_px as f64
    }

    /// Focal length in pixels along v.
    pub fn fy(&self) -> f64 {
        self.focal_length_mm / self.sensor_h_mm * self.height_px as f64
    }

    /// Half-extent of the sensor in normalized units along x (`w/2f`).
    pub fn half_extent_x(&self) -> f64 {
        self.sensor_w_mm / (2.0 * self.focal_length_mm)
    }

    /// Half-extent of the sensor in normalized units along y (`h/2f`).
    pub fn half_extent_y(&self) -> f64 {
        self.sensor_h_mm / (2.0 * self.focal_length_mm)
    }

    pub fn pixel_to_normalized(&self, p: [f64; 2]) -> (f64, f64) {
        ((p[0] - self.cx()) / self.fx(), (p[1] - self.cy()) / self.fy())
    }

    pub fn normalized_to_pixel(&self, x: f64, y: f64) -> [f64; 2] {
        [self.cx() + self.fx() * x, self.cy() + self.fy() * y]
    }

    /// Forward Brown–Conrady model on normalized coordinates: where an ideal
    /// ray lands on the distorted image.
    pub fn distort_normalized(&self, x: f64, y: f64) -> (f64, f64) {
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (self.k1 + r2 * (self.k2 + r2 * self.k3));
        let xd = x * radial + 2.0 * self.p1 * x * y + self.p2 * (r2 + 2.0 * x * x);
        let yd = y * radial + self.p1 * (r2 + 2.0 * y * y) + 2.0 * self.p2 * x * y;
        (xd, yd)
    }

    /// Forward-distorts an ideal pixel into observed image coordinates.
    pub fn distort_pixel(&self, p: [f64; 2]) -> [f64; 2] {
        let (x, y) = self.pixel_to_normalized(p);
        let (xd, yd) = self.distort_normalized(x, y);
        self.normalized_to_pixel(xd, yd)
    }

    /// Inverts the distortion model for one observed pixel via damped
    /// fixed-point iteration. The flag reports convergence.
    pub fn undistort_pixel(&self, p: [f64; 2]) -> ([f64; 2], bool) {
        let (xd, yd) = self.pixel_to_normalized(p);
        let (mut x, mut y) = (xd, yd);
        let mut converged = false;
        let mut damping = 1.0f64;
        let mut last_err = f64::INFINITY;
        for _ in 0..UNDISTORT_MAX_ITER {
            let r2 = x * x + y * y;
            let radial = 1.0 + r2 * (self.k1 + r2 * (self.k2 + r2 * self.k3));
            if radial.abs() < 1e-12 {
                break;
            }
            let dx = 2.0 * self.p1 * x * y + self.p2 * (r2 + 2.0 * x * x);
            let dy = self.p1 * (r2 + 2.0 * y * y) + 2.0 * self.p2 * x * y;
            let nx = x + damping * ((xd - dx) / radial - x);
            let ny = y + damping * ((yd - dy) / radial - y);
            let (fx, fy) = self.distort_normalized(nx, ny);
            let err = ((fx - xd).powi(2) + (fy - yd).powi(2)).sqrt();
            if err > last_err {
                // Overshoot: retry the step more cautiously.
                damping *= 0.5;
                continue;
            }
            let step = ((nx - x).powi(2) + (ny - y).powi(2)).sqrt();
            x = nx;
            y = ny;
            last_err = err;
            if step < UNDISTORT_TOL && err < UNDISTORT_TOL {
                converged = true;
                break;
            }
        }
        (self.normalized_to_pixel(x, y), converged)
    }
}

/// One undistorted point plus its convergence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointUndistortion {
    pub pixel: [f64; 2],
    pub converged: bool,
}

/// Batch inverse-distortion over pixel coordinates. Points that fail to
/// converge keep their last iterate and are flagged rather than failing the
/// whole batch.
pub fn undistort_points(pts: &[[f64; 2]], model: &CameraModel) -> Vec<PointUndistortion> {
    pts.iter()
        .map(|&p| {
            let (pixel, converged) = model.undistort_pixel(p);
            PointUndistortion { pixel, converged }
        })
        .collect()
}
