//! Observed ground area of the aerial camera: the closed-form quadrilateral
//! for level flight and the general ray-cast version for 6-DoF poses.
//!
//! Corner rays spread by the *combined* per-axis angle — the pinhole angle
//! of the sensor corner plus the physical lens half-FoV, blended linearly
//! across the sensor. At the corner the vertical angle is therefore
//! `fov_v/2 + atan(h/2f)`, which is exactly the angle the closed form feeds
//! into `z·tan(·)`; the two constructions agree for level flight by design,
//! and the ray cast extends the same geometry to tilted poses.

use nalgebra::Vector3;

use crate::camera::model::CameraModel;
use crate::error::{Error, Result};
use crate::pose::RigPose;

/// The four image corners, named in image orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadCorner {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl QuadCorner {
    pub const ALL: [QuadCorner; 4] = [
        QuadCorner::TopLeft,
        QuadCorner::TopRight,
        QuadCorner::BottomLeft,
        QuadCorner::BottomRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuadCorner::TopLeft => "top-left",
            QuadCorner::TopRight => "top-right",
            QuadCorner::BottomLeft => "bottom-left",
            QuadCorner::BottomRight => "bottom-right",
        }
    }

    /// Corner position in pixel coordinates (image corners, not pixel
    /// centers).
    pub fn pixel(self, model: &CameraModel) -> [f64; 2] {
        let (w, h) = (model.width_px as f64, model.height_px as f64);
        match self {
            QuadCorner::TopLeft => [0.0, 0.0],
            QuadCorner::TopRight => [w, 0.0],
            QuadCorner::BottomLeft => [0.0, h],
            QuadCorner::BottomRight => [w, h],
        }
    }

    /// Signed unit offsets across the sensor: (+1 right, +1 bottom).
    fn signs(self) -> (f64, f64) {
        match self {
            QuadCorner::TopLeft => (-1.0, -1.0),
            QuadCorner::TopRight => (1.0, -1.0),
            QuadCorner::BottomLeft => (-1.0, 1.0),
            QuadCorner::BottomRight => (1.0, 1.0),
        }
    }
}

/// Ground-plane quadrilateral observed by the camera, world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundQuad {
    pub c_tl: [f64; 2],
    pub c_tr: [f64; 2],
    pub c_bl: [f64; 2],
    pub c_br: [f64; 2],
    /// Intersection of the optical axis with the ground.
    pub c0: [f64; 2],
}

impl GroundQuad {
    pub fn corner(&self, which: QuadCorner) -> [f64; 2] {
        match which {
            QuadCorner::TopLeft => self.c_tl,
            QuadCorner::TopRight => self.c_tr,
            QuadCorner::BottomLeft => self.c_bl,
            QuadCorner::BottomRight => self.c_br,
        }
    }

    /// Corners in boundary order (TL, TR, BR, BL).
    pub fn boundary(&self) -> [[f64; 2]; 4] {
        [self.c_tl, self.c_tr, self.c_br, self.c_bl]
    }

    /// Checks that the boundary is a simple (here: convex) quadrilateral
    /// with the optical-axis point inside it.
    pub fn validate(&self) -> Result<()> {
        let b = self.boundary();
        let cross = |o: [f64; 2], a: [f64; 2], p: [f64; 2]| {
            (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
        };
        let mut orientation = 0.0f64;
        for i in 0..4 {
            let c = cross(b[i], b[(i + 1) % 4], b[(i + 2) % 4]);
            if orientation == 0.0 {
                orientation = c;
            } else if c * orientation < 0.0 {
                return Err(Error::Geometry(
                    "observed ground area is not a simple quadrilateral".into(),
                ));
            }
        }
        for i in 0..4 {
            if cross(b[i], b[(i + 1) % 4], self.c0) * orientation < 0.0 {
                return Err(Error::Geometry(
                    "optical-axis ground point lies outside the observed quadrilateral".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Per-axis combined ray angles for a point at fractional sensor position
/// `(sx, sy) ∈ [−1, 1]²` (corner = ±1): pinhole angle of the sensor position
/// plus the lens half-FoV, blended linearly.
fn combined_angles(model: &CameraModel, sx: f64, sy: f64) -> (f64, f64) {
    let phi_h = (sx * model.half_extent_x()).atan() + sx * model.fov_h_deg.to_radians() / 2.0;
    let phi_v = (sy * model.half_extent_y()).atan() + sy * model.fov_v_deg.to_radians() / 2.0;
    (phi_h, phi_v)
}

/// Closed-form observed ground area for level flight at altitude `z`,
/// centered on the optical-axis ground point (`c0 = (0, 0)`).
///
/// Axis convention matches a straight-down camera at yaw 0: the first world
/// coordinate runs toward the top of the image, the second toward the left.
pub fn ground_quad_closed_form(z: f64, model: &CameraModel) -> Result<GroundQuad> {
    if z <= 0.0 {
        return Err(Error::Geometry(format!(
            "camera altitude must be positive, got {z} m"
        )));
    }
    model.validate()?;
    let a_v = model.fov_v_deg.to_radians() / 2.0 + model.half_extent_y().atan();
    let a_h = model.fov_h_deg.to_radians() / 2.0 + model.half_extent_x().atan();
    for (name, a) in [("vertical", a_v), ("horizontal", a_h)] {
        if a >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Geometry(format!(
                "footprint is unbounded: combined {name} half-angle {:.1}° reaches the horizon",
                a.to_degrees()
            )));
        }
    }
    let l_t = z * a_v.tan();
    let l_b = -l_t;
    let l_l = z * a_h.tan();
    let l_r = -l_l;
    let quad = GroundQuad {
        c_tl: [l_t, l_l],
        c_tr: [l_t, l_r],
        c_bl: [l_b, l_l],
        c_br: [l_b, l_r],
        c0: [0.0, 0.0],
    };
    quad.validate()?;
    Ok(quad)
}

fn ground_hit(
    pose: &RigPose,
    dir_world: Vector3<f64>,
    what: &str,
) -> Result<[f64; 2]> {
    if dir_world.z >= -1e-12 {
        return Err(Error::Geometry(format!(
            "{what} ray does not descend to the ground plane"
        )));
    }
    let t = pose.z / -dir_world.z;
    Ok([pose.x + t * dir_world.x, pose.y + t * dir_world.y])
}

/// Intersects the four combined-angle corner rays and the optical axis with
/// the ground plane under the full 6-DoF pose.
pub fn ray_cast_footprint(pose: &RigPose, model: &CameraModel) -> Result<GroundQuad> {
    if pose.z <= 0.0 {
        return Err(Error::Geometry(format!(
            "airborne pose required for a ground footprint, camera altitude is {} m",
            pose.z
        )));
    }
    model.validate()?;
    let rot = pose.rotation_camera_to_world();
    let mut corners = [[0.0f64; 2]; 4];
    for (i, corner) in QuadCorner::ALL.iter().enumerate() {
        let (sx, sy) = corner.signs();
        let (phi_h, phi_v) = combined_angles(model, sx, sy);
        for (axis, phi) in [("horizontal", phi_h), ("vertical", phi_v)] {
            if phi.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(Error::Geometry(format!(
                    "{} corner {axis} angle {:.1}° reaches the horizon",
                    corner.name(),
                    phi.to_degrees()
                )));
            }
        }
        let dir_cam = Vector3::new(phi_h.tan(), phi_v.tan(), 1.0);
        corners[i] = ground_hit(pose, rot * dir_cam, &format!("{} corner", corner.name()))?;
    }
    let c0 = ground_hit(pose, rot * Vector3::new(0.0, 0.0, 1.0), "optical-axis")?;
    let quad = GroundQuad {
        c_tl: corners[0],
        c_tr: corners[1],
        c_bl: corners[2],
        c_br: corners[3],
        c0,
    };
    quad.validate()?;
    Ok(quad)
}

/// Plain pinhole ray of an (undistorted) pixel intersected with the ground
/// plane. Restricted to the ground this mapping is exactly projective, so
/// four of its corner intersections define the image-to-ground homography
/// used for warping.
pub fn pixel_ray_to_ground(model: &CameraModel, pose: &RigPose, pixel: [f64; 2]) -> Result<[f64; 2]> {
    let (xn, yn) = model.pixel_to_normalized(pixel);
    let dir_cam = Vector3::new(xn, yn, 1.0);
    ground_hit(
        pose,
        pose.rotation_camera_to_world() * dir_cam,
        &format!("pixel ({:.1}, {:.1})", pixel[0], pixel[1]),
    )
}

/// Image-to-ground homography of a posed camera, fitted to the ground
/// intersections of the four image-corner rays. For a pinhole camera over a
/// plane the mapping is exactly projective, so four exact correspondences
/// determine it completely and interior pixels follow to numerical
/// precision.
pub fn ground_homography(
    model: &CameraModel,
    pose: &RigPose,
) -> Result<crate::camera::homography::Homography> {
    let (w, h) = (model.width_px as f64, model.height_px as f64);
    let corners = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
    let mut pairs = Vec::with_capacity(4);
    for px in corners {
        pairs.push((px, pixel_ray_to_ground(model, pose, px)?));
    }
    crate::camera::homography::homography_from_correspondences(&pairs)
}

/// Projects a world point into ideal (calibrated) pixel coordinates.
/// Returns `None` when the point lies on or behind the camera plane.
pub fn project_world_to_pixel(
    model: &CameraModel,
    pose: &RigPose,
    world: [f64; 3],
) -> Option<[f64; 2]> {
    let p_cam = pose.world_to_camera(&Vector3::new(world[0], world[1], world[2]));
    if p_cam.z <= 1e-12 {
        return None;
    }
    Some(model.normalized_to_pixel(p_cam.x / p_cam.z, p_cam.y / p_cam.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn nadir(x: f64, y: f64, z: f64, yaw: f64) -> RigPose {
        RigPose::at(x, y, z).with_orientation(yaw, 90.0, 0.0)
    }

    /// Narrow, consistent camera that keeps rays bounded at oblique tilts.
    fn narrow_camera() -> CameraModel {
        let f = 8.0;
        CameraModel {
            focal_length_mm: f,
            sensor_w_mm: 5.8,
            sensor_h_mm: 4.2,
            fov_v_deg: 40.0,
            fov_h_deg: 30.0,
            fov_tolerance: 1.0,
            ..CameraModel::default()
        }
    }

    #[test]
    fn closed_form_scales_linearly_with_altitude() {
        let model = CameraModel::default();
        let q1 = ground_quad_closed_form(25.0, &model).unwrap();
        let q2 = ground_quad_closed_form(50.0, &model).unwrap();
        for c in QuadCorner::ALL {
            assert_relative_eq!(q2.corner(c)[0], 2.0 * q1.corner(c)[0], epsilon = 1e-9);
            assert_relative_eq!(q2.corner(c)[1], 2.0 * q1.corner(c)[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn closed_form_is_symmetric_about_the_center() {
        let q = ground_quad_closed_form(25.0, &CameraModel::default()).unwrap();
        assert_relative_eq!(q.c_tl[0], -q.c_bl[0], epsilon = 1e-12);
        assert_relative_eq!(q.c_tl[1], -q.c_tr[1], epsilon = 1e-12);
        assert_eq!(q.c0, [0.0, 0.0]);
    }

    #[test]
    fn horizon_reaching_angles_are_rejected() {
        let model = CameraModel {
            fov_v_deg: 140.0, // 70° + atan(h/2f) ≈ 94° ≥ 90°
            ..CameraModel::default()
        };
        let err = ground_quad_closed_form(25.0, &model).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
        assert!(err.to_string().contains("unbounded"), "{err}");
    }

    #[test]
    fn nadir_ray_cast_matches_the_closed_form() {
        let model = CameraModel::default();
        let closed = ground_quad_closed_form(25.0, &model).unwrap();
        let cast = ray_cast_footprint(&nadir(0.0, 0.0, 25.0, 0.0), &model).unwrap();
        for c in QuadCorner::ALL {
            assert_relative_eq!(cast.corner(c)[0], closed.corner(c)[0], epsilon = 1e-6);
            assert_relative_eq!(cast.corner(c)[1], closed.corner(c)[1], epsilon = 1e-6);
        }
        assert_relative_eq!(cast.c0[0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(cast.c0[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn yaw_rotates_the_footprint_rigidly_about_the_ground_track() {
        let model = narrow_camera();
        let base = ray_cast_footprint(&nadir(3.0, -2.0, 30.0, 0.0), &model).unwrap();
        let yawed = ray_cast_footprint(&nadir(3.0, -2.0, 30.0, 55.0), &model).unwrap();
        let (s, c) = 55.0f64.to_radians().sin_cos();
        for corner in QuadCorner::ALL {
            let p = base.corner(corner);
            let (dx, dy) = (p[0] - 3.0, p[1] + 2.0);
            let expect = [3.0 + c * dx - s * dy, -2.0 + s * dx + c * dy];
            let got = yawed.corner(corner);
            assert_relative_eq!(got[0], expect[0], epsilon = 1e-9);
            assert_relative_eq!(got[1], expect[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn oblique_tilt_pushes_image_top_corners_farther_out() {
        let model = narrow_camera();
        // 60° downward tilt: image top looks toward the horizon.
        let pose = RigPose::at(0.0, 0.0, 25.0).with_orientation(0.0, 60.0, 0.0);
        let quad = ray_cast_footprint(&pose, &model).unwrap();
        let dist = |p: [f64; 2]| (p[0].powi(2) + p[1].powi(2)).sqrt();
        assert!(dist(quad.c_tl) > dist(quad.c_bl));
        assert!(dist(quad.c_tr) > dist(quad.c_br));
        // The quad stays simple with the axis point inside.
        quad.validate().unwrap();
    }

    #[test]
    fn shallow_tilt_errors_name_the_offending_corner() {
        let model = narrow_camera();
        // 15° tilt with a ~35° combined vertical half-angle: top rays climb.
        let pose = RigPose::at(0.0, 0.0, 25.0).with_orientation(0.0, 15.0, 0.0);
        let err = ray_cast_footprint(&pose, &model).unwrap_err();
        assert!(err.to_string().contains("top-"), "{err}");
    }

    #[test]
    fn pinhole_ground_ray_matches_hand_geometry_at_nadir() {
        let model = CameraModel::default();
        let pose = nadir(0.0, 0.0, 20.0, 0.0);
        let center = pixel_ray_to_ground(&model, &pose, [model.cx(), model.cy()]).unwrap();
        assert_relative_eq!(center[0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(center[1], 0.0, epsilon = 1e-9);
        // Image top-left corner: +x (image up → world +x), +y (image left → world +y).
        let tl = pixel_ray_to_ground(&model, &pose, [0.0, 0.0]).unwrap();
        assert_relative_eq!(tl[0], 20.0 * model.half_extent_y(), epsilon = 1e-9);
        assert_relative_eq!(tl[1], 20.0 * model.half_extent_x(), epsilon = 1e-9);
    }

    #[test]
    fn projection_and_ground_ray_are_inverse_on_the_ground_plane() {
        let model = narrow_camera();
        let pose = RigPose::at(4.0, 9.0, 40.0).with_orientation(25.0, 70.0, 5.0);
        for &(gx, gy) in &[(4.0, 9.0), (10.0, 14.0), (-3.0, 6.5), (8.0, -1.0)] {
            let Some(pixel) = project_world_to_pixel(&model, &pose, [gx, gy, 0.0]) else {
                panic!("ground point unexpectedly behind camera");
            };
            let back = pixel_ray_to_ground(&model, &pose, pixel).unwrap();
            assert_relative_eq!(back[0], gx, epsilon = 1e-9);
            assert_relative_eq!(back[1], gy, epsilon = 1e-9);
        }
    }

    #[test]
    fn points_behind_the_camera_do_not_project() {
        let model = narrow_camera();
        let pose = nadir(0.0, 0.0, 25.0, 0.0);
        assert!(project_world_to_pixel(&model, &pose, [0.0, 0.0, 30.0]).is_none());
    }

    #[test]
    fn corner_fitted_homography_matches_the_ray_cast_on_interior_pixels() {
        let model = narrow_camera();
        for pose in [
            nadir(3.0, -7.0, 25.0, 30.0),
            RigPose::at(4.0, 9.0, 40.0).with_orientation(25.0, 70.0, 5.0),
        ] {
            let h = ground_homography(&model, &pose).unwrap();
            for &pixel in &[
                [12.3, 45.6],
                [800.0, 600.0],
                [1500.5, 100.25],
                [320.0, 1100.0],
            ] {
                let via_h = h.apply(pixel).expect("finite mapping");
                let via_ray = pixel_ray_to_ground(&model, &pose, pixel).unwrap();
                assert_relative_eq!(via_h[0], via_ray[0], epsilon = 1e-8);
                assert_relative_eq!(via_h[1], via_ray[1], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn grounded_pose_is_rejected() {
        let model = narrow_camera();
        let pose = RigPose::at(0.0, 0.0, 0.0).with_orientation(0.0, 90.0, 0.0);
        assert!(ray_cast_footprint(&pose, &model).is_err());
    }
}
