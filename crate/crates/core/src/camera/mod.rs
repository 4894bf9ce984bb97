//! Aerial camera geometry: intrinsics and lens distortion, observed ground
//! footprints, plane-to-plane homographies, and label/intensity warping onto
//! the world ground plane.
//!
//! Conventions used throughout:
//!
//! * Camera frame: +x right in the image, +y down in the image, +z along the
//!   view axis. Normalized image coordinates are `x_n = x/z`, `y_n = y/z`.
//! * Pixel coordinates `(u, v)`: `u` grows rightward, `v` downward. Pixel
//!   `(i, j)` covers the unit square `[i, i+1) x [j, j+1)`, so its center is
//!   `(i + 0.5, j + 0.5)` and the image corners lie at `(0, 0)` and
//!   `(width, height)`.
//! * World frame: z up, ground plane at z = 0 (flat-earth assumption).
//!
//! Two ray models coexist deliberately. [`footprint::ray_cast_footprint`]
//! spreads each corner ray by the lens field of view in addition to the
//! sensor-geometry angle, which reproduces the closed-form observed-area
//! corners of [`footprint::ground_quad_closed_form`] for level flight.
//! [`footprint::pixel_ray_to_ground`] is the plain pinhole ray used for
//! per-pixel work: restricted to the ground plane it is exactly projective,
//! so a homography built from four of its corner intersections reproduces it
//! everywhere.

pub mod footprint;
pub mod homography;
pub mod model;
pub mod warp;

pub use footprint::{
    ground_homography, ground_quad_closed_form, pixel_ray_to_ground, project_world_to_pixel,
    ray_cast_footprint, GroundQuad, QuadCorner,
};
pub use homography::{homography_from_correspondences, Homography};
pub use model::{undistort_points, CameraModel, PointUndistortion};
pub use warp::{warp_bilinear, warp_nearest};
