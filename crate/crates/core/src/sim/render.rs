//! Pixel-perfect aerial label rendering.
//!
//! Every alive object's ground footprint is projected through the ideal
//! (calibrated) pinhole camera and rasterized into class and instance maps.
//! The projection of a ground-plane polygon under a pinhole is again a
//! polygon, so only the corners are projected and edges stay straight.
//! Pixels are labeled when their center falls inside the projected polygon
//! (even–odd rule). Objects are painted in scene order, so a later object
//! overwrites earlier ones where footprints overlap; the aerial view models
//! no vertical occlusion beyond that ordering. Background pixels are
//! `Environment`; stuff-class objects paint their class with instance id 0.

use ndarray::Array2;

use crate::camera::{project_world_to_pixel, CameraModel};
use crate::error::{Error, Result};
use crate::pose::RigPose;
use crate::seg::{ClassId, PanopticFrame};
use crate::sim::scene::ResolvedScene;

/// Fills `class_map`/`instance_map` where pixel centers fall inside the
/// polygon (vertices in pixel coordinates, even–odd rule).
fn fill_polygon(
    class_map: &mut Array2<u8>,
    instance_map: &mut Array2<u16>,
    polygon: &[[f64; 2]],
    class: ClassId,
    instance: u16,
) {
    let (rows, cols) = class_map.dim();
    let y_min = polygon.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let y_max = polygon
        .iter()
        .map(|p| p[1])
        .fold(f64::NEG_INFINITY, f64::max);
    let row_lo = (y_min - 0.5).floor().max(0.0) as usize;
    let row_hi = ((y_max + 0.5).ceil() as i64).min(rows as i64);
    let mut crossings: Vec<f64> = Vec::with_capacity(polygon.len());
    for row in row_lo..row_hi.max(0) as usize {
        let yc = row as f64 + 0.5;
        crossings.clear();
        for i in 0..polygon.len() {
            let a = polygon[i];
            let b = polygon[(i + 1) % polygon.len()];
            // Half-open crossing rule keeps vertices from double-counting.
            if (a[1] <= yc) != (b[1] <= yc) {
                crossings.push(a[0] + (yc - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
            }
        }
        crossings.sort_by(|p, q| p.partial_cmp(q).expect("finite crossings"));
        for span in crossings.chunks_exact(2) {
            // Pixel centers c + 0.5 in [span0, span1).
            let col_lo = (span[0] - 0.5).ceil().max(0.0) as usize;
            let col_hi = ((span[1] - 0.5).ceil() as i64).min(cols as i64);
            for col in col_lo..col_hi.max(0) as usize {
                class_map[[row, col]] = class.as_u8();
                instance_map[[row, col]] = instance;
            }
        }
    }
}

/// Renders the ground-truth panoptic frame seen from `uav_pose` at true
/// time `t`.
///
/// The frame is stamped with `t` and carries `uav_pose`; sequence generation
/// overrides both with the sensor's clock stamp and reported pose. Errors
/// when the camera does not look toward the ground.
pub fn render_aerial_labels(
    scene: &ResolvedScene,
    t: f64,
    uav_pose: &RigPose,
    camera: &CameraModel,
) -> Result<PanopticFrame> {
    if uav_pose.z <= 0.0 {
        return Err(Error::Geometry(format!(
            "the camera must be above the ground to render labels, got z = {}",
            uav_pose.z
        )));
    }
    if uav_pose.view_direction().z >= 0.0 {
        return Err(Error::Geometry(
            "the camera faces away from the ground plane; labels would be empty".into(),
        ));
    }

    let (rows, cols) = (camera.height_px as usize, camera.width_px as usize);
    let mut class_map = Array2::from_elem((rows, cols), ClassId::Environment.as_u8());
    let mut instance_map = Array2::zeros((rows, cols));

    for obj in scene.instant(t) {
        let [x_min, x_max, y_min, y_max] = obj.footprint_bounds();
        let corners = [
            [x_min, y_min],
            [x_min, y_max],
            [x_max, y_max],
            [x_max, y_min],
        ];
        let mut polygon = Vec::with_capacity(4);
        for [x, y] in corners {
            match project_world_to_pixel(camera, uav_pose, [x, y, 0.0]) {
                Some(px) => polygon.push(px),
                None => break,
            }
        }
        if polygon.len() < 4 {
            log::debug!(
                "object {} reaches behind the camera plane; skipped in this frame",
                obj.object_index
            );
            continue;
        }
        fill_polygon(
            &mut class_map,
            &mut instance_map,
            &polygon,
            obj.class,
            obj.instance_id,
        );
    }

    PanopticFrame::new(class_map, instance_map, t, *uav_pose)
}
