//! Projection of segmented instances onto the radar's world grid and
//! extraction of margin-padded bounding boxes.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::camera::{warp_nearest, Homography};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::seg::{extract_instances, ClassId, PanopticFrame};

/// Ground-plane occupancy of one instance on the world grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldInstanceMask {
    pub instance_id: u16,
    pub class: ClassId,
    pub score: f64,
    /// Occupancy indexed `[iy][ix]` like the grid.
    pub occupancy: Array2<bool>,
    pub cell_count: usize,
}

/// An instance that projected onto no grid cell, with the map location it
/// came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedInstance {
    pub instance_id: u16,
    pub class: ClassId,
    pub pixel_count: usize,
}

/// Result of projecting one frame's instances onto the grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProjectionOutcome {
    pub masks: Vec<WorldInstanceMask>,
    /// Instances whose projection missed the grid entirely.
    pub dropped: Vec<DroppedInstance>,
}

impl Default for WorldInstanceMask {
    fn default() -> Self {
        WorldInstanceMask {
            instance_id: 0,
            class: ClassId::Environment,
            score: 1.0,
            occupancy: Array2::default((0, 0)),
            cell_count: 0,
        }
    }
}

/// Projects every countable instance of `frame` onto the world grid.
///
/// The instance map is inverse-warped once (nearest-neighbor, so ids never
/// blend) and split into per-instance binary occupancies; masks of distinct
/// instances are therefore disjoint by construction. Instances that land on
/// no cell are reported in `dropped`.
pub fn project_instances(
    frame: &PanopticFrame,
    h: &Homography,
    grid: &GridSpec,
) -> Result<ProjectionOutcome> {
    let world_ids = warp_nearest(&frame.instance_map, h, grid, 0u16)?;
    let mut outcome = ProjectionOutcome::default();
    for inst in extract_instances(frame) {
        let occupancy = world_ids.mapv(|id| id == inst.id);
        let cell_count = occupancy.iter().filter(|&&b| b).count();
        if cell_count == 0 {
            outcome.dropped.push(DroppedInstance {
                instance_id: inst.id,
                class: inst.class,
                pixel_count: inst.mask.pixel_count(),
            });
        } else {
            outcome.masks.push(WorldInstanceMask {
                instance_id: inst.id,
                class: inst.class,
                score: inst.score,
                occupancy,
                cell_count,
            });
        }
    }
    Ok(outcome)
}

/// Axis-aligned world-frame bounding box of one labeled instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub class: ClassId,
    pub instance_id: u16,
    pub score: f64,
}

impl WorldBox {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max && self.y_min < self.y_max) {
            return Err(Error::Geometry(format!(
                "world box must have positive extent, got x [{}, {}], y [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }

    pub fn width_m(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height_m(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Tight boxes around each mask's occupied cells, padded by `margin_m` on
/// every side and clipped to the grid. The tight box covers the occupied
/// cells' full extent (cell centers ± half a cell).
pub fn extract_rois(
    masks: &[WorldInstanceMask],
    grid: &GridSpec,
    margin_m: f64,
) -> Result<Vec<WorldBox>> {
    if !(margin_m >= 0.0 && margin_m.is_finite()) {
        return Err(Error::Config(format!(
            "roi margin must be non-negative, got {margin_m}"
        )));
    }
    grid.validate()?;
    let (gx_max, gy_max) = grid.max_corner();
    let half = grid.cell_size_m / 2.0;
    let mut boxes = Vec::with_capacity(masks.len());
    for mask in masks {
        let mut bounds: Option<[f64; 4]> = None;
        for ((iy, ix), &occ) in mask.occupancy.indexed_iter() {
            if !occ {
                continue;
            }
            let (cx, cy) = grid.cell_center(ix, iy);
            bounds = Some(match bounds {
                None => [cx - half, cx + half, cy - half, cy + half],
                Some([x0, x1, y0, y1]) => [
                    x0.min(cx - half),
                    x1.max(cx + half),
                    y0.min(cy - half),
                    y1.max(cy + half),
                ],
            });
        }
        let Some([x0, x1, y0, y1]) = bounds else {
            return Err(Error::Label(format!(
                "instance {} has an empty world mask; empty projections \
                 belong in the dropped list",
                mask.instance_id
            )));
        };
        let world_box = WorldBox {
            x_min: (x0 - margin_m).max(grid.origin_x),
            x_max: (x1 + margin_m).min(gx_max),
            y_min: (y0 - margin_m).max(grid.origin_y),
            y_max: (y1 + margin_m).min(gy_max),
            class: mask.class,
            instance_id: mask.instance_id,
            score: mask.score,
        };
        world_box.validate()?;
        boxes.push(world_box);
    }
    Ok(boxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::RigPose;
    use ndarray::Array2;

    /// 1 px = 1 m with the origin shared: pixel (u, v) covers world
    /// [u, u+1] × [v, v+1].
    fn identity_homography() -> Homography {
        Homography::identity()
    }

    fn grid_10x10() -> GridSpec {
        GridSpec {
            origin_x: 0.0,
            origin_y: 0.0,
            cell_size_m: 1.0,
            nx: 10,
            ny: 10,
        }
    }

    fn frame_with(instances: &[(u16, ClassId, [usize; 4])]) -> PanopticFrame {
        // 16×16 image; boxes are [row0, row1, col0, col1) half-open.
        let mut class_map = Array2::<u8>::zeros((16, 16));
        let mut instance_map = Array2::<u16>::zeros((16, 16));
        for &(id, class, [r0, r1, c0, c1]) in instances {
            for r in r0..r1 {
                for c in c0..c1 {
                    class_map[[r, c]] = class.as_u8();
                    instance_map[[r, c]] = id;
                }
            }
        }
        PanopticFrame::new(class_map, instance_map, 0.0, RigPose::default()).unwrap()
    }

    #[test]
    fn unit_square_instances_occupy_exactly_their_cells() {
        // A 2×3 pixel patch under the identity mapping covers exactly the
        // same 2×3 block of 1 m cells.
        let frame = frame_with(&[(1, ClassId::Pedestrians, [4, 6, 2, 5])]);
        let out = project_instances(&frame, &identity_homography(), &grid_10x10()).unwrap();
        assert!(out.dropped.is_empty());
        assert_eq!(out.masks.len(), 1);
        let mask = &out.masks[0];
        assert_eq!(mask.cell_count, 6);
        for ((iy, ix), &occ) in mask.occupancy.indexed_iter() {
            let expected = (4..6).contains(&iy) && (2..5).contains(&ix);
            assert_eq!(occ, expected, "cell ({ix}, {iy})");
        }
    }

    #[test]
    fn off_grid_instances_are_dropped_and_reported() {
        let frame = frame_with(&[
            (1, ClassId::Cars, [2, 4, 2, 4]),
            (2, ClassId::Pedestrians, [12, 14, 12, 14]), // beyond the 10 m grid
        ]);
        let out = project_instances(&frame, &identity_homography(), &grid_10x10()).unwrap();
        assert_eq!(out.masks.len(), 1);
        assert_eq!(out.masks[0].instance_id, 1);
        assert_eq!(out.dropped.len(), 1);
        assert_eq!(out.dropped[0].instance_id, 2);
        assert_eq!(out.dropped[0].pixel_count, 4);
    }

    #[test]
    fn disjoint_pixel_sets_project_to_disjoint_world_masks() {
        let frame = frame_with(&[
            (1, ClassId::Cars, [0, 3, 0, 3]),
            (2, ClassId::Cars, [5, 8, 5, 8]),
        ]);
        let out = project_instances(&frame, &identity_homography(), &grid_10x10()).unwrap();
        assert_eq!(out.masks.len(), 2);
        let overlap = out.masks[0]
            .occupancy
            .iter()
            .zip(out.masks[1].occupancy.iter())
            .filter(|(a, b)| **a && **b)
            .count();
        assert_eq!(overlap, 0);
    }

    fn single_cell_mask(grid: &GridSpec, ix: usize, iy: usize) -> WorldInstanceMask {
        let mut occupancy = Array2::from_elem((grid.ny, grid.nx), false);
        occupancy[[iy, ix]] = true;
        WorldInstanceMask {
            instance_id: 7,
            class: ClassId::Pedestrians,
            occupancy,
            cell_count: 1,
            ..WorldInstanceMask::default()
        }
    }

    #[test]
    fn single_cell_roi_is_cell_extent_plus_margin() {
        let grid = grid_10x10();
        let mask = single_cell_mask(&grid, 4, 6);
        let boxes = extract_rois(&[mask], &grid, 0.5).unwrap();
        // Cell (4, 6) covers [4, 5] × [6, 7]; margin 0.5 on each side.
        let b = &boxes[0];
        assert_eq!((b.x_min, b.x_max), (3.5, 5.5));
        assert_eq!((b.y_min, b.y_max), (5.5, 7.5));
        assert_eq!(b.instance_id, 7);
    }

    #[test]
    fn zero_margin_gives_tight_bounds_and_clipping_respects_the_grid() {
        let grid = grid_10x10();
        let corner = single_cell_mask(&grid, 0, 0);
        let tight = extract_rois(&[corner.clone()], &grid, 0.0).unwrap();
        assert_eq!(
            (tight[0].x_min, tight[0].x_max, tight[0].y_min, tight[0].y_max),
            (0.0, 1.0, 0.0, 1.0)
        );
        let padded = extract_rois(&[corner], &grid, 3.0).unwrap();
        // Clipped at the grid edge on the low sides.
        assert_eq!((padded[0].x_min, padded[0].y_min), (0.0, 0.0));
        assert_eq!((padded[0].x_max, padded[0].y_max), (4.0, 4.0));
    }

    #[test]
    fn pedestrian_scale_masks_give_meter_scale_boxes() {
        // A 0.4 m × 0.6 m pedestrian on a 0.2 m grid with the default
        // 0.5 m margin: the box comes out around 1.4 m × 1.6 m.
        let grid = GridSpec {
            origin_x: -10.0,
            origin_y: -10.0,
            cell_size_m: 0.2,
            nx: 100,
            ny: 100,
        };
        let mut occupancy = Array2::from_elem((100, 100), false);
        for iy in 50..53 {
            for ix in 50..52 {
                occupancy[[iy, ix]] = true;
            }
        }
        let mask = WorldInstanceMask {
            instance_id: 1,
            class: ClassId::Pedestrians,
            occupancy,
            cell_count: 6,
            ..WorldInstanceMask::default()
        };
        let b = &extract_rois(&[mask], &grid, 0.5).unwrap()[0];
        assert!((b.width_m() - 1.4).abs() < 1e-9, "{}", b.width_m());
        assert!((b.height_m() - 1.6).abs() < 1e-9, "{}", b.height_m());
    }

    #[test]
    fn invalid_margins_and_empty_masks_are_rejected() {
        let grid = grid_10x10();
        assert!(extract_rois(&[], &grid, -0.1).is_err());
        let empty = WorldInstanceMask {
            occupancy: Array2::from_elem((10, 10), false),
            ..WorldInstanceMask::default()
        };
        assert!(extract_rois(&[empty], &grid, 0.5).is_err());
    }
}
