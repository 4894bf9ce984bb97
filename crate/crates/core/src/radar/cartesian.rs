//! Resampling a range–azimuth image onto an axis-aligned world grid.
//!
//! The raster is computed by inverse lookup: every world cell center is
//! transformed into the radar's polar frame (range from the sensor position,
//! bearing relative to the boresight set by the pose yaw) and the dB image is
//! sampled bilinearly at that polar coordinate. Cells outside the sensor's
//! range or azimuth coverage — including cells straddling the field-of-view
//! edge, where one interpolation neighbor would be missing — take the fill
//! value. No extrapolation beyond the outermost bin centers is performed.

use ndarray::Array2;

use crate::error::Result;
use crate::grid::GridSpec;
use crate::parallel;
use crate::pose::RigPose;
use crate::radar::axis;
use crate::radar::cube::{RaImage, WorldRaster};

/// Projects `ra` onto `grid`, placing the sensor according to `radar_pose`
/// (x, y and yaw; height and tilt are not modeled for the ground raster).
pub fn polar_to_cartesian(
    ra: &RaImage,
    radar_pose: &RigPose,
    grid: &GridSpec,
) -> Result<WorldRaster> {
    grid.validate()?;
    let fill = ra.floor_db;
    let range_axis = &ra.range_axis_m;
    let az_axis = &ra.azimuth_axis_deg;

    let rows: Vec<Vec<f64>> = parallel::map_indexed(grid.ny, |iy| {
        (0..grid.nx)
            .map(|ix| {
                let (x, y) = grid.cell_center(ix, iy);
                let (range, bearing) = radar_pose.range_bearing_to(x, y);
                let bearing_deg = bearing.to_degrees();
                let (Some((ri, rf)), Some((ai, af))) = (
                    axis::bracket(range_axis, range),
                    axis::bracket(az_axis, bearing_deg),
                ) else {
                    return fill;
                };
                let ri1 = (ri + 1).min(range_axis.len() - 1);
                let ai1 = (ai + 1).min(az_axis.len() - 1);
                let v00 = ra.db[[ri, ai]];
                let v01 = ra.db[[ri, ai1]];
                let v10 = ra.db[[ri1, ai]];
                let v11 = ra.db[[ri1, ai1]];
                let top = v00 * (1.0 - af) + v01 * af;
                let bot = v10 * (1.0 - af) + v11 * af;
                top * (1.0 - rf) + bot * rf
            })
            .collect()
    });

    let mut db = Array2::zeros((grid.ny, grid.nx));
    for (iy, row) in rows.into_iter().enumerate() {
        for (ix, v) in row.into_iter().enumerate() {
            db[[iy, ix]] = v;
        }
    }

    Ok(WorldRaster {
        db,
        grid: *grid,
        fill_db: fill,
        timestamp: ra.timestamp,
        pose: *radar_pose,
    })
}
