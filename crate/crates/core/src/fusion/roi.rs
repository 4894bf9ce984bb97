//! Conversion of world-frame boxes into range–azimuth sections and cropping
//! of processed radar cubes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::project::WorldBox;
use crate::pose::RigPose;
use crate::radar::{axis, RdaCube};

/// A section of the processed cube: a range interval × an azimuth interval,
/// both as physical values and as inclusive bin indices. Doppler is never
/// restricted — crops always keep the full velocity axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaRoi {
    pub range_lo_m: f64,
    pub range_hi_m: f64,
    pub range_bin_lo: usize,
    pub range_bin_hi: usize,
    pub azimuth_lo_deg: f64,
    pub azimuth_hi_deg: f64,
    pub azimuth_bin_lo: usize,
    pub azimuth_bin_hi: usize,
}

/// Smallest distance from `(px, py)` to the box (0 inside).
fn point_to_box_distance(b: &WorldBox, px: f64, py: f64) -> f64 {
    let dx = (b.x_min - px).max(0.0).max(px - b.x_max);
    let dy = (b.y_min - py).max(0.0).max(py - b.y_max);
    dx.hypot(dy)
}

/// Maps a world box to the cube section that contains it, or `None` when
/// the box lies entirely outside the radar's range/azimuth span (callers
/// report such boxes in the skip ledger).
///
/// The range interval spans the box's nearest and farthest points from the
/// radar: corner enumeration gives the maximum, and the nearest point (an
/// edge-interior point when the radar faces a side of the box, the radar
/// itself when inside) gives the minimum. The azimuth interval spans the
/// corner bearings — bearings are monotonic along straight edges, so
/// corners are extremal whenever the radar is outside the box. Both
/// intervals are clipped to the axes and snapped *outward* to bin indices,
/// so the section always contains the clipped box.
pub fn world_box_to_ra(
    world_box: &WorldBox,
    radar_pose: &RigPose,
    range_axis_m: &[f64],
    azimuth_axis_deg: &[f64],
) -> Result<Option<RaRoi>> {
    world_box.validate()?;
    if range_axis_m.is_empty() || azimuth_axis_deg.is_empty() {
        return Err(Error::Config(
            "range and azimuth axes must be non-empty".into(),
        ));
    }

    let corners = [
        (world_box.x_min, world_box.y_min),
        (world_box.x_min, world_box.y_max),
        (world_box.x_max, world_box.y_max),
        (world_box.x_max, world_box.y_min),
    ];
    let polar: Vec<(f64, f64)> = corners
        .iter()
        .map(|&(x, y)| {
            let (r, bearing) = radar_pose.range_bearing_to(x, y);
            (r, bearing.to_degrees())
        })
        .collect();

    let range_lo = point_to_box_distance(world_box, radar_pose.x, radar_pose.y);
    let range_hi = polar.iter().map(|p| p.0).fold(0.0, f64::max);
    let inside = range_lo == 0.0;

    let (az_lo, az_hi) = if inside {
        // The box surrounds the radar; every azimuth is occupied.
        (azimuth_axis_deg[0], *azimuth_axis_deg.last().unwrap())
    } else {
        let lo = polar.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = polar.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > 180.0 {
            // The corner bearings straddle the ±180° cut. A box that does
            // not contain the radar subtends less than 180°, so its true
            // extent lies behind the radar — outside any forward field of
            // view.
            return Ok(None);
        }
        (lo, hi)
    };

    let range_span = (range_axis_m[0], *range_axis_m.last().unwrap());
    let az_span = (azimuth_axis_deg[0], *azimuth_axis_deg.last().unwrap());
    let range_lo = range_lo.max(range_span.0);
    let range_hi = range_hi.min(range_span.1);
    let az_lo = az_lo.max(az_span.0);
    let az_hi = az_hi.min(az_span.1);
    if range_lo > range_hi || az_lo > az_hi {
        return Ok(None);
    }

    Ok(Some(RaRoi {
        range_lo_m: range_lo,
        range_hi_m: range_hi,
        range_bin_lo: axis::snap_low(range_axis_m, range_lo),
        range_bin_hi: axis::snap_high(range_axis_m, range_hi),
        azimuth_lo_deg: az_lo,
        azimuth_hi_deg: az_hi,
        azimuth_bin_lo: axis::snap_low(azimuth_axis_deg, az_lo),
        azimuth_bin_hi: axis::snap_high(azimuth_axis_deg, az_hi),
    }))
}

/// Cuts the section out of the cube: the RoI's range and azimuth bins, the
/// full Doppler axis. Axis metadata is sliced consistently, so the result
/// is a self-consistent (smaller) cube.
pub fn crop_rda(cube: &RdaCube, roi: &RaRoi) -> Result<RdaCube> {
    let (nr, _, na) = cube.dims();
    if roi.range_bin_lo > roi.range_bin_hi || roi.azimuth_bin_lo > roi.azimuth_bin_hi {
        return Err(Error::Geometry(format!(
            "cube section is empty: range bins [{}, {}], azimuth bins [{}, {}]",
            roi.range_bin_lo, roi.range_bin_hi, roi.azimuth_bin_lo, roi.azimuth_bin_hi
        )));
    }
    if roi.range_bin_hi >= nr || roi.azimuth_bin_hi >= na {
        return Err(Error::Shape {
            context: "cube section",
            expected: format!("bins within {nr} range x {na} azimuth"),
            actual: format!(
                "range up to {}, azimuth up to {}",
                roi.range_bin_hi, roi.azimuth_bin_hi
            ),
        });
    }
    let data = cube
        .data
        .slice(ndarray::s![
            roi.range_bin_lo..=roi.range_bin_hi,
            ..,
            roi.azimuth_bin_lo..=roi.azimuth_bin_hi
        ])
        .to_owned();
    let mut azimuth_axis = cube.azimuth_axis.clone();
    azimuth_axis.angles_deg =
        azimuth_axis.angles_deg[roi.azimuth_bin_lo..=roi.azimuth_bin_hi].to_vec();
    azimuth_axis.first_bin += roi.azimuth_bin_lo;
    Ok(RdaCube {
        data,
        range_axis_m: cube.range_axis_m[roi.range_bin_lo..=roi.range_bin_hi].to_vec(),
        velocity_axis_mps: cube.velocity_axis_mps.clone(),
        azimuth_axis,
        db_floor: cube.db_floor,
        timestamp: cube.timestamp,
        pose: cube.pose,
    })
}
