//! Lookup on monotonically ascending axis vectors.
//!
//! Spectral axes are not necessarily uniform (the azimuth axis is arcsine
//! spaced), so interpolation and bin snapping go through binary search on the
//! axis values rather than index arithmetic.

/// Bracketing interval for interpolation: returns `(i, frac)` such that
/// `axis[i] ≤ v ≤ axis[i+1]` and `frac` is the linear position of `v` inside
/// that interval. `None` when `v` lies outside the axis or the axis has fewer
/// than two entries (a single-entry axis matches only its own value).
pub fn bracket(axis: &[f64], v: f64) -> Option<(usize, f64)> {
    if axis.is_empty() || v < axis[0] || v > axis[axis.len() - 1] {
        return None;
    }
    if axis.len() == 1 {
        return Some((0, 0.0));
    }
    // Last index with axis[i] ≤ v, capped so i+1 stays in bounds.
    let i = axis.partition_point(|&a| a <= v).saturating_sub(1);
    let i = i.min(axis.len() - 2);
    let span = axis[i + 1] - axis[i];
    let frac = if span > 0.0 { (v - axis[i]) / span } else { 0.0 };
    Some((i, frac))
}

/// Index of the axis entry closest to `v`, `None` outside the axis span.
pub fn nearest(axis: &[f64], v: f64) -> Option<usize> {
    let (i, frac) = bracket(axis, v)?;
    Some(if frac <= 0.5 { i } else { i + 1 })
}

/// Largest index with `axis[i] ≤ v`, clamped to 0 when `v` precedes the axis
/// (outward snap for the lower edge of an interval).
pub fn snap_low(axis: &[f64], v: f64) -> usize {
    axis.partition_point(|&a| a <= v).saturating_sub(1)
}

/// Smallest index with `axis[i] ≥ v`, clamped to the last index when `v`
/// exceeds the axis (outward snap for the upper edge of an interval).
pub fn snap_high(axis: &[f64], v: f64) -> usize {
    axis.partition_point(|&a| a < v).min(axis.len() - 1)
}
