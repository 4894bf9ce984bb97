//! Intersection over union for pixel masks and axis-aligned world rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seg::RunLengthMask;

/// Axis-aligned rectangle in world metres (or any consistent planar unit).
/// Degenerate rectangles (zero width or height) are treated as empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let rect = Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(Error::Geometry(format!(
                "rectangle bounds must be finite, got x [{x_min}, {x_max}] y [{y_min}, {y_max}]"
            )));
        }
        if x_min > x_max || y_min > y_max {
            return Err(Error::Geometry(format!(
                "rectangle bounds are inverted: x [{x_min}, {x_max}] y [{y_min}, {y_max}]"
            )));
        }
        Ok(rect)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn is_empty(&self) -> bool {
        self.area() <= 0.0
    }

    /// Overlap area with `other`; zero when the rectangles are disjoint.
    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let dx = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let dy = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if dx > 0.0 && dy > 0.0 {
            dx * dy
        } else {
            0.0
        }
    }
}

/// A region that detections and ground truths occupy: either a pixel mask on
/// a common frame grid or an axis-aligned world rectangle. Both kinds of a
/// comparison must match; comparing a mask with a rectangle is an error.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Mask(RunLengthMask),
    Box(Rect),
}

impl Region {
    pub fn is_empty(&self) -> bool {
        match self {
            Region::Mask(mask) => mask.is_empty(),
            Region::Box(rect) => rect.is_empty(),
        }
    }
}

/// Count of row-major indices covered by both run lists (two-pointer sweep).
fn run_intersection(a: &[(u32, u32)], b: &[(u32, u32)]) -> u64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0u64;
    while i < a.len() && j < b.len() {
        let (sa, la) = a[i];
        let (sb, lb) = b[j];
        let (ea, eb) = (sa + la, sb + lb);
        let lo = sa.max(sb);
        let hi = ea.min(eb);
        if hi > lo {
            total += u64::from(hi - lo);
        }
        if ea <= eb {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// Intersection over union of two regions.
///
/// Errors when either region is empty (the ratio is undefined), when mask
/// dimensions differ, or when the region kinds differ.
pub fn iou(a: &Region, b: &Region) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Label(
            "intersection over union of an empty region is undefined".into(),
        ));
    }
    match (a, b) {
        (Region::Mask(ma), Region::Mask(mb)) => {
            if ma.width != mb.width || ma.height != mb.height {
                return Err(Error::Shape {
                    context: "mask intersection over union",
                    expected: format!("{}x{}", ma.width, ma.height),
                    actual: format!("{}x{}", mb.width, mb.height),
                });
            }
            let inter = run_intersection(&ma.runs, &mb.runs);
            let union = ma.pixel_count() as u64 + mb.pixel_count() as u64 - inter;
            Ok(inter as f64 / union as f64)
        }
        (Region::Box(ra), Region::Box(rb)) => {
            let inter = ra.intersection_area(rb);
            let union = ra.area() + rb.area() - inter;
            Ok(inter / union)
        }
        _ => Err(Error::Label(
            "cannot compare a pixel mask with a world rectangle".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;

    fn square_mask(w: usize, h: usize, c0: usize, r0: usize, side: usize) -> RunLengthMask {
        RunLengthMask::from_predicate(w, h, |c, r| {
            c >= c0 && c < c0 + side && r >= r0 && r < r0 + side
        })
    }

    #[test]
    fn identical_regions_score_one_and_disjoint_score_zero() {
        let a = Region::Mask(square_mask(30, 30, 2, 2, 10));
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        let b = Region::Mask(square_mask(30, 30, 15, 15, 10));
        assert_eq!(iou(&a, &b).unwrap(), 0.0);

        let ra = Region::Box(Rect::new(0.0, 4.0, 0.0, 4.0).unwrap());
        let rb = Region::Box(Rect::new(10.0, 14.0, 0.0, 4.0).unwrap());
        assert_eq!(iou(&ra, &ra).unwrap(), 1.0);
        assert_eq!(iou(&ra, &rb).unwrap(), 0.0);
    }

    #[test]
    fn half_overlapping_squares_score_one_third() {
        // Two 10x10 squares offset by half a side overlap in a 5x10 strip:
        // 50 / (100 + 100 - 50) = 1/3, exactly representable checks apply.
        let a = Region::Mask(square_mask(40, 40, 0, 0, 10));
        let b = Region::Mask(square_mask(40, 40, 5, 0, 10));
        assert_eq!(iou(&a, &b).unwrap(), 50.0 / 150.0);

        let ra = Region::Box(Rect::new(0.0, 10.0, 0.0, 10.0).unwrap());
        let rb = Region::Box(Rect::new(5.0, 15.0, 0.0, 10.0).unwrap());
        assert_eq!(iou(&ra, &rb).unwrap(), 50.0 / 150.0);
    }

    #[test]
    fn mask_iou_matches_a_pixel_set_oracle_on_random_masks() {
        let mut rng = ChaCha20Rng::seed_from_u64(404);
        for _ in 0..40 {
            let (w, h) = (rng.gen_range(5..40), rng.gen_range(5..30));
            let da: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.4)).collect();
            let db: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.4)).collect();
            let ma = RunLengthMask::from_predicate(w, h, |c, r| da[r * w + c]);
            let mb = RunLengthMask::from_predicate(w, h, |c, r| db[r * w + c]);
            if ma.is_empty() || mb.is_empty() {
                continue;
            }
            let inter = (0..w * h).filter(|&i| da[i] && db[i]).count();
            let union = (0..w * h).filter(|&i| da[i] || db[i]).count();
            let expected = inter as f64 / union as f64;
            let got = iou(&Region::Mask(ma.clone()), &Region::Mask(mb.clone())).unwrap();
            assert_eq!(got, expected);
            // Symmetry holds exactly.
            assert_eq!(
                got,
                iou(&Region::Mask(mb), &Region::Mask(ma)).unwrap()
            );
            assert!((0.0..=1.0).contains(&got));
        }
    }

    #[test]
    fn empty_regions_are_rejected() {
        let empty = Region::Mask(RunLengthMask::from_predicate(8, 8, |_, _| false));
        let full = Region::Mask(square_mask(8, 8, 0, 0, 4));
        let err = iou(&empty, &full).unwrap_err();
        assert!(err.to_string().contains("empty region"), "{err}");
        assert!(iou(&full, &empty).is_err());

        let point = Region::Box(Rect::new(1.0, 1.0, 0.0, 2.0).unwrap());
        let rect = Region::Box(Rect::new(0.0, 2.0, 0.0, 2.0).unwrap());
        assert!(iou(&point, &rect).is_err());
    }

    #[test]
    fn mixed_kinds_and_mismatched_dims_are_rejected() {
        let mask = Region::Mask(square_mask(8, 8, 0, 0, 4));
        let rect = Region::Box(Rect::new(0.0, 2.0, 0.0, 2.0).unwrap());
        assert!(iou(&mask, &rect).unwrap_err().to_string().contains("mask"));

        let other = Region::Mask(square_mask(9, 8, 0, 0, 4));
        assert!(iou(&mask, &other).is_err());
    }

    #[test]
    fn inverted_and_non_finite_rectangles_are_rejected() {
        assert!(Rect::new(2.0, 1.0, 0.0, 1.0).is_err());
        assert!(Rect::new(0.0, 1.0, 3.0, 2.0).is_err());
        assert!(Rect::new(0.0, f64::NAN, 0.0, 1.0).is_err());
    }
}
