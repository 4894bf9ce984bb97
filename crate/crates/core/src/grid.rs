//! The world grid shared by the Cartesian radar raster, instance projection,
//! and region-of-interest extraction.
//!
//! A grid is an axis-aligned raster on the ground plane. `origin_x`/`origin_y`
//! is the minimum corner of cell `(0, 0)`; cell `(ix, iy)` covers the square
//! `[origin + i·cell, origin + (i+1)·cell)` and is sampled at its center.
//! Arrays over the grid are indexed `[iy][ix]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size_m: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Config(format!(
                "world grid must have at least one cell per axis, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.cell_size_m > 0.0) || !self.cell_size_m.is_finite() {
            return Err(Error::Config(format!(
                "world grid cell size must be positive and finite, got {}",
                self.cell_size_m
            )));
        }
        if !self.origin_x.is_finite() || !self.origin_y.is_finite() {
            return Err(Error::Config("world grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin_x + (ix as f64 + 0.5) * self.cell_size_m,
            self.origin_y + (iy as f64 + 0.5) * self.cell_size_m,
        )
    }

    /// Cell containing the world point, or `None` outside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = (x - self.origin_x) / self.cell_size_m;
        let fy = (y - self.origin_y) / self.cell_size_m;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        (ix < self.nx && iy < self.ny).then_some((ix, iy))
    }

    /// Maximum x/y corner of the grid.
    pub fn max_corner(&self) -> (f64, f64) {
        (
            self.origin_x + self.nx as f64 * self.cell_size_m,
            self.origin_y + self.ny as f64 * self.cell_size_m,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec {
            origin_x: -10.0,
            origin_y: 5.0,
            cell_size_m: 0.5,
            nx: 40,
            ny: 20,
        }
    }

    #[test]
    fn centers_and_lookup_agree() {
        let g = grid();
        for iy in [0usize, 7, 19] {
            for ix in [0usize, 3, 39] {
                let (x, y) = g.cell_center(ix, iy);
                assert_eq!(g.cell_of(x, y), Some((ix, iy)));
            }
        }
    }

    #[test]
    fn outside_points_are_rejected() {
        let g = grid();
        assert_eq!(g.cell_of(-10.01, 6.0), None);
        assert_eq!(g.cell_of(-9.9, 4.99), None);
        let (mx, my) = g.max_corner();
        assert_eq!(g.cell_of(mx + 0.01, my - 0.01), None);
    }

    #[test]
    fn degenerate_specs_are_configuration_errors() {
        let mut g = grid();
        g.nx = 0;
        assert!(g.validate().is_err());
        let mut g = grid();
        g.cell_size_m = 0.0;
        assert!(g.validate().is_err());
    }
}
