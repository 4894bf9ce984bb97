//! Inverse warping of image rasters onto the world ground grid.
//!
//! `h` maps pixel coordinates to world ground coordinates; warping inverts
//! it and samples the source image at each grid cell center. Label rasters
//! use nearest-neighbor so class and instance ids never blend; intensity
//! rasters use bilinear interpolation. Cells whose pre-image falls outside
//! the source image take the caller's void/fill value.

use ndarray::Array2;

use crate::camera::homography::Homography;
use crate::error::Result;
use crate::grid::GridSpec;
use crate::parallel;

/// Nearest-neighbor inverse warp for id rasters. `src` is indexed
/// `[row][col]` = `[v][u]`.
pub fn warp_nearest<T: Copy + Send + Sync>(
    src: &Array2<T>,
    h: &Homography,
    grid: &GridSpec,
    void: T,
) -> Result<Array2<T>> {
    grid.validate()?;
    let h_inv = h.inverse()?;
    let (rows, cols) = src.dim();
    let out_rows: Vec<Vec<T>> = parallel::map_indexed(grid.ny, |iy| {
        (0..grid.nx)
            .map(|ix| {
                let (x, y) = grid.cell_center(ix, iy);
                let Some([u, v]) = h_inv.apply([x, y]) else {
                    return void;
                };
                let (ui, vi) = (u.floor(), v.floor());
                if ui < 0.0 || vi < 0.0 || ui >= cols as f64 || vi >= rows as f64 {
                    return void;
                }
                src[[vi as usize, ui as usize]]
            })
            .collect()
    });
    Ok(collect_rows(out_rows, grid))
}

/// Bilinear inverse warp for intensity rasters.
pub fn warp_bilinear(
    src: &Array2<f64>,
    h: &Homography,
    grid: &GridSpec,
    fill: f64,
) -> Result<Array2<f64>> {
    grid.validate()?;
    let h_inv = h.inverse()?;
    let (rows, cols) = src.dim();
    let out_rows: Vec<Vec<f64>> = parallel::map_indexed(grid.ny, |iy| {
        (0..grid.nx)
            .map(|ix| {
                let (x, y) = grid.cell_center(ix, iy);
                let Some([u, v]) = h_inv.apply([x, y]) else {
                    return fill;
                };
                // Sample between pixel centers at (i + 0.5, j + 0.5).
                let uf = u - 0.5;
                let vf = v - 0.5;
                let (i0, j0) = (uf.floor(), vf.floor());
                if i0 < 0.0 || j0 < 0.0 || i0 + 1.0 >= cols as f64 || j0 + 1.0 >= rows as f64 {
                    return fill;
                }
                let (i0, j0) = (i0 as usize, j0 as usize);
                let (fu, fv) = (uf - i0 as f64, vf - j0 as f64);
                let v00 = src[[j0, i0]];
                let v01 = src[[j0, i0 + 1]];
                let v10 = src[[j0 + 1, i0]];
                let v11 = src[[j0 + 1, i0 + 1]];
                (1.0 - fv) * ((1.0 - fu) * v00 + fu * v01) + fv * ((1.0 - fu) * v10 + fu * v11)
            })
            .collect()
    });
    Ok(collect_rows(out_rows, grid))
}

fn collect_rows<T: Copy>(rows: Vec<Vec<T>>, grid: &GridSpec) -> Array2<T> {
    let flat: Vec<T> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((grid.ny, grid.nx), flat)
        .expect("row collection matches the grid shape")
}
