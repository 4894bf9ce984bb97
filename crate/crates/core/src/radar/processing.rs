//! The spectral processing chain: raw cube → range–Doppler maps → angle
//! spectrum → range–azimuth image.
//!
//! Every transform is a windowed, zero-padded forward FFT scaled by
//! `1/√N_fft`, which makes the chain energy-preserving for rectangular
//! windows (Parseval) and keeps magnitudes comparable across pad factors.
//! Doppler and angle spectra are fft-shifted so their axes ascend through
//! zero; the angle spectrum is additionally cropped to the configured field
//! of view.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::parallel;
use crate::radar::cube::{RaImage, RawAdcCube, RdMapStack, RdaCube};

/// Windowed 2D FFT of every virtual channel: fast time → range, slow time →
/// Doppler (fft-shifted).
pub fn range_doppler_map(raw: &RawAdcCube) -> Result<RdMapStack> {
    let cfg = &raw.config;
    cfg.validate()?;
    let (n_ch, n_chirps, n_samp) = raw.data.dim();
    if (n_ch, n_chirps, n_samp)
        != (
            cfg.virtual_channels(),
            cfg.chirps_per_tx,
            cfg.samples_per_chirp,
        )
    {
        return Err(Error::Shape {
            context: "range_doppler_map input",
            expected: format!(
                "{}x{}x{}",
                cfg.virtual_channels(),
                cfg.chirps_per_tx,
                cfg.samples_per_chirp
            ),
            actual: format!("{n_ch}x{n_chirps}x{n_samp}"),
        });
    }

    let nr = cfg.range_fft_len();
    let nd = cfg.doppler_fft_len();
    let w_range = cfg.range_window.coefficients(n_samp);
    let w_doppler = cfg.doppler_window.coefficients(n_chirps);
    let mut planner = FftPlanner::new();
    let fft_range = planner.plan_fft_forward(nr);
    let fft_doppler = planner.plan_fft_forward(nd);
    let scale = 1.0 / ((nr * nd) as f64).sqrt();

    let per_channel: Vec<Array2<Complex64>> = parallel::map_indexed(n_ch, |ch| {
        // Fast-time FFT per chirp.
        let mut rows = Array2::<Complex64>::zeros((n_chirps, nr));
        let mut buf = vec![Complex64::ZERO; nr];
        for m in 0..n_chirps {
            for i in 0..n_samp {
                buf[i] = raw.data[[ch, m, i]] * w_range[i];
            }
            buf[n_samp..].fill(Complex64::ZERO);
            fft_range.process(&mut buf);
            for (o, &v) in rows.row_mut(m).iter_mut().zip(buf.iter()) {
                *o = v;
            }
        }
        // Slow-time FFT per range bin, shifted so negative velocities
        // come first.
        let mut map = Array2::<Complex64>::zeros((nr, nd));
        let mut col = vec![Complex64::ZERO; nd];
        for k in 0..nr {
            for m in 0..n_chirps {
                col[m] = rows[[m, k]] * w_doppler[m];
            }
            col[n_chirps..].fill(Complex64::ZERO);
            fft_doppler.process(&mut col);
            for j in 0..nd {
                map[[k, j]] = col[(j + nd / 2) % nd] * scale;
            }
        }
        map
    });

    let mut data = Array3::zeros((n_ch, nr, nd));
    for (ch, map) in per_channel.into_iter().enumerate() {
        data.index_axis_mut(Axis(0), ch).assign(&map);
    }

    Ok(RdMapStack {
        data,
        range_axis_m: cfg.range_axis(),
        velocity_axis_mps: cfg.velocity_axis(),
        config: cfg.clone(),
        timestamp: raw.timestamp,
        pose: raw.pose,
    })
}

/// FFT across the virtual array at every range–Doppler cell, cropped to the
/// field of view.
///
/// `calibration` is multiplied elementwise onto the channels before the
/// transform; `None` means an identity (uncalibrated) array.
pub fn angle_fft(stack: &RdMapStack, calibration: Option<&[Complex64]>) -> Result<RdaCube> {
    let cfg = &stack.config;
    let n_ch = cfg.virtual_channels();
    let (ch, nr, nd) = stack.data.dim();
    if ch != n_ch {
        return Err(Error::Shape {
            context: "angle_fft channel count",
            expected: format!("{n_ch} virtual channels"),
            actual: format!("{ch}"),
        });
    }
    if let Some(cal) = calibration {
        if cal.len() != n_ch {
            return Err(Error::Shape {
                context: "angle_fft calibration vector",
                expected: format!("{n_ch} entries"),
                actual: format!("{}", cal.len()),
            });
        }
    }

    let na = cfg.angle_fft_len();
    let w_angle = cfg.angle_window.coefficients(n_ch);
    let azimuth = cfg.azimuth_axis();
    let n_keep = azimuth.len();
    let first = azimuth.first_bin;
    let fft_angle = FftPlanner::new().plan_fft_forward(na);
    let scale = 1.0 / (na as f64).sqrt();

    let weights: Vec<Complex64> = (0..n_ch)
        .map(|i| {
            let cal = calibration.map_or(Complex64::new(1.0, 0.0), |c| c[i]);
            cal * w_angle[i]
        })
        .collect();

    let rows: Vec<Array2<Complex64>> = parallel::map_indexed(nr, |r| {
        let mut out = Array2::<Complex64>::zeros((nd, n_keep));
        let mut buf = vec![Complex64::ZERO; na];
        for j in 0..nd {
            for c in 0..n_ch {
                buf[c] = stack.data[[c, r, j]] * weights[c];
            }
            buf[n_ch..].fill(Complex64::ZERO);
            fft_angle.process(&mut buf);
            for a in 0..n_keep {
                out[[j, a]] = buf[(first + a + na / 2) % na] * scale;
            }
        }
        out
    });

    let mut data = Array3::zeros((nr, nd, n_keep));
    for (r, row) in rows.into_iter().enumerate() {
        data.index_axis_mut(Axis(0), r).assign(&row);
    }

    Ok(RdaCube {
        data,
        range_axis_m: stack.range_axis_m.clone(),
        velocity_axis_mps: stack.velocity_axis_mps.clone(),
        azimuth_axis: azimuth,
        db_floor: cfg.db_floor,
        timestamp: stack.timestamp,
        pose: stack.pose,
    })
}

/// Collapses the Doppler axis by maximum magnitude and converts to dB.
///
/// Cells with zero magnitude (or below the floor) take the cube's dB floor.
pub fn ra_image(rda: &RdaCube) -> RaImage {
    let (nr, nd, na) = rda.dims();
    let floor = rda.db_floor;
    let rows: Vec<Vec<f64>> = parallel::map_indexed(nr, |r| {
        (0..na)
            .map(|a| {
                let mut peak_power = 0.0f64;
                for j in 0..nd {
                    let p = rda.data[[r, j, a]].norm_sqr();
                    if p > peak_power {
                        peak_power = p;
                    }
                }
                if peak_power > 0.0 {
                    (10.0 * peak_power.log10()).max(floor)
                } else {
                    floor
                }
            })
            .collect()
    });

    let mut db = Array2::zeros((nr, na));
    for (r, row) in rows.into_iter().enumerate() {
        for (a, v) in row.into_iter().enumerate() {
            db[[r, a]] = v;
        }
    }
    RaImage {
        db,
        range_axis_m: rda.range_axis_m.clone(),
        azimuth_axis_deg: rda.azimuth_axis.angles_deg.clone(),
        floor_db: floor,
        timestamp: rda.timestamp,
        pose: rda.pose,
    }
}
