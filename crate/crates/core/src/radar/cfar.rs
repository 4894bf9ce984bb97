//! Cell-averaging CFAR detection on range–Doppler–azimuth spectra.
//!
//! Every range–Doppler cell (per azimuth bin) is compared against `α` times
//! the mean power of its training ring: a rectangular window around the cell
//! with an inner guard block excluded. `α` is derived from the configured
//! design false-alarm rate for exponentially distributed noise power,
//! `α = N (P_fa^{-1/N} − 1)`, so on i.i.d. complex Gaussian noise the
//! realized false-alarm rate matches the design value.
//!
//! Cells whose full window would leave the map are not evaluated. Adjacent
//! detections (26-connectivity across range, Doppler, and azimuth) are
//! grouped and each group is collapsed to its strongest cell, whose axis
//! values are then refined by per-axis parabolic interpolation of the
//! log-power.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::parallel;
use crate::radar::cube::RdaCube;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfarConfig {
    /// Guard cells per side along range.
    pub guard_range: usize,
    /// Training cells per side along range (beyond the guard).
    pub train_range: usize,
    /// Guard cells per side along Doppler.
    pub guard_doppler: usize,
    /// Training cells per side along Doppler.
    pub train_doppler: usize,
    /// Design false-alarm probability per evaluated cell.
    pub design_pfa: f64,
}

impl Default for CfarConfig {
    fn default() -> Self {
        CfarConfig {
            guard_range: 2,
            train_range: 8,
            guard_doppler: 1,
            train_doppler: 4,
            design_pfa: 1e-4,
        }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_range == 0 || self.train_doppler == 0 {
            return Err(Error::Config(
                "CFAR needs at least one training cell per side on both axes".into(),
            ));
        }
        if !(self.design_pfa > 0.0 && self.design_pfa < 1.0) {
            return Err(Error::Config(format!(
                "CFAR design_pfa must lie in (0, 1), got {}",
                self.design_pfa
            )));
        }
        Ok(())
    }

    /// Number of training cells in the ring.
    pub fn train_cell_count(&self) -> usize {
        let full = (2 * (self.guard_range + self.train_range) + 1)
            * (2 * (self.guard_doppler + self.train_doppler) + 1);
        let guard = (2 * self.guard_range + 1) * (2 * self.guard_doppler + 1);
        full - guard
    }

    /// Threshold multiplier on the estimated noise power.
    pub fn threshold_factor(&self) -> f64 {
        let n = self.train_cell_count() as f64;
        n * (self.design_pfa.powf(-1.0 / n) - 1.0)
    }
}

/// One detection after peak grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub azimuth_deg: f64,
    /// Peak magnitude, dB.
    pub magnitude_db: f64,
    /// Peak power over the local noise estimate, dB.
    pub snr_db: f64,
    /// Ground-plane position implied by range/azimuth and the radar pose.
    pub world_x_m: f64,
    pub world_y_m: f64,
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub azimuth_bin: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TargetList {
    pub targets: Vec<Target>,
    pub timestamp: f64,
}

/// Runs CA-CFAR over the cube and returns grouped detections sorted by
/// (range bin, Doppler bin, azimuth bin).
pub fn cfar_detect(rda: &RdaCube, cfg: &CfarConfig) -> Result<TargetList> {
    cfg.validate()?;
    let (nr, nd, na) = rda.dims();
    let wr = cfg.guard_range + cfg.train_range;
    let wd = cfg.guard_doppler + cfg.train_doppler;
    if nr < 2 * wr + 1 || nd < 2 * wd + 1 {
        return Err(Error::Shape {
            context: "CFAR window",
            expected: format!("map of at least {}x{} (range x Doppler)", 2 * wr + 1, 2 * wd + 1),
            actual: format!("{nr}x{nd}"),
        });
    }
    let alpha = cfg.threshold_factor();
    let n_train = cfg.train_cell_count() as f64;
    let (gr, gd) = (cfg.guard_range, cfg.guard_doppler);

    // Per-azimuth-slice detection pass: integral image over power makes each
    // window sum O(1).
    let per_slice: Vec<Vec<(usize, usize)>> = parallel::map_indexed(na, |a| {
        let mut power = Array2::<f64>::zeros((nr, nd));
        for r in 0..nr {
            for d in 0..nd {
                power[[r, d]] = rda.data[[r, d, a]].norm_sqr();
            }
        }
        let mut integral = Array2::<f64>::zeros((nr + 1, nd + 1));
        for r in 0..nr {
            for d in 0..nd {
                integral[[r + 1, d + 1]] = power[[r, d]] + integral[[r, d + 1]]
                    + integral[[r + 1, d]]
                    - integral[[r, d]];
            }
        }
        let rect = |r0: usize, r1: usize, d0: usize, d1: usize| -> f64 {
            integral[[r1 + 1, d1 + 1]] - integral[[r0, d1 + 1]] - integral[[r1 + 1, d0]]
                + integral[[r0, d0]]
        };
        let mut dets = Vec::new();
        for r in wr..nr - wr {
            for d in wd..nd - wd {
                let full = rect(r - wr, r + wr, d - wd, d + wd);
                let guard = rect(r - gr, r + gr, d - gd, d + gd);
                let noise = (full - guard) / n_train;
                if power[[r, d]] > alpha * noise {
                    dets.push((r, d));
                }
            }
        }
        dets
    });

    let mut detected: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for (a, dets) in per_slice.into_iter().enumerate() {
        for (r, d) in dets {
            detected.insert((r, d, a));
        }
    }

    let power_at = |r: usize, d: usize, a: usize| rda.data[[r, d, a]].norm_sqr();

    // Group adjacent detections (26-connectivity) and keep each group's
    // strongest cell.
    let mut visited: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    let mut peaks: Vec<(usize, usize, usize)> = Vec::new();
    for &seed in &detected {
        if visited.contains(&seed) {
            continue;
        }
        let mut stack = vec![seed];
        visited.insert(seed);
        let mut best = seed;
        let mut best_power = power_at(seed.0, seed.1, seed.2);
        while let Some((r, d, a)) = stack.pop() {
            let p = power_at(r, d, a);
            if p > best_power {
                best_power = p;
                best = (r, d, a);
            }
            for dr in -1i64..=1 {
                for dd in -1i64..=1 {
                    for da in -1i64..=1 {
                        if dr == 0 && dd == 0 && da == 0 {
                            continue;
                        }
                        let nr_i = r as i64 + dr;
                        let nd_i = d as i64 + dd;
                        let na_i = a as i64 + da;
                        if nr_i < 0 || nd_i < 0 || na_i < 0 {
                            continue;
                        }
                        let n = (nr_i as usize, nd_i as usize, na_i as usize);
                        if detected.contains(&n) && visited.insert(n) {
                            stack.push(n);
                        }
                    }
                }
            }
        }
        peaks.push(best);
    }
    peaks.sort_unstable();

    let range_bin_w = if rda.range_axis_m.len() > 1 {
        rda.range_axis_m[1] - rda.range_axis_m[0]
    } else {
        0.0
    };
    let vel_bin_w = if rda.velocity_axis_mps.len() > 1 {
        rda.velocity_axis_mps[1] - rda.velocity_axis_mps[0]
    } else {
        0.0
    };

    let mut targets = Vec::with_capacity(peaks.len());
    for (r, d, a) in peaks {
        let p = power_at(r, d, a);
        // Per-axis sub-bin refinement on log power.
        let delta = |lo: Option<f64>, mid: f64, hi: Option<f64>| -> f64 {
            let (Some(lo), Some(hi)) = (lo, hi) else { return 0.0 };
            if lo <= 0.0 || hi <= 0.0 || mid <= 0.0 {
                return 0.0;
            }
            let (l0, l1, l2) = (lo.ln(), mid.ln(), hi.ln());
            let denom = l0 - 2.0 * l1 + l2;
            if denom >= 0.0 || !denom.is_finite() {
                return 0.0;
            }
            (0.5 * (l0 - l2) / denom).clamp(-0.5, 0.5)
        };
        let dr = delta(
            (r > 0).then(|| power_at(r - 1, d, a)),
            p,
            (r + 1 < nr).then(|| power_at(r + 1, d, a)),
        );
        let dd = delta(
            (d > 0).then(|| power_at(r, d - 1, a)),
            p,
            (d + 1 < nd).then(|| power_at(r, d + 1, a)),
        );
        let da = delta(
            (a > 0).then(|| power_at(r, d, a - 1)),
            p,
            (a + 1 < na).then(|| power_at(r, d, a + 1)),
        );

        let range_m = rda.range_axis_m[r] + dr * range_bin_w;
        let velocity_mps = rda.velocity_axis_mps[d] + dd * vel_bin_w;
        let az = &rda.azimuth_axis.angles_deg;
        let azimuth_deg = if da >= 0.0 && a + 1 < az.len() {
            az[a] + da * (az[a + 1] - az[a])
        } else if da < 0.0 && a > 0 {
            az[a] + da * (az[a] - az[a - 1])
        } else {
            az[a]
        };

        // Training-ring noise estimate at the peak, for the reported SNR.
        let mut noise_sum = 0.0;
        let mut noise_cells = 0usize;
        for rr in r.saturating_sub(wr)..=(r + wr).min(nr - 1) {
            for dj in d.saturating_sub(wd)..=(d + wd).min(nd - 1) {
                let in_guard = rr.abs_diff(r) <= gr && dj.abs_diff(d) <= gd;
                if !in_guard {
                    noise_sum += power_at(rr, dj, a);
                    noise_cells += 1;
                }
            }
        }
        let noise = noise_sum / noise_cells.max(1) as f64;
        let snr_db = if noise > 0.0 {
            10.0 * (p / noise).log10()
        } else {
            f64::INFINITY
        };

        let bearing = rda.pose.yaw_rad() + azimuth_deg.to_radians();
        targets.push(Target {
            range_m,
            velocity_mps,
            azimuth_deg,
            magnitude_db: 10.0 * p.log10(),
            snr_db,
            world_x_m: rda.pose.x + range_m * bearing.cos(),
            world_y_m: rda.pose.y + range_m * bearing.sin(),
            range_bin: r,
            doppler_bin: d,
            azimuth_bin: a,
        });
    }

    Ok(TargetList {
        targets,
        timestamp: rda.timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::RigPose;
    use approx::assert_relative_eq;
    use ndarray::Array3;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;

    fn cube_from_power(data: Array3<Complex64>) -> RdaCube {
        let (nr, nd, na) = data.dim();
        RdaCube {
            data,
            range_axis_m: (0..nr).map(|k| k as f64 * 0.15).collect(),
            velocity_axis_mps: (0..nd)
                .map(|j| (j as f64 - (nd / 2) as f64) * 0.06)
                .collect(),
            azimuth_axis: crate::radar::config::AzimuthAxis::from_angles(
                (0..na).map(|a| -60.0 + a as f64 * (120.0 / (na - 1) as f64)).collect(),
            ),
            db_floor: -120.0,
            timestamp: 0.0,
            pose: RigPose::default(),
        }
    }

    #[test]
    fn single_peak_over_uniform_floor_gives_exactly_one_target() {
        // Constant synthetic floor with one cell 20 dB above it. The noise
        // estimate everywhere equals the floor power, so only the peak
        // crosses α ≈ 9.4 (≈ 9.7 dB).
        let floor = Complex64::new(1e-3, 0.0);
        let mut data = Array3::from_elem((64, 32, 9), floor);
        data[[30, 20, 4]] = Complex64::new(1e-2, 0.0);
        let rda = cube_from_power(data);
        let list = cfar_detect(&rda, &CfarConfig::default()).unwrap();
        assert_eq!(list.targets.len(), 1);
        let t = &list.targets[0];
        assert_eq!((t.range_bin, t.doppler_bin, t.azimuth_bin), (30, 20, 4));
        assert_relative_eq!(t.magnitude_db, 20.0 * (1e-2f64).log10(), epsilon = 1e-9);
        assert_relative_eq!(t.snr_db, 20.0, epsilon = 0.2);
        // Single-cell peak over a flat floor: no sub-bin shift.
        assert_relative_eq!(t.range_m, rda.range_axis_m[30], epsilon = 1e-9);
    }

    #[test]
    fn well_separated_scatterers_give_exactly_two_targets() {
        let floor = Complex64::new(1e-3, 0.0);
        let mut data = Array3::from_elem((96, 48, 9), floor);
        data[[20, 10, 2]] = Complex64::new(5e-2, 0.0);
        data[[70, 35, 6]] = Complex64::new(3e-2, 0.0);
        let rda = cube_from_power(data);
        let list = cfar_detect(&rda, &CfarConfig::default()).unwrap();
        assert_eq!(list.targets.len(), 2);
        assert_eq!(
            (list.targets[0].range_bin, list.targets[0].doppler_bin),
            (20, 10)
        );
        assert_eq!(
            (list.targets[1].range_bin, list.targets[1].doppler_bin),
            (70, 35)
        );
    }

    #[test]
    fn adjacent_detections_collapse_to_the_strongest_cell() {
        let floor = Complex64::new(1e-3, 0.0);
        let mut data = Array3::from_elem((64, 32, 5), floor);
        // A 2x2 blob straddling two azimuth bins.
        data[[30, 20, 2]] = Complex64::new(4e-2, 0.0);
        data[[31, 20, 2]] = Complex64::new(3e-2, 0.0);
        data[[30, 21, 2]] = Complex64::new(2e-2, 0.0);
        data[[30, 20, 3]] = Complex64::new(1e-2, 0.0);
        let rda = cube_from_power(data);
        let list = cfar_detect(&rda, &CfarConfig::default()).unwrap();
        assert_eq!(list.targets.len(), 1);
        assert_eq!(
            (
                list.targets[0].range_bin,
                list.targets[0].doppler_bin,
                list.targets[0].azimuth_bin
            ),
            (30, 20, 2)
        );
    }

    #[test]
    fn window_larger_than_map_is_rejected() {
        let data = Array3::from_elem((16, 8, 3), Complex64::new(1e-3, 0.0));
        let rda = cube_from_power(data);
        let err = cfar_detect(&rda, &CfarConfig::default());
        assert!(matches!(err, Err(Error::Shape { .. })));
    }

    #[test]
    fn false_alarm_rate_tracks_design_pfa_on_gaussian_noise() {
        // ≥ 1e6 evaluated cells of i.i.d. complex Gaussian noise: the
        // realized false-alarm rate must sit within a factor of 3 of the
        // design rate.
        let cfg = CfarConfig::default();
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let (nr, nd, na) = (600, 310, 6);
        let data = Array3::from_shape_fn((nr, nd, na), |_| {
            Complex64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal))
        });
        let rda = cube_from_power(data);
        let wr = cfg.guard_range + cfg.train_range;
        let wd = cfg.guard_doppler + cfg.train_doppler;
        let evaluated = ((nr - 2 * wr) * (nd - 2 * wd) * na) as f64;
        assert!(evaluated >= 1.0e6, "need ≥ 1e6 cells, have {evaluated}");
        let list = cfar_detect(&rda, &cfg).unwrap();
        let rate = list.targets.len() as f64 / evaluated;
        assert!(
            rate > cfg.design_pfa / 3.0 && rate < cfg.design_pfa * 3.0,
            "false-alarm rate {rate:.3e} outside 3x of {:.1e}",
            cfg.design_pfa
        );
    }

    #[test]
    fn threshold_factor_matches_ca_cfar_formula() {
        let cfg = CfarConfig::default();
        // 21x11 window minus 5x3 guard block = 216 training cells.
        assert_eq!(cfg.train_cell_count(), 216);
        let n = 216.0f64;
        assert_relative_eq!(
            cfg.threshold_factor(),
            n * ((1e-4f64).powf(-1.0 / n) - 1.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn world_position_follows_pose_yaw() {
        let floor = Complex64::new(1e-3, 0.0);
        let mut data = Array3::from_elem((64, 32, 9), floor);
        data[[30, 16, 4]] = Complex64::new(1e-1, 0.0); // boresight bin (0°)
        let mut rda = cube_from_power(data);
        rda.pose = RigPose::at(2.0, 1.0, 0.0).with_orientation(90.0, 0.0, 0.0);
        let list = cfar_detect(&rda, &CfarConfig::default()).unwrap();
        let t = &list.targets[0];
        assert_relative_eq!(t.world_x_m, 2.0, epsilon = 1e-9);
        assert_relative_eq!(t.world_y_m, 1.0 + t.range_m, epsilon = 1e-9);
    }

    #[test]
    fn defaults_validate_and_bad_pfa_is_rejected() {
        CfarConfig::default().validate().unwrap();
        let bad = CfarConfig {
            design_pfa: 0.0,
            ..CfarConfig::default()
        };
        assert!(bad.validate().is_err());
        let no_train = CfarConfig {
            train_range: 0,
            ..CfarConfig::default()
        };
        assert!(no_train.validate().is_err());
    }
}
