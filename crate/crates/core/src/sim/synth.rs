//! Raw ADC cube synthesis from point scatterers.
//!
//! The dechirped receiver sees each scatterer as a complex tone. For a
//! scatterer at range `r` with radial velocity `v` (positive receding) and
//! azimuth `θ`, virtual element `n`, chirp `m`, fast-time sample `i`:
//!
//! ```text
//! phase = 2π · [ f_c·τ  +  (B/T_c)·τ·t_i  +  d·n·sin θ ]
//! τ     = 2 (r + v·t_slow) / c,   t_slow = m·PRI (+ tx slot offset),
//! t_i   = i / f_s
//! ```
//!
//! The `f_c·τ` term advances chirp to chirp (Doppler), the sweep term beats
//! at the range frequency, and the `d·n·sin θ` term is the plane-wave phase
//! slope across the virtual array. Motion within one chirp is ignored
//! (stop-and-hop); at pedestrian and vehicle speeds the induced range error
//! is far below one range bin. With `tdm_skew_modeled` the per-transmitter
//! firing offset enters `t_slow`, reproducing the uncompensated phase skew
//! of time-multiplexed arrays; by default all channels are treated as
//! sampled simultaneously.
//!
//! Noise is complex white Gaussian. Its scale is specified as the
//! post-processing SNR of a unit-amplitude scatterer: the windowed FFT
//! chain amplifies a coherent tone by `Σw` per axis and noise power by
//! `Σw²` (zero-padding cancels), so the configured SNR is reached with
//! `σ = gain / √(2·SNR)` per noise component, where
//! `gain = (Σw_r·Σw_d·Σw_a) / √(Σw_r²·Σw_d²·Σw_a²)`.

use std::f64::consts::TAU;

use ndarray::Array3;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::parallel;
use crate::radar::{RadarConfig, RawAdcCube};
use crate::seeding::{frame_rng, StreamKind};
use crate::sim::scene::ResolvedScene;
use crate::SPEED_OF_LIGHT;

/// One scatterer as seen from the radar.
struct ReturnPath {
    range_m: f64,
    radial_velocity_mps: f64,
    sin_azimuth: f64,
    amplitude: f64,
}

/// Amplitude gain of the processing chain for a coherent tone relative to
/// white noise: `(Σw_r·Σw_d·Σw_a) / √(Σw_r²·Σw_d²·Σw_a²)`.
pub fn coherent_gain(cfg: &RadarConfig) -> f64 {
    fn sums(w: &[f64]) -> (f64, f64) {
        (
            w.iter().sum::<f64>(),
            w.iter().map(|x| x * x).sum::<f64>(),
        )
    }
    let (sr, sr2) = sums(&cfg.range_window.coefficients(cfg.samples_per_chirp));
    let (sd, sd2) = sums(&cfg.doppler_window.coefficients(cfg.chirps_per_tx));
    let (sa, sa2) = sums(&cfg.angle_window.coefficients(cfg.virtual_channels()));
    (sr * sd * sa) / (sr2 * sd2 * sa2).sqrt()
}

/// Per-component standard deviation of raw-sample noise that leaves a
/// unit-amplitude scatterer at `snr_db` after the full processing chain.
pub fn noise_sigma_for_snr(cfg: &RadarConfig, snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    coherent_gain(cfg) / (2.0 * snr).sqrt()
}

/// Synthesizes the raw ADC cube of one radar frame taken at true time `t`.
///
/// The cube is stamped with `t` plus the radar's clock offset and carries
/// the radar rig pose. An empty scene (or one with no alive objects) yields
/// an all-zero cube when noise is disabled. Errors when a scatterer sits at
/// zero range from the radar.
pub fn synthesize_raw(scene: &ResolvedScene, t: f64) -> Result<RawAdcCube> {
    let sc = &scene.scene;
    let cfg = &sc.radar;
    cfg.validate()?;
    let stamp = t + sc.timing.radar_clock_offset_s;

    let mut returns = Vec::new();
    for obj in scene.instant(t) {
        for s in &obj.scatterers {
            if s.amplitude == 0.0 {
                continue;
            }
            let (range, bearing) = sc.radar_pose.range_bearing_to(s.position[0], s.position[1]);
            if range <= 1e-9 {
                let name = &sc.objects[obj.object_index].name;
                let label = if name.is_empty() {
                    format!("object {}", obj.object_index)
                } else {
                    format!("object '{name}'")
                };
                return Err(Error::Simulation(format!(
                    "a scatterer of {label} sits at zero range from the radar at t = {t} s"
                )));
            }
            let ux = (s.position[0] - sc.radar_pose.x) / range;
            let uy = (s.position[1] - sc.radar_pose.y) / range;
            returns.push(ReturnPath {
                range_m: range,
                radial_velocity_mps: s.velocity[0] * ux + s.velocity[1] * uy,
                sin_azimuth: bearing.sin(),
                amplitude: s.amplitude,
            });
        }
    }

    let n_ch = cfg.virtual_channels();
    let n_chirps = cfg.chirps_per_tx;
    let n_samp = cfg.samples_per_chirp;
    let fs = cfg.sample_rate_hz();
    let pri = cfg.tdm_pri_s();
    let slope = cfg.slope_hz_per_s();
    let fc = cfg.carrier_frequency_hz;
    let spacing = cfg.virtual_element_spacing;

    let channels: Vec<Vec<Complex64>> = parallel::map_indexed(n_ch, |n| {
        let mut cells = vec![Complex64::ZERO; n_chirps * n_samp];
        let tx_offset = if cfg.tdm_skew_modeled {
            (n / cfg.rx_count) as f64 * cfg.chirp_duration_s
        } else {
            0.0
        };
        for ret in &returns {
            let spatial_phase = TAU * spacing * n as f64 * ret.sin_azimuth;
            for m in 0..n_chirps {
                let t_slow = m as f64 * pri + tx_offset;
                let tau =
                    2.0 * (ret.range_m + ret.radial_velocity_mps * t_slow) / SPEED_OF_LIGHT;
                // The beat tone over fast time is a fixed-frequency rotation;
                // one complex exponential per chirp, then a recurrence.
                let mut acc = Complex64::from_polar(ret.amplitude, TAU * fc * tau + spatial_phase);
                let rot = Complex64::from_polar(1.0, TAU * slope * tau / fs);
                for cell in &mut cells[m * n_samp..(m + 1) * n_samp] {
                    *cell += acc;
                    acc *= rot;
                }
            }
        }
        cells
    });

    let mut data = Array3::zeros((n_ch, n_chirps, n_samp));
    for (n, cells) in channels.into_iter().enumerate() {
        for m in 0..n_chirps {
            for i in 0..n_samp {
                data[[n, m, i]] = cells[m * n_samp + i];
            }
        }
    }

    if let Some(snr_db) = sc.noise_snr_db {
        let sigma = noise_sigma_for_snr(cfg, snr_db);
        let mut rng = frame_rng(sc.seed, stamp, StreamKind::RadarNoise);
        for cell in data.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *cell += Complex64::new(sigma * re, sigma * im);
        }
    }

    let mut pose = sc.radar_pose;
    pose.timestamp = stamp;
    RawAdcCube::new(data, cfg.clone(), stamp, pose)
}
