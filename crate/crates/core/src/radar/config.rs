//! Radar waveform/array configuration and the spectral axes derived from it.
//!
//! The sensor model is a TDM-MIMO FMCW radar: `tx_count_used` transmitters
//! fire round-robin, one chirp each, and all `rx_count` receivers sample every
//! chirp. De-multiplexing yields `tx · rx` virtual channels that form a
//! uniform linear array with `virtual_element_spacing` (in wavelengths)
//! between elements. Because a given transmitter only fires every
//! `tx_count_used` chirps, the effective pulse-repetition interval for
//! Doppler processing is `tx_count_used · chirp_duration`.
//!
//! Sampling is complex baseband after dechirping, so a scatterer at range `r`
//! appears as a beat tone `f_b = 2 r B / (c T_c)` and the usable range axis
//! spans `[0, samples · c / (2B))`. Radial motion advances the carrier phase
//! chirp to chirp, giving the Doppler tone `f_d = 2 v / λ`; the two-sided
//! unambiguous span is `±λ / (4 · PRI)`. Azimuth comes from the spatial
//! frequency across the virtual array: a plane wave from angle `θ` leaves a
//! per-element phase slope of `d · sin θ` cycles, so FFT bin frequencies map
//! to angles via `sin θ = u / d`, valid while `|u/d| ≤ 1`, which with
//! `d = 0.532` wavelengths keeps roughly a 140° sector unambiguous.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

/// Tapering window applied along one transform dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    Hann,
    Hamming,
    Blackman,
}

impl WindowKind {
    /// Symmetric window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        use std::f64::consts::TAU;
        if n == 1 {
            return vec![1.0];
        }
        let denom = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let x = i as f64 / denom;
                match self {
                    WindowKind::Rectangular => 1.0,
                    WindowKind::Hann => 0.5 - 0.5 * (TAU * x).cos(),
                    WindowKind::Hamming => 0.54 - 0.46 * (TAU * x).cos(),
                    WindowKind::Blackman => {
                        0.42 - 0.5 * (TAU * x).cos() + 0.08 * (2.0 * TAU * x).cos()
                    }
                }
            })
            .collect()
    }
}

/// Waveform, array, and processing parameters for one radar sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarConfig {
    /// Carrier frequency in Hz.
    pub carrier_frequency_hz: f64,
    /// Swept bandwidth per chirp in Hz.
    pub bandwidth_hz: f64,
    /// Chirps per transmitter per frame (slow-time length).
    pub chirps_per_tx: usize,
    /// Transmitters used in the TDM cycle.
    pub tx_count_used: usize,
    /// Receivers sampled per chirp.
    pub rx_count: usize,
    /// Complex baseband samples per chirp (fast-time length).
    pub samples_per_chirp: usize,
    /// Chirp duration in seconds (one TDM slot).
    pub chirp_duration_s: f64,
    /// Virtual-element spacing in wavelengths.
    pub virtual_element_spacing: f64,
    /// Azimuth field of view (full angle, degrees) kept after the angle FFT.
    pub fov_azimuth_deg: f64,
    /// Zero-padding factor for the range FFT (1 = none).
    pub range_pad_factor: usize,
    /// Zero-padding factor for the Doppler FFT.
    pub doppler_pad_factor: usize,
    /// Zero-padding factor for the angle FFT.
    pub angle_pad_factor: usize,
    pub range_window: WindowKind,
    pub doppler_window: WindowKind,
    pub angle_window: WindowKind,
    /// Magnitude floor (and fill value) for logarithmic images, dB.
    pub db_floor: f64,
    /// Model the intra-cycle sampling skew between transmitters. Off by
    /// default: virtual channels are treated as sampled simultaneously.
    pub tdm_skew_modeled: bool,
}

impl Default for RadarConfig {
    fn default() -> Self {
        RadarConfig {
            carrier_frequency_hz: 77.0e9,
            bandwidth_hz: 1.0e9,
            chirps_per_tx: 128,
            tx_count_used: 3,
            rx_count: 16,
            samples_per_chirp: 512,
            chirp_duration_s: 82.7e-6,
            virtual_element_spacing: 0.532,
            fov_azimuth_deg: 140.0,
            range_pad_factor: 2,
            doppler_pad_factor: 2,
            angle_pad_factor: 2,
            range_window: WindowKind::Hann,
            doppler_window: WindowKind::Hann,
            angle_window: WindowKind::Hann,
            db_floor: -120.0,
            tdm_skew_modeled: false,
        }
    }
}

impl RadarConfig {
    // ─── Derived waveform quantities ───

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    pub fn virtual_channels(&self) -> usize {
        self.tx_count_used * self.rx_count
    }

    /// Fast-time sample rate in Hz.
    pub fn sample_rate_hz(&self) -> f64 {
        self.samples_per_chirp as f64 / self.chirp_duration_s
    }

    /// Chirp slope `B / T_c` in Hz/s.
    pub fn slope_hz_per_s(&self) -> f64 {
        self.bandwidth_hz / self.chirp_duration_s
    }

    /// Effective pulse-repetition interval of one virtual channel.
    pub fn tdm_pri_s(&self) -> f64 {
        self.tx_count_used as f64 * self.chirp_duration_s
    }

    /// Range resolution `c / 2B` in meters.
    pub fn range_resolution_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
    }

    /// Width of one (possibly zero-padded) range bin in meters.
    pub fn range_bin_m(&self) -> f64 {
        self.range_resolution_m() / self.range_pad_factor as f64
    }

    /// One-sided extent of the range axis in meters.
    pub fn range_extent_m(&self) -> f64 {
        self.samples_per_chirp as f64 * self.range_resolution_m()
    }

    /// Largest speed representable without Doppler aliasing, m/s.
    pub fn max_unambiguous_velocity_mps(&self) -> f64 {
        self.wavelength_m() / (4.0 * self.tdm_pri_s())
    }

    /// Width of one (possibly zero-padded) velocity bin in m/s.
    pub fn velocity_bin_mps(&self) -> f64 {
        self.wavelength_m() / (2.0 * self.tdm_pri_s() * self.doppler_fft_len() as f64)
    }

    /// Azimuth half-angle that the array spacing keeps unambiguous, degrees.
    pub fn unambiguous_half_angle_deg(&self) -> f64 {
        let s = 1.0 / (2.0 * self.virtual_element_spacing);
        if s >= 1.0 {
            90.0
        } else {
            s.asin().to_degrees()
        }
    }

    // ─── Transform lengths ───

    pub fn range_fft_len(&self) -> usize {
        self.samples_per_chirp * self.range_pad_factor
    }

    pub fn doppler_fft_len(&self) -> usize {
        self.chirps_per_tx * self.doppler_pad_factor
    }

    pub fn angle_fft_len(&self) -> usize {
        self.virtual_channels() * self.angle_pad_factor
    }

    // ─── Axes ───

    /// Range value of every range bin, meters, ascending from zero.
    pub fn range_axis(&self) -> Vec<f64> {
        let w = self.range_bin_m();
        (0..self.range_fft_len()).map(|k| k as f64 * w).collect()
    }

    /// Radial velocity of every (shifted) Doppler bin, m/s, ascending and
    /// centered so that bin `len/2` is exactly zero. Positive velocities are
    /// targets moving away from the radar.
    pub fn velocity_axis(&self) -> Vec<f64> {
        let n = self.doppler_fft_len();
        let w = self.velocity_bin_mps();
        (0..n).map(|j| (j as f64 - (n / 2) as f64) * w).collect()
    }

    /// Azimuth axis after cropping the angle FFT to the configured field of
    /// view.
    pub fn azimuth_axis(&self) -> AzimuthAxis {
        let n = self.angle_fft_len();
        let d = self.virtual_element_spacing;
        let sin_limit = (self.fov_azimuth_deg.to_radians() / 2.0).sin() + 1e-12;
        let mut first_bin = None;
        let mut angles = Vec::new();
        for j in 0..n {
            let u = (j as f64 - (n / 2) as f64) / n as f64;
            let s = u / d;
            if s.abs() <= sin_limit && s.abs() <= 1.0 {
                if first_bin.is_none() {
                    first_bin = Some(j);
                }
                angles.push(s.asin().to_degrees());
            }
        }
        AzimuthAxis {
            angles_deg: angles,
            first_bin: first_bin.unwrap_or(0),
            full_len: n,
        }
    }

    // ─── Validation ───

    pub fn validate(&self) -> Result<()> {
        fn positive(v: f64, name: &str) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        }
        positive(self.carrier_frequency_hz, "carrier_frequency_hz")?;
        positive(self.bandwidth_hz, "bandwidth_hz")?;
        positive(self.chirp_duration_s, "chirp_duration_s")?;
        positive(self.virtual_element_spacing, "virtual_element_spacing")?;
        positive(self.fov_azimuth_deg, "fov_azimuth_deg")?;
        for (v, name) in [
            (self.chirps_per_tx, "chirps_per_tx"),
            (self.tx_count_used, "tx_count_used"),
            (self.rx_count, "rx_count"),
            (self.samples_per_chirp, "samples_per_chirp"),
            (self.range_pad_factor, "range_pad_factor"),
            (self.doppler_pad_factor, "doppler_pad_factor"),
            (self.angle_pad_factor, "angle_pad_factor"),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        let half_fov = self.fov_azimuth_deg / 2.0;
        let unamb = self.unambiguous_half_angle_deg();
        if unamb + 1e-9 < half_fov {
            return Err(Error::Config(format!(
                "field of view ±{half_fov}° exceeds the unambiguous sector \
                 ±{unamb:.2}° of element spacing {}",
                self.virtual_element_spacing
            )));
        }
        if self.azimuth_axis().angles_deg.is_empty() {
            return Err(Error::Config(format!(
                "field of view {}° keeps no azimuth bins at angle FFT length {}",
                self.fov_azimuth_deg,
                self.angle_fft_len()
            )));
        }
        if !self.db_floor.is_finite() {
            return Err(Error::Config("db_floor must be finite".into()));
        }
        for (window, len, name) in [
            (self.range_window, self.samples_per_chirp, "range"),
            (self.doppler_window, self.chirps_per_tx, "doppler"),
            (self.angle_window, self.virtual_channels(), "angle"),
        ] {
            // A symmetric taper over too few points (e.g. Hann over 2) is
            // identically zero and would silently null the data.
            if window.coefficients(len).iter().sum::<f64>() <= 0.0 {
                return Err(Error::Config(format!(
                    "the {name} window ({window:?}) vanishes over {len} points; \
                     use more points or a rectangular window"
                )));
            }
        }
        Ok(())
    }
}

/// Azimuth axis of the angle FFT after field-of-view cropping.
///
/// `angles_deg` holds one entry per kept bin, strictly ascending; the kept
/// bins are the contiguous block `[first_bin, first_bin + angles_deg.len())`
/// of the fft-shifted angle spectrum of length `full_len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AzimuthAxis {
    pub angles_deg: Vec<f64>,
    pub first_bin: usize,
    pub full_len: usize,
}

impl AzimuthAxis {
    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    /// Reconstructs an axis description from bin angles alone (used when
    /// reading serialized cubes, where crop offsets are not stored).
    pub fn from_angles(angles_deg: Vec<f64>) -> Self {
        AzimuthAxis {
            first_bin: 0,
            full_len: angles_deg.len(),
            angles_deg,
        }
    }
}
