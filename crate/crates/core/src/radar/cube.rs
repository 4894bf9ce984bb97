//! Sample containers produced along the processing chain.
//!
//! All spectra carry their axis vectors so that downstream consumers (and
//! files read back from disk) are self-describing: a bin index is never
//! interpreted without the axis that gives it physical meaning.

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pose::RigPose;
use crate::radar::config::{AzimuthAxis, RadarConfig};

/// Raw de-multiplexed ADC samples of one frame.
///
/// Layout: `data[channel][chirp][sample]` — virtual channels in array order,
/// chirps in slow time, complex baseband samples in fast time.
#[derive(Debug, Clone)]
pub struct RawAdcCube {
    pub data: Array3<Complex64>,
    pub config: RadarConfig,
    pub timestamp: f64,
    pub pose: RigPose,
}

impl RawAdcCube {
    pub fn new(
        data: Array3<Complex64>,
        config: RadarConfig,
        timestamp: f64,
        pose: RigPose,
    ) -> Result<Self> {
        let (ch, chirps, samples) = data.dim();
        let expect = (
            config.virtual_channels(),
            config.chirps_per_tx,
            config.samples_per_chirp,
        );
        if (ch, chirps, samples) != expect {
            return Err(Error::Shape {
                context: "raw ADC cube",
                expected: format!("{}x{}x{} (channels x chirps x samples)", expect.0, expect.1, expect.2),
                actual: format!("{ch}x{chirps}x{samples}"),
            });
        }
        Ok(RawAdcCube {
            data,
            config,
            timestamp,
            pose,
        })
    }

    /// Total signal energy, `Σ |x|²`.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Per-channel range–Doppler spectra of one frame.
///
/// Layout: `data[channel][range_bin][doppler_bin]`, Doppler fft-shifted so
/// the velocity axis ascends through zero.
#[derive(Debug, Clone)]
pub struct RdMapStack {
    pub data: Array3<Complex64>,
    pub range_axis_m: Vec<f64>,
    pub velocity_axis_mps: Vec<f64>,
    pub config: RadarConfig,
    pub timestamp: f64,
    pub pose: RigPose,
}

impl RdMapStack {
    /// Total energy of one channel's map, `Σ |x|²`.
    pub fn channel_energy(&self, channel: usize) -> f64 {
        self.data
            .index_axis(ndarray::Axis(0), channel)
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }
}

/// Range–Doppler–azimuth spectrum of one frame, cropped to the configured
/// field of view in azimuth.
///
/// Layout: `data[range_bin][doppler_bin][azimuth_bin]`.
#[derive(Debug, Clone)]
pub struct RdaCube {
    pub data: Array3<Complex64>,
    pub range_axis_m: Vec<f64>,
    pub velocity_axis_mps: Vec<f64>,
    pub azimuth_axis: AzimuthAxis,
    /// Magnitude floor for logarithmic views derived from this cube, dB.
    pub db_floor: f64,
    pub timestamp: f64,
    pub pose: RigPose,
}

impl RdaCube {
    pub fn dims(&self) -> (usize, usize, usize) {
        self.data.dim()
    }
}

/// Range–azimuth magnitude image in dB (Doppler collapsed by maximum).
#[derive(Debug, Clone)]
pub struct RaImage {
    pub db: Array2<f64>,
    pub range_axis_m: Vec<f64>,
    pub azimuth_axis_deg: Vec<f64>,
    pub floor_db: f64,
    pub timestamp: f64,
    pub pose: RigPose,
}

/// Radar magnitude resampled onto an axis-aligned world grid, dB.
///
/// Cells outside the sensor's range/azimuth coverage hold `fill_db`.
#[derive(Debug, Clone)]
pub struct WorldRaster {
    /// Indexed `[iy][ix]` over the grid.
    pub db: Array2<f64>,
    pub grid: crate::grid::GridSpec,
    pub fill_db: f64,
    pub timestamp: f64,
    pub pose: RigPose,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn raw_cube_rejects_wrong_shape() {
        let config = RadarConfig {
            tx_count_used: 1,
            rx_count: 4,
            chirps_per_tx: 8,
            samples_per_chirp: 16,
            ..RadarConfig::default()
        };
        let bad = Array3::zeros((4, 8, 15));
        let err = RawAdcCube::new(bad, config.clone(), 0.0, RigPose::default());
        assert!(matches!(err, Err(Error::Shape { .. })));
        let good = Array3::zeros((4, 8, 16));
        assert!(RawAdcCube::new(good, config, 0.0, RigPose::default()).is_ok());
    }
}
