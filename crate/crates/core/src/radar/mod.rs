//! FMCW radar signal chain: raw ADC cubes through range/Doppler/angle
//! spectra to detections and world-frame rasters.
//!
//! The stages compose in a fixed order:
//!
//! 1. [`processing::range_doppler_map`] — windowed, zero-padded 2-D FFT of
//!    each virtual channel (fast time → range, slow time → Doppler).
//! 2. [`processing::angle_fft`] — calibrated FFT across the virtual array
//!    per range–Doppler cell, cropped to the configured field of view.
//! 3. [`processing::ra_image`] — max-over-Doppler collapse to a dB
//!    range–azimuth image.
//! 4. [`cartesian::polar_to_cartesian`] — resampling onto a world-frame
//!    ground grid using the sensor pose.
//! 5. [`cfar::cfar_detect`] — cell-averaging CFAR with peak grouping and
//!    sub-bin interpolation, run on the range–Doppler–azimuth cube.
//!
//! [`config::RadarConfig`] fixes the waveform and array geometry and is the
//! single source for all derived axes.

pub mod axis;
pub mod cartesian;
pub mod cfar;
pub mod config;
pub mod cube;
pub mod processing;

pub use cartesian::polar_to_cartesian;
pub use cfar::{cfar_detect, CfarConfig, Target, TargetList};
pub use config::{AzimuthAxis, RadarConfig, WindowKind};
pub use cube::{RaImage, RawAdcCube, RdMapStack, RdaCube, WorldRaster};
pub use processing::{angle_fft, ra_image, range_doppler_map};
