//! Binary file envelopes for the radar products.
//!
//! All four formats share one little-endian layout:
//!
//! ```text
//! magic (4 ASCII bytes) | dims (3 x u32) | timestamp (f64) | pose (6 x f64)
//!   | axis vectors (f64 each, per format) | payload (f32)
//! ```
//!
//! | magic  | payload              | dims                      | axis vectors            |
//! |--------|----------------------|---------------------------|-------------------------|
//! | `RDC1` | complex (re,im) f32  | channel, chirp, sample    | none                    |
//! | `RDM1` | complex (re,im) f32  | channel, range, Doppler   | range m, velocity m/s   |
//! | `RDA1` | complex (re,im) f32  | range, Doppler, azimuth   | range, velocity, az deg |
//! | `RAI1` | real f32             | rows, cols, 1             | row axis, col axis      |
//!
//! Payloads are stored row-major in the dimension order above. `RAI1` is a
//! generic real raster: range–azimuth dB images use (range m, azimuth deg)
//! axes, world rasters use (y centers, x centers), and range–Doppler crops
//! use (velocity m/s, range m). Raw `RDC1` captures carry no waveform
//! parameters; readers pair them with the capture's [`RadarConfig`]. The dB
//! floor of a spectrum file is likewise not stored — readers default it to
//! −120 dB.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::pose::RigPose;
use crate::radar::config::{AzimuthAxis, RadarConfig};
use crate::radar::cube::{RaImage, RawAdcCube, RdMapStack, RdaCube, WorldRaster};

pub const MAGIC_RAW_CUBE: &[u8; 4] = b"RDC1";
pub const MAGIC_RD_STACK: &[u8; 4] = b"RDM1";
pub const MAGIC_RDA_CUBE: &[u8; 4] = b"RDA1";
pub const MAGIC_REAL_RASTER: &[u8; 4] = b"RAI1";

/// Hard cap on elements in a payload, to turn corrupt dimension fields into
/// format errors instead of allocation failures.
const MAX_ELEMENTS: u64 = 1 << 31;

/// A 2-D real-valued raster with physical axes, as stored in `RAI1` files.
#[derive(Debug, Clone, PartialEq)]
pub struct RealRaster {
    /// Values indexed `[row][col]`.
    pub data: Array2<f64>,
    pub row_axis: Vec<f64>,
    pub col_axis: Vec<f64>,
    pub timestamp: f64,
    pub pose: RigPose,
}

impl RealRaster {
    pub fn from_ra_image(img: &RaImage) -> Self {
        RealRaster {
            data: img.db.clone(),
            row_axis: img.range_axis_m.clone(),
            col_axis: img.azimuth_axis_deg.clone(),
            timestamp: img.timestamp,
            pose: img.pose,
        }
    }

    pub fn from_world_raster(raster: &WorldRaster) -> Self {
        let ny = raster.grid.ny;
        let nx = raster.grid.nx;
        RealRaster {
            data: raster.db.clone(),
            row_axis: (0..ny).map(|iy| raster.grid.cell_center(0, iy).1).collect(),
            col_axis: (0..nx).map(|ix| raster.grid.cell_center(ix, 0).0).collect(),
            timestamp: raster.timestamp,
            pose: raster.pose,
        }
    }

    /// Reconstructs a world raster from a `RAI1` file whose axes are cell
    /// centers of a uniform grid.
    pub fn to_world_raster(&self, fill_db: f64) -> Result<WorldRaster> {
        let step = |axis: &[f64], name: &str| -> Result<f64> {
            if axis.len() < 2 {
                return Err(Error::Geometry(format!(
                    "cannot infer grid spacing from a {name} axis of {} entries",
                    axis.len()
                )));
            }
            Ok(axis[1] - axis[0])
        };
        let dy = step(&self.row_axis, "row")?;
        let dx = step(&self.col_axis, "column")?;
        if (dy - dx).abs() > 1e-9 * dx.abs().max(1.0) {
            return Err(Error::Geometry(format!(
                "world raster cells must be square, got dx = {dx}, dy = {dy}"
            )));
        }
        let grid = GridSpec {
            origin_x: self.col_axis[0] - 0.5 * dx,
            origin_y: self.row_axis[0] - 0.5 * dy,
            cell_size_m: dx,
            nx: self.col_axis.len(),
            ny: self.row_axis.len(),
        };
        grid.validate()?;
        Ok(WorldRaster {
            db: self.data.clone(),
            grid,
            fill_db,
            timestamp: self.timestamp,
            pose: self.pose,
        })
    }
}

// ---------------------------------------------------------------------------
// Envelope primitives
// ---------------------------------------------------------------------------

struct EnvelopeHeader {
    dims: [usize; 3],
    timestamp: f64,
    pose: RigPose,
    axes: Vec<Vec<f64>>,
}

fn magic_name(magic: &[u8; 4]) -> String {
    String::from_utf8_lossy(magic).into_owned()
}

/// Axis vectors per magic: which of the three dims carry an axis.
fn axis_dims(magic: &[u8; 4]) -> &'static [usize] {
    match magic {
        m if m == MAGIC_RAW_CUBE => &[],
        m if m == MAGIC_RD_STACK => &[1, 2],
        m if m == MAGIC_RDA_CUBE => &[0, 1, 2],
        m if m == MAGIC_REAL_RASTER => &[0, 1],
        _ => unreachable!("unknown magic has no axis table"),
    }
}

fn is_known_magic(magic: &[u8; 4]) -> bool {
    [MAGIC_RAW_CUBE, MAGIC_RD_STACK, MAGIC_RDA_CUBE, MAGIC_REAL_RASTER]
        .iter()
        .any(|m| *m == magic)
}

fn write_envelope(
    path: &Path,
    magic: &[u8; 4],
    dims: [usize; 3],
    timestamp: f64,
    pose: &RigPose,
    axes: &[&[f64]],
    payload: impl Iterator<Item = f32>,
) -> Result<()> {
    debug_assert_eq!(axes.len(), axis_dims(magic).len());
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    w.write_all(magic).map_err(io_err)?;
    for d in dims {
        let d = u32::try_from(d).map_err(|_| {
            Error::format(path, format!("dimension {d} exceeds the u32 envelope field"))
        })?;
        w.write_all(&d.to_le_bytes()).map_err(io_err)?;
    }
    w.write_all(&timestamp.to_le_bytes()).map_err(io_err)?;
    for v in pose.to_array() {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    for axis in axes {
        for v in *axis {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    for v in payload {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::format(path, "file ends before the envelope is complete")
        } else {
            Error::io(path, e)
        }
    })
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, path)?;
    Ok(f64::from_le_bytes(b))
}

fn read_envelope(
    path: &Path,
    expected_magic: &[u8; 4],
) -> Result<(EnvelopeHeader, Vec<f32>)> {
    let file = File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, path)?;
    if &magic != expected_magic {
        let msg = if is_known_magic(&magic) {
            format!(
                "file holds {} data, expected {}",
                magic_name(&magic),
                magic_name(expected_magic)
            )
        } else {
            format!(
                "unrecognized magic {:?}, expected {}",
                magic,
                magic_name(expected_magic)
            )
        };
        return Err(Error::format(path, msg));
    }

    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut b = [0u8; 4];
        read_exact(&mut r, &mut b, path)?;
        *d = u32::from_le_bytes(b) as usize;
    }
    let elements = dims.iter().map(|&d| d as u64).product::<u64>();
    if elements == 0 || elements > MAX_ELEMENTS {
        return Err(Error::format(
            path,
            format!("implausible dimensions {dims:?} in envelope"),
        ));
    }

    let timestamp = read_f64(&mut r, path)?;
    let mut pose_arr = [0.0f64; 6];
    for v in &mut pose_arr {
        *v = read_f64(&mut r, path)?;
    }
    let pose = RigPose::from_array(pose_arr, timestamp);

    let mut axes = Vec::new();
    for &dim_idx in axis_dims(expected_magic) {
        let n = dims[dim_idx];
        let mut axis = Vec::with_capacity(n);
        for _ in 0..n {
            axis.push(read_f64(&mut r, path)?);
        }
        axes.push(axis);
    }

    let complex = expected_magic != MAGIC_REAL_RASTER;
    let scalar_count = elements as usize * if complex { 2 } else { 1 };
    let mut bytes = vec![0u8; scalar_count * 4];
    read_exact(&mut r, &mut bytes, path)?;
    let payload: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();

    let mut probe = [0u8; 1];
    match r.read(&mut probe) {
        Ok(0) => {}
        Ok(_) => {
            return Err(Error::format(
                path,
                "trailing bytes after the declared payload",
            ))
        }
        Err(e) => return Err(Error::io(path, e)),
    }

    Ok((
        EnvelopeHeader {
            dims,
            timestamp,
            pose,
            axes,
        },
        payload,
    ))
}

fn complex_payload<'a>(
    values: impl Iterator<Item = &'a Complex64> + 'a,
) -> impl Iterator<Item = f32> + 'a {
    values.flat_map(|c| [c.re as f32, c.im as f32])
}

fn to_complex_array3(
    payload: &[f32],
    dims: [usize; 3],
    path: &Path,
) -> Result<Array3<Complex64>> {
    let values: Vec<Complex64> = payload
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0] as f64, p[1] as f64))
        .collect();
    Array3::from_shape_vec((dims[0], dims[1], dims[2]), values)
        .map_err(|e| Error::format(path, format!("payload does not fill {dims:?}: {e}")))
}

// ---------------------------------------------------------------------------
// Raw ADC cubes (RDC1)
// ---------------------------------------------------------------------------

pub fn write_raw_cube(path: impl AsRef<Path>, cube: &RawAdcCube) -> Result<()> {
    let path = path.as_ref();
    let (nc, nm, ns) = cube.data.dim();
    write_envelope(
        path,
        MAGIC_RAW_CUBE,
        [nc, nm, ns],
        cube.timestamp,
        &cube.pose,
        &[],
        complex_payload(cube.data.iter()),
    )
}

/// Reads a raw capture and pairs it with its waveform configuration, which
/// the file itself does not carry.
pub fn read_raw_cube(path: impl AsRef<Path>, config: &RadarConfig) -> Result<RawAdcCube> {
    let path = path.as_ref();
    let (header, payload) = read_envelope(path, MAGIC_RAW_CUBE)?;
    let data = to_complex_array3(&payload, header.dims, path)?;
    RawAdcCube::new(data, config.clone(), header.timestamp, header.pose)
}

// ---------------------------------------------------------------------------
// Range–Doppler stacks (RDM1)
// ---------------------------------------------------------------------------

pub fn write_rd_stack(path: impl AsRef<Path>, stack: &RdMapStack) -> Result<()> {
    let path = path.as_ref();
    let (nc, nr, nd) = stack.data.dim();
    write_envelope(
        path,
        MAGIC_RD_STACK,
        [nc, nr, nd],
        stack.timestamp,
        &stack.pose,
        &[&stack.range_axis_m, &stack.velocity_axis_mps],
        complex_payload(stack.data.iter()),
    )
}

pub fn read_rd_stack(path: impl AsRef<Path>, config: &RadarConfig) -> Result<RdMapStack> {
    let path = path.as_ref();
    let (mut header, payload) = read_envelope(path, MAGIC_RD_STACK)?;
    if header.dims[0] != config.virtual_channels() {
        return Err(Error::Shape {
            context: "range-Doppler stack channels",
            expected: format!("{} virtual channels", config.virtual_channels()),
            actual: format!("{}", header.dims[0]),
        });
    }
    let data = to_complex_array3(&payload, header.dims, path)?;
    let velocity_axis_mps = header.axes.pop().expect("two axes were read");
    let range_axis_m = header.axes.pop().expect("two axes were read");
    Ok(RdMapStack {
        data,
        range_axis_m,
        velocity_axis_mps,
        config: config.clone(),
        timestamp: header.timestamp,
        pose: header.pose,
    })
}

// ---------------------------------------------------------------------------
// Range–Doppler–azimuth cubes (RDA1)
// ---------------------------------------------------------------------------

pub fn write_rda_cube(path: impl AsRef<Path>, cube: &RdaCube) -> Result<()> {
    let path = path.as_ref();
    let (nr, nd, na) = cube.data.dim();
    write_envelope(
        path,
        MAGIC_RDA_CUBE,
        [nr, nd, na],
        cube.timestamp,
        &cube.pose,
        &[
            &cube.range_axis_m,
            &cube.velocity_axis_mps,
            &cube.azimuth_axis.angles_deg,
        ],
        complex_payload(cube.data.iter()),
    )
}

pub fn read_rda_cube(path: impl AsRef<Path>) -> Result<RdaCube> {
    let path = path.as_ref();
    let (mut header, payload) = read_envelope(path, MAGIC_RDA_CUBE)?;
    let data = to_complex_array3(&payload, header.dims, path)?;
    let azimuth = header.axes.pop().expect("three axes were read");
    let velocity_axis_mps = header.axes.pop().expect("three axes were read");
    let range_axis_m = header.axes.pop().expect("three axes were read");
    Ok(RdaCube {
        data,
        range_axis_m,
        velocity_axis_mps,
        azimuth_axis: AzimuthAxis::from_angles(azimuth),
        db_floor: -120.0,
        timestamp: header.timestamp,
        pose: header.pose,
    })
}

// ---------------------------------------------------------------------------
// Real rasters (RAI1)
// ---------------------------------------------------------------------------

pub fn write_real_raster(path: impl AsRef<Path>, raster: &RealRaster) -> Result<()> {
    let path = path.as_ref();
    let (rows, cols) = raster.data.dim();
    write_envelope(
        path,
        MAGIC_REAL_RASTER,
        [rows, cols, 1],
        raster.timestamp,
        &raster.pose,
        &[&raster.row_axis, &raster.col_axis],
        raster.data.iter().map(|&v| v as f32),
    )
}

pub fn read_real_raster(path: impl AsRef<Path>) -> Result<RealRaster> {
    let path = path.as_ref();
    let (mut header, payload) = read_envelope(path, MAGIC_REAL_RASTER)?;
    if header.dims[2] != 1 {
        return Err(Error::format(
            path,
            format!("real rasters are 2-D, third dimension is {}", header.dims[2]),
        ));
    }
    let values: Vec<f64> = payload.iter().map(|&v| v as f64).collect();
    let data = Array2::from_shape_vec((header.dims[0], header.dims[1]), values)
        .map_err(|e| Error::format(path, format!("payload does not fill {:?}: {e}", header.dims)))?;
    let col_axis = header.axes.pop().expect("two axes were read");
    let row_axis = header.axes.pop().expect("two axes were read");
    Ok(RealRaster {
        data,
        row_axis,
        col_axis,
        timestamp: header.timestamp,
        pose: header.pose,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;

    fn small_config() -> RadarConfig {
        RadarConfig {
            tx_count_used: 1,
            rx_count: 4,
            chirps_per_tx: 8,
            samples_per_chirp: 16,
            range_pad_factor: 1,
            doppler_pad_factor: 1,
            angle_pad_factor: 1,
            ..RadarConfig::default()
        }
    }

    /// f32-representable complex values so roundtrips compare exactly.
    fn random_f32_complex(rng: &mut impl Rng) -> Complex64 {
        Complex64::new(
            rng.gen_range(-1.0f32..1.0) as f64,
            rng.gen_range(-1.0f32..1.0) as f64,
        )
    }

    #[test]
    fn raw_cube_roundtrip_preserves_payload_pose_and_timestamp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.rdc");
        let cfg = small_config();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let data = Array3::from_shape_fn((4, 8, 16), |_| random_f32_complex(&mut rng));
        let pose = RigPose::at(1.0, -2.0, 0.5).with_orientation(33.0, 0.0, 0.0);
        let cube = RawAdcCube::new(data, cfg.clone(), 12.375, pose).unwrap();

        write_raw_cube(&path, &cube).unwrap();
        let back = read_raw_cube(&path, &cfg).unwrap();
        assert_eq!(back.data, cube.data);
        assert_eq!(back.timestamp, cube.timestamp);
        assert_eq!(back.pose.x, 1.0);
        assert_eq!(back.pose.yaw_deg, 33.0);
    }

    #[test]
    fn raw_cube_read_rejects_mismatched_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.rdc");
        let cfg = small_config();
        let data = Array3::from_elem((4, 8, 16), Complex64::new(0.0, 0.0));
        let cube = RawAdcCube::new(data, cfg.clone(), 0.0, RigPose::default()).unwrap();
        write_raw_cube(&path, &cube).unwrap();

        let other = RadarConfig {
            rx_count: 8,
            ..small_config()
        };
        assert!(matches!(
            read_raw_cube(&path, &other),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn rd_stack_roundtrip_preserves_axes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.rdm");
        let cfg = small_config();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let stack = RdMapStack {
            data: Array3::from_shape_fn((4, 16, 8), |_| random_f32_complex(&mut rng)),
            range_axis_m: (0..16).map(|k| k as f64 * 0.15).collect(),
            velocity_axis_mps: (0..8).map(|j| (j as f64 - 4.0) * 0.5).collect(),
            config: cfg.clone(),
            timestamp: 3.5,
            pose: RigPose::default(),
        };
        write_rd_stack(&path, &stack).unwrap();
        let back = read_rd_stack(&path, &cfg).unwrap();
        assert_eq!(back.data, stack.data);
        assert_eq!(back.range_axis_m, stack.range_axis_m);
        assert_eq!(back.velocity_axis_mps, stack.velocity_axis_mps);
    }

    #[test]
    fn rda_cube_roundtrip_preserves_azimuth_axis() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.rda");
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let cube = RdaCube {
            data: Array3::from_shape_fn((16, 8, 5), |_| random_f32_complex(&mut rng)),
            range_axis_m: (0..16).map(|k| k as f64 * 0.15).collect(),
            velocity_axis_mps: (0..8).map(|j| (j as f64 - 4.0) * 0.5).collect(),
            azimuth_axis: AzimuthAxis::from_angles(vec![-40.0, -20.0, 0.0, 20.0, 40.0]),
            db_floor: -120.0,
            timestamp: 9.25,
            pose: RigPose::at(5.0, 6.0, 0.0),
        };
        write_rda_cube(&path, &cube).unwrap();
        let back = read_rda_cube(&path).unwrap();
        assert_eq!(back.data, cube.data);
        assert_eq!(back.azimuth_axis.angles_deg, cube.azimuth_axis.angles_deg);
        assert_eq!(back.db_floor, -120.0);
        assert_eq!(back.pose.x, 5.0);
    }

    #[test]
    fn real_raster_roundtrip_and_world_raster_reconstruction() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("image.rai");
        let grid = GridSpec {
            origin_x: -8.0,
            origin_y: -4.0,
            cell_size_m: 0.5,
            nx: 32,
            ny: 16,
        };
        let raster = WorldRaster {
            db: Array2::from_shape_fn((16, 32), |(iy, ix)| (iy * 32 + ix) as f64 * 0.25 - 60.0),
            grid,
            fill_db: -120.0,
            timestamp: 4.75,
            pose: RigPose::default(),
        };
        write_real_raster(&path, &RealRaster::from_world_raster(&raster)).unwrap();
        let back = read_real_raster(&path).unwrap();
        assert_eq!(back.data.dim(), (16, 32));
        assert_relative_eq!(back.row_axis[0], -3.75, epsilon = 1e-12);
        assert_relative_eq!(back.col_axis[0], -7.75, epsilon = 1e-12);

        let rebuilt = back.to_world_raster(-120.0).unwrap();
        assert_relative_eq!(rebuilt.grid.origin_x, -8.0, epsilon = 1e-9);
        assert_relative_eq!(rebuilt.grid.origin_y, -4.0, epsilon = 1e-9);
        assert_eq!(rebuilt.grid.nx, 32);
        assert_eq!(rebuilt.db, raster.db);
    }

    #[test]
    fn wrong_magic_is_reported_with_both_names() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.rdm");
        let cfg = small_config();
        let stack = RdMapStack {
            data: Array3::from_elem((4, 16, 8), Complex64::new(0.0, 0.0)),
            range_axis_m: vec![0.0; 16],
            velocity_axis_mps: vec![0.0; 8],
            config: cfg,
            timestamp: 0.0,
            pose: RigPose::default(),
        };
        write_rd_stack(&path, &stack).unwrap();
        match read_rda_cube(&path) {
            Err(Error::Format { message, .. }) => {
                assert!(message.contains("RDM1") && message.contains("RDA1"), "{message}");
            }
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_and_oversized_files_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.rda");
        std::fs::write(&path, b"RDA1\x01\x00\x00").unwrap();
        assert!(matches!(read_rda_cube(&path), Err(Error::Format { .. })));

        // Valid file plus trailing garbage.
        let cube = RdaCube {
            data: Array3::from_elem((4, 4, 3), Complex64::new(0.0, 0.0)),
            range_axis_m: vec![0.0; 4],
            velocity_axis_mps: vec![0.0; 4],
            azimuth_axis: AzimuthAxis::from_angles(vec![-10.0, 0.0, 10.0]),
            db_floor: -120.0,
            timestamp: 0.0,
            pose: RigPose::default(),
        };
        write_rda_cube(&path, &cube).unwrap();
        let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(&[0u8; 3]).unwrap();
        drop(f);
        match read_rda_cube(&path) {
            Err(Error::Format { message, .. }) => assert!(message.contains("trailing"), "{message}"),
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_maps_to_missing_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("absent.rda");
        assert!(matches!(
            read_rda_cube(&path),
            Err(Error::MissingInput(_))
        ));
    }
}
