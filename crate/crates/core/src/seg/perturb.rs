//! Seeded perturbation of panoptic frames, emulating imperfect segmentation
//! output: dropped instances, mask translation jitter, and boundary
//! dilation/erosion. Stuff classes are never touched; vacated countable
//! pixels fall back to `Environment`.

use ndarray::Array2;
use rand::prelude::*;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{frame_rng, StreamKind};
use crate::seg::classes::ClassId;
use crate::seg::frame::PanopticFrame;
use crate::seg::masks::extract_instances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbParams {
    /// Probability of dropping each instance entirely.
    pub drop_rate: f64,
    /// Standard deviation of the Gaussian mask translation, pixels.
    pub shift_sigma_px: f64,
    /// Boundary growth in pixels: positive dilates, negative erodes,
    /// 0 leaves boundaries alone.
    pub dilation_px: i32,
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams {
            drop_rate: 0.0,
            shift_sigma_px: 0.0,
            dilation_px: 0,
        }
    }
}

impl PerturbParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_rate) {
            return Err(Error::Config(format!(
                "drop_rate must lie in [0, 1], got {}",
                self.drop_rate
            )));
        }
        if !self.shift_sigma_px.is_finite() || self.shift_sigma_px < 0.0 {
            return Err(Error::Config(format!(
                "shift_sigma_px must be finite and non-negative, got {}",
                self.shift_sigma_px
            )));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.drop_rate == 0.0 && self.shift_sigma_px == 0.0 && self.dilation_px == 0
    }
}

/// One morphology pass with a 3×3 square kernel.
fn morph(mask: &Array2<bool>, dilate: bool) -> Array2<bool> {
    let (rows, cols) = mask.dim();
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let mut any = false;
        let mut all = true;
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                let v = if nr < 0 || nc < 0 || nr >= rows as i64 || nc >= cols as i64 {
                    false
                } else {
                    mask[[nr as usize, nc as usize]]
                };
                any |= v;
                all &= v;
            }
        }
        if dilate {
            any
        } else {
            all
        }
    })
}

/// Applies the perturbation with a per-frame generator derived from
/// (seed, frame timestamp), so batch order and parallelism never change the
/// result. The per-instance randomness is drawn in ascending instance-id
/// order, unconditionally, keeping streams aligned across parameter sets.
pub fn perturb_segmentation(
    frame: &PanopticFrame,
    params: &PerturbParams,
    seed: u64,
) -> Result<PanopticFrame> {
    params.validate()?;
    if params.is_identity() {
        return Ok(frame.clone());
    }
    let mut rng = frame_rng(seed, frame.timestamp, StreamKind::LabelPerturbation);
    let shift_dist = Normal::new(0.0, params.shift_sigma_px.max(f64::MIN_POSITIVE))
        .expect("validated sigma is finite");
    let (rows, cols) = frame.dims();
    let instances = extract_instances(frame);

    // Stuff stays; every countable pixel is re-painted from the surviving
    // instances below.
    let mut class_map = frame.class_map.clone();
    let mut instance_map = Array2::<u16>::zeros((rows, cols));
    for r in 0..rows {
        for c in 0..cols {
            let class = ClassId::from_u8(class_map[[r, c]])
                .expect("validated frames hold known class values");
            if class.is_countable() {
                class_map[[r, c]] = ClassId::Environment.as_u8();
            }
        }
    }

    let mut scores = std::collections::BTreeMap::new();
    for inst in &instances {
        let dropped = rng.gen_bool(params.drop_rate.clamp(0.0, 1.0));
        let (dx, dy) = if params.shift_sigma_px > 0.0 {
            (
                rng.sample::<f64, _>(shift_dist).round() as i64,
                rng.sample::<f64, _>(shift_dist).round() as i64,
            )
        } else {
            (0, 0)
        };
        if dropped {
            continue;
        }

        let mut mask = Array2::from_elem((rows, cols), false);
        for (c, r) in inst.mask.pixels() {
            let (nc, nr) = (c as i64 + dx, r as i64 + dy);
            if nc >= 0 && nr >= 0 && nc < cols as i64 && nr < rows as i64 {
                mask[[nr as usize, nc as usize]] = true;
            }
        }
        for _ in 0..params.dilation_px.unsigned_abs() {
            mask = morph(&mask, params.dilation_px > 0);
        }
        let mut any = false;
        for r in 0..rows {
            for c in 0..cols {
                if mask[[r, c]] {
                    class_map[[r, c]] = inst.class.as_u8();
                    instance_map[[r, c]] = inst.id;
                    any = true;
                }
            }
        }
        if any {
            scores.insert(inst.id, inst.score);
        }
    }

    Ok(PanopticFrame {
        class_map,
        instance_map,
        scores,
        timestamp: frame.timestamp,
        camera_pose: frame.camera_pose,
    })
}
