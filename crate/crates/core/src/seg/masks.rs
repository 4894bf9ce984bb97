//! Per-instance binary masks (run-length encoded) and dataset statistics.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::seg::classes::ClassId;
use crate::seg::frame::PanopticFrame;

/// Row-major run-length-encoded binary mask over a full frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLengthMask {
    pub width: usize,
    pub height: usize,
    /// (start, length) runs over the row-major pixel index, sorted by start,
    /// non-adjacent and non-overlapping.
    pub runs: Vec<(u32, u32)>,
}

impl RunLengthMask {
    /// Encodes the pixels where `predicate` holds.
    pub fn from_predicate(
        width: usize,
        height: usize,
        mut predicate: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let mut runs = Vec::new();
        let mut start: Option<u32> = None;
        for row in 0..height {
            for col in 0..width {
                let idx = (row * width + col) as u32;
                if predicate(col, row) {
                    if start.is_none() {
                        start = Some(idx);
                    }
                } else if let Some(s) = start.take() {
                    runs.push((s, idx - s));
                }
            }
        }
        if let Some(s) = start {
            runs.push((s, (width * height) as u32 - s));
        }
        RunLengthMask {
            width,
            height,
            runs,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.runs.iter().map(|&(_, len)| len as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Iterates decoded pixels as (col, row), row-major.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let width = self.width;
        self.runs.iter().flat_map(move |&(start, len)| {
            (start..start + len).map(move |idx| ((idx as usize) % width, (idx as usize) / width))
        })
    }

    pub fn contains(&self, col: usize, row: usize) -> bool {
        if col >= self.width || row >= self.height {
            return false;
        }
        let idx = (row * self.width + col) as u32;
        match self.runs.binary_search_by(|&(start, _)| start.cmp(&idx)) {
            Ok(_) => true,
            Err(0) => false,
            Err(i) => {
                let (start, len) = self.runs[i - 1];
                idx < start + len
            }
        }
    }

    /// Tight inclusive pixel bounds as (col_min, row_min, col_max, row_max).
    pub fn bounding_rect(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bounds: Option<(usize, usize, usize, usize)> = None;
        for (col, row) in self.pixels() {
            bounds = Some(match bounds {
                None => (col, row, col, row),
                Some((c0, r0, c1, r1)) => (c0.min(col), r0.min(row), c1.max(col), r1.max(row)),
            });
        }
        bounds
    }
}

/// One extracted object instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMask {
    pub id: u16,
    pub class: ClassId,
    pub mask: RunLengthMask,
    /// Tight inclusive pixel bounds (col_min, row_min, col_max, row_max).
    pub bbox: (usize, usize, usize, usize),
    pub score: f64,
}

/// Extracts one mask per instance id. Frames without any instance ids fall
/// back to 8-connected components per countable class, with synthetic ids
/// assigned in (class, scan-order) sequence starting at 1.
pub fn extract_instances(frame: &PanopticFrame) -> Vec<InstanceMask> {
    let (rows, cols) = frame.dims();
    if frame.instance_map.iter().any(|&v| v != 0) {
        let mut by_id: BTreeMap<u16, ClassId> = BTreeMap::new();
        for row in 0..rows {
            for col in 0..cols {
                let id = frame.instance_map[[row, col]];
                if id != 0 {
                    by_id.entry(id).or_insert_with(|| {
                        ClassId::from_u8(frame.class_map[[row, col]])
                            .expect("validated frames hold known class values")
                    });
                }
            }
        }
        by_id
            .into_iter()
            .filter_map(|(id, class)| {
                let mask = RunLengthMask::from_predicate(cols, rows, |c, r| {
                    frame.instance_map[[r, c]] == id
                });
                let bbox = mask.bounding_rect()?;
                Some(InstanceMask {
                    id,
                    class,
                    mask,
                    bbox,
                    score: frame.score(id),
                })
            })
            .collect()
    } else {
        connected_component_instances(frame)
    }
}

/// 8-connected component labeling per countable class.
fn connected_component_instances(frame: &PanopticFrame) -> Vec<InstanceMask> {
    let (rows, cols) = frame.dims();
    let mut assigned: Array2<u16> = Array2::zeros((rows, cols));
    let mut out = Vec::new();
    let mut next_id: u16 = 1;
    for class in ClassId::COUNTABLE {
        let value = class.as_u8();
        for row in 0..rows {
            for col in 0..cols {
                if frame.class_map[[row, col]] != value || assigned[[row, col]] != 0 {
                    continue;
                }
                let id = next_id;
                next_id += 1;
                let mut stack = vec![(col, row)];
                assigned[[row, col]] = id;
                while let Some((c, r)) = stack.pop() {
                    for dr in -1i64..=1 {
                        for dc in -1i64..=1 {
                            if dr == 0 && dc == 0 {
                                continue;
                            }
                            let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                            if nc < 0 || nr < 0 || nc >= cols as i64 || nr >= rows as i64 {
                                continue;
                            }
                            let (nc, nr) = (nc as usize, nr as usize);
                            if frame.class_map[[nr, nc]] == value && assigned[[nr, nc]] == 0 {
                                assigned[[nr, nc]] = id;
                                stack.push((nc, nr));
                            }
                        }
                    }
                }
                let mask =
                    RunLengthMask::from_predicate(cols, rows, |c, r| assigned[[r, c]] == id);
                let bbox = mask
                    .bounding_rect()
                    .expect("component masks contain at least the seed pixel");
                out.push(InstanceMask {
                    id,
                    class,
                    mask,
                    bbox,
                    score: 1.0,
                });
            }
        }
    }
    out
}

/// Instance counts per countable class across a batch of frames.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStatistics {
    pub per_class: BTreeMap<ClassId, usize>,
    pub total: usize,
}

impl ClassStatistics {
    pub fn count(&self, class: ClassId) -> usize {
        self.per_class.get(&class).copied().unwrap_or(0)
    }

    pub fn add(&mut self, other: &ClassStatistics) {
        for (class, n) in &other.per_class {
            *self.per_class.entry(*class).or_insert(0) += n;
        }
        self.total += other.total;
    }
}

/// Counts extracted instances per countable class, with the grand total.
pub fn class_statistics(frames: &[PanopticFrame]) -> ClassStatistics {
    let mut stats = ClassStatistics::default();
    for class in ClassId::COUNTABLE {
        stats.per_class.insert(class, 0);
    }
    for frame in frames {
        for instance in extract_instances(frame) {
            *stats.per_class.entry(instance.class).or_insert(0) += 1;
            stats.total += 1;
        }
    }
    stats
}
