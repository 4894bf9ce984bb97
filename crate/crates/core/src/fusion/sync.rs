//! Temporal pairing of radar and camera frames by their clock stamps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One radar frame matched to its temporally nearest camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncPair {
    pub radar_index: usize,
    pub radar_timestamp: f64,
    pub camera_index: usize,
    pub camera_timestamp: f64,
    /// `camera_timestamp - radar_timestamp`; `|skew_s|` never exceeds the
    /// matcher's `max_skew_s`.
    pub skew_s: f64,
}

/// Pairing result: matched pairs plus the radar frames left unpaired.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SyncReport {
    pub pairs: Vec<SyncPair>,
    /// Indices of radar frames with no camera frame within `max_skew_s`.
    pub unpaired_radar: Vec<usize>,
}

fn check_sorted_finite(ts: &[f64], name: &str) -> Result<()> {
    for (i, t) in ts.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::Config(format!(
                "{name} timestamp {i} is not finite: {t}"
            )));
        }
        if i > 0 && ts[i - 1] > *t {
            return Err(Error::Config(format!(
                "{name} timestamps must be sorted ascending: entry {i} ({t}) \
                 precedes entry {} ({})",
                i - 1,
                ts[i - 1]
            )));
        }
    }
    Ok(())
}

/// Pairs every radar frame with its nearest camera frame within
/// `max_skew_s`. Deterministic: when two camera frames are equally near,
/// the earlier one wins. Radar frames without a near-enough camera frame
/// are reported, not dropped silently and not an error.
pub fn match_frames(radar_ts: &[f64], camera_ts: &[f64], max_skew_s: f64) -> Result<SyncReport> {
    if !(max_skew_s >= 0.0 && max_skew_s.is_finite()) {
        return Err(Error::Config(format!(
            "max_skew_s must be non-negative and finite, got {max_skew_s}"
        )));
    }
    check_sorted_finite(radar_ts, "radar")?;
    check_sorted_finite(camera_ts, "camera")?;

    let mut report = SyncReport::default();
    for (ri, &rt) in radar_ts.iter().enumerate() {
        // First camera stamp ≥ rt and its predecessor are the only
        // candidates; on equal distance the predecessor (earlier) wins.
        let after = camera_ts.partition_point(|&c| c < rt);
        let best = [after.checked_sub(1), (after < camera_ts.len()).then_some(after)]
            .into_iter()
            .flatten()
            .min_by(|&a, &b| {
                let (da, db) = ((camera_ts[a] - rt).abs(), (camera_ts[b] - rt).abs());
                da.partial_cmp(&db)
                    .expect("finite stamps")
                    .then(a.cmp(&b))
            });
        match best {
            Some(ci) if (camera_ts[ci] - rt).abs() <= max_skew_s => {
                report.pairs.push(SyncPair {
                    radar_index: ri,
                    radar_timestamp: rt,
                    camera_index: ci,
                    camera_timestamp: camera_ts[ci],
                    skew_s: camera_ts[ci] - rt,
                });
            }
            _ => report.unpaired_radar.push(ri),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;

    /// Independent quadratic-scan reference with the same tie rule.
    fn brute_force(radar_ts: &[f64], camera_ts: &[f64], max_skew: f64) -> SyncReport {
        let mut report = SyncReport::default();
        for (ri, &rt) in radar_ts.iter().enumerate() {
            let mut best: Option<(usize, f64)> = None;
            for (ci, &ct) in camera_ts.iter().enumerate() {
                let d = (ct - rt).abs();
                let better = match best {
                    None => true,
                    Some((_, bd)) => d < bd, // strict: earliest index kept on ties
                };
                if better {
                    best = Some((ci, d));
                }
            }
            match best {
                Some((ci, d)) if d <= max_skew => report.pairs.push(SyncPair {
                    radar_index: ri,
                    radar_timestamp: rt,
                    camera_index: ci,
                    camera_timestamp: camera_ts[ci],
                    skew_s: camera_ts[ci] - rt,
                }),
                _ => report.unpaired_radar.push(ri),
            }
        }
        report
    }

    #[test]
    fn identical_schedules_pair_one_to_one_with_zero_skew() {
        let ts: Vec<f64> = (0..50).map(|k| k as f64 * 0.25).collect();
        let report = match_frames(&ts, &ts, 0.0).unwrap();
        assert!(report.unpaired_radar.is_empty());
        assert_eq!(report.pairs.len(), 50);
        for (k, pair) in report.pairs.iter().enumerate() {
            assert_eq!((pair.radar_index, pair.camera_index), (k, k));
            assert_eq!(pair.skew_s, 0.0);
        }
    }

    #[test]
    fn slow_radar_against_fast_camera_pairs_everything_tightly() {
        // 248 radar frames over 122 s against a 10 Hz camera: the nearest
        // camera frame is never more than half a camera period away.
        let radar: Vec<f64> = (0..248).map(|k| k as f64 * 122.0 / 248.0).collect();
        let camera: Vec<f64> = (0..1220).map(|k| k as f64 * 0.1).collect();
        let report = match_frames(&radar, &camera, 0.05).unwrap();
        assert!(report.unpaired_radar.is_empty());
        assert_eq!(report.pairs.len(), 248);
        let max_skew = report
            .pairs
            .iter()
            .map(|p| p.skew_s.abs())
            .fold(0.0, f64::max);
        assert!(max_skew <= 0.05, "max skew {max_skew}");
        assert_eq!(report, brute_force(&radar, &camera, 0.05));
    }

    #[test]
    fn camera_gaps_leave_radar_frames_reported_unpaired() {
        let radar: Vec<f64> = (0..10).map(|k| k as f64 * 0.5).collect(); // 0..4.5
        // Camera silent between 1.0 and 3.0.
        let camera = vec![0.0, 0.5, 1.0, 3.0, 3.5, 4.0, 4.5];
        let report = match_frames(&radar, &camera, 0.1).unwrap();
        assert_eq!(report.unpaired_radar, vec![3, 4, 5]); // 1.5, 2.0, 2.5
        assert_eq!(report.pairs.len(), 7);
        assert_eq!(report, brute_force(&radar, &camera, 0.1));
    }

    #[test]
    fn equidistant_camera_frames_resolve_to_the_earlier_one() {
        let report = match_frames(&[1.0], &[0.5, 1.5], 1.0).unwrap();
        assert_eq!(report.pairs[0].camera_index, 0);
        assert_eq!(report.pairs[0].skew_s, -0.5);
    }

    #[test]
    fn random_schedules_match_the_quadratic_reference() {
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let n = rng.gen_range(0..30);
            let m = rng.gen_range(0..30);
            let mut radar: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..20.0)).collect();
            let mut camera: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..20.0)).collect();
            radar.sort_by(|a, b| a.partial_cmp(b).unwrap());
            camera.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let max_skew = rng.gen_range(0.0..2.0);
            let fast = match_frames(&radar, &camera, max_skew).unwrap();
            assert_eq!(fast, brute_force(&radar, &camera, max_skew));
            for p in &fast.pairs {
                assert!(p.skew_s.abs() <= max_skew);
            }
            assert_eq!(fast.pairs.len() + fast.unpaired_radar.len(), radar.len());
        }
    }

    #[test]
    fn invalid_inputs_are_configuration_errors() {
        assert!(match_frames(&[1.0, 0.5], &[0.0], 1.0).is_err());
        assert!(match_frames(&[0.0], &[f64::NAN], 1.0).is_err());
        assert!(match_frames(&[0.0], &[0.0], -1.0).is_err());
        assert!(match_frames(&[0.0], &[0.0], f64::INFINITY).is_err());
    }
}
