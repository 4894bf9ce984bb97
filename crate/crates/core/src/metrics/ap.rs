//! Interpolated average precision over an IoU-threshold sweep.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::matching::{match_detections, score_order, Detection, GroundTruth};
use crate::seg::ClassId;

/// Default IoU threshold sweep: 0.50 to 0.95 in steps of 0.05.
pub const COCO_THRESHOLDS: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

/// Number of evenly spaced recall grid points used for interpolation.
const RECALL_GRID_POINTS: usize = 101;

/// Threshold sweep the average-precision computation runs over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSpec {
    pub iou_thresholds: Vec<f64>,
}

impl Default for MatchSpec {
    fn default() -> Self {
        MatchSpec {
            iou_thresholds: COCO_THRESHOLDS.to_vec(),
        }
    }
}

impl MatchSpec {
    /// Single-threshold sweep, e.g. for plain AP at 0.5.
    pub fn single(iou_threshold: f64) -> Self {
        MatchSpec {
            iou_thresholds: vec![iou_threshold],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iou_thresholds.is_empty() {
            return Err(Error::Config(
                "the IoU threshold sweep must not be empty".into(),
            ));
        }
        for pair in self.iou_thresholds.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Config(format!(
                    "IoU thresholds must increase strictly, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for &k in &self.iou_thresholds {
            if !(k > 0.0 && k <= 1.0) {
                return Err(Error::Config(format!(
                    "IoU thresholds must lie in (0, 1], got {k}"
                )));
            }
        }
        Ok(())
    }
}

/// One precision/recall sample along the ranked detection sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    /// Score of the detection that produced this sample.
    pub score: f64,
}

/// Average precision at one IoU threshold, with the raw curve behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdAp {
    pub iou_threshold: f64,
    pub average_precision: f64,
    pub curve: Vec<PrPoint>,
}

/// Per-class result: one entry per swept threshold plus their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAp {
    pub per_threshold: Vec<ThresholdAp>,
    /// Mean over the threshold sweep.
    pub average_precision: f64,
}

/// Full average-precision evaluation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApResult {
    /// One entry per class that has at least one ground truth.
    pub per_class: BTreeMap<ClassId, ClassAp>,
    /// Mean over the evaluated classes; `None` when nothing was annotated.
    pub mean_ap: Option<f64>,
    /// Classes that appeared only in detections; excluded from the mean.
    pub skipped_classes: Vec<ClassId>,
}

/// 101-point interpolated average precision: the mean over an even recall
/// grid of the best precision achieved at or beyond each recall level.
fn interpolated_ap(curve: &[PrPoint]) -> f64 {
    if curve.is_empty() {
        return 0.0;
    }
    // Running maximum of precision from each point rightward. Recall is
    // non-decreasing along the ranked sweep, so the first point at or past a
    // grid recall carries the best precision available there.
    let mut envelope = vec![0.0f64; curve.len()];
    let mut best = 0.0f64;
    for (i, point) in curve.iter().enumerate().rev() {
        best = best.max(point.precision);
        envelope[i] = best;
    }
    let mut total = 0.0;
    for step in 0..RECALL_GRID_POINTS {
        let grid_recall = step as f64 / (RECALL_GRID_POINTS - 1) as f64;
        let precision = curve
            .iter()
            .position(|p| p.recall >= grid_recall)
            .map_or(0.0, |i| envelope[i]);
        total += precision;
    }
    total / RECALL_GRID_POINTS as f64
}

/// Ranked precision/recall sweep for one class at one threshold.
fn class_curve(
    ground_truths: &[GroundTruth],
    detections: &[Detection],
    iou_threshold: f64,
) -> Result<Vec<PrPoint>> {
    let report = match_detections(ground_truths, detections, iou_threshold)?;
    let matched: BTreeSet<usize> = report
        .matches
        .iter()
        .map(|pair| pair.detection_index)
        .collect();
    let total_gt = ground_truths.len();
    let mut curve = Vec::with_capacity(detections.len());
    let mut true_positives = 0usize;
    for (rank, det_index) in score_order(detections).into_iter().enumerate() {
        if matched.contains(&det_index) {
            true_positives += 1;
        }
        curve.push(PrPoint {
            recall: true_positives as f64 / total_gt as f64,
            precision: true_positives as f64 / (rank + 1) as f64,
            score: detections[det_index].score,
        });
    }
    Ok(curve)
}

/// Average precision per class and its mean, sweeping the IoU thresholds in
/// `spec`. Classes without any ground truth are skipped (their detections
/// would make every mean ill-defined); classes without any detections score
/// zero. Errors propagate from region comparison and spec validation.
pub fn average_precision(
    ground_truths: &[GroundTruth],
    detections: &[Detection],
    spec: &MatchSpec,
) -> Result<ApResult> {
    spec.validate()?;

    let annotated: BTreeSet<ClassId> = ground_truths.iter().map(|g| g.class).collect();
    let detected: BTreeSet<ClassId> = detections.iter().map(|d| d.class).collect();
    let skipped_classes: Vec<ClassId> = detected.difference(&annotated).copied().collect();

    let mut per_class = BTreeMap::new();
    for &class in &annotated {
        let class_gts: Vec<GroundTruth> = ground_truths
            .iter()
            .filter(|g| g.class == class)
            .cloned()
            .collect();
        let class_dets: Vec<Detection> = detections
            .iter()
            .filter(|d| d.class == class)
            .cloned()
            .collect();
        let mut per_threshold = Vec::with_capacity(spec.iou_thresholds.len());
        let mut sum = 0.0;
        for &iou_threshold in &spec.iou_thresholds {
            let curve = class_curve(&class_gts, &class_dets, iou_threshold)?;
            let average_precision = interpolated_ap(&curve);
            sum += average_precision;
            per_threshold.push(ThresholdAp {
                iou_threshold,
                average_precision,
                curve,
            });
        }
        per_class.insert(
            class,
            ClassAp {
                per_threshold,
                average_precision: sum / spec.iou_thresholds.len() as f64,
            },
        );
    }

    let mean_ap = if per_class.is_empty() {
        None
    } else {
        Some(
            per_class.values().map(|c| c.average_precision).sum::<f64>() / per_class.len() as f64,
        )
    };
    Ok(ApResult {
        per_class,
        mean_ap,
        skipped_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::iou::{Rect, Region};

    fn box_region(x0: f64, y0: f64, side: f64) -> Region {
        Region::Box(Rect::new(x0, x0 + side, y0, y0 + side).unwrap())
    }

    fn det(class: ClassId, region: Region, score: f64) -> Detection {
        Detection {
            class,
            region,
            score,
        }
    }

    fn gt(class: ClassId, region: Region) -> GroundTruth {
        GroundTruth { class, region }
    }

    #[test]
    fn ranked_hit_miss_hit_matches_the_hand_swept_value() {
        // Two objects; detections ranked [hit, miss, hit]. The sweep visits
        // (recall, precision) = (0.5, 1.0), (0.5, 0.5), (1.0, 2/3), so the
        // interpolated value is (51 * 1 + 50 * 2/3) / 101 at every threshold.
        let truth = vec![
            gt(ClassId::Pedestrians, box_region(0.0, 0.0, 10.0)),
            gt(ClassId::Pedestrians, box_region(40.0, 0.0, 10.0)),
        ];
        let hits = vec![
            det(ClassId::Pedestrians, box_region(0.0, 0.0, 10.0), 0.9),
            det(ClassId::Pedestrians, box_region(80.0, 0.0, 10.0), 0.8),
            det(ClassId::Pedestrians, box_region(40.0, 0.0, 10.0), 0.7),
        ];
        let expected = (51.0 + 50.0 * (2.0 / 3.0)) / 101.0;

        let result = average_precision(&truth, &hits, &MatchSpec::default()).unwrap();
        let class = &result.per_class[&ClassId::Pedestrians];
        for entry in &class.per_threshold {
            assert!(
                (entry.average_precision - expected).abs() < 1e-12,
                "threshold {}: {} vs {expected}",
                entry.iou_threshold,
                entry.average_precision
            );
            let pr: Vec<(f64, f64)> = entry.curve.iter().map(|p| (p.recall, p.precision)).collect();
            assert_eq!(pr, vec![(0.5, 1.0), (0.5, 0.5), (1.0, 2.0 / 3.0)]);
        }
        assert!((class.average_precision - expected).abs() < 1e-12);
        assert!((result.mean_ap.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn perfect_detections_score_one_everywhere() {
        let truth = vec![
            gt(ClassId::Cars, box_region(0.0, 0.0, 6.0)),
            gt(ClassId::Cars, box_region(20.0, 0.0, 6.0)),
        ];
        let hits = vec![
            det(ClassId::Cars, box_region(0.0, 0.0, 6.0), 0.6),
            det(ClassId::Cars, box_region(20.0, 0.0, 6.0), 0.8),
        ];
        let result = average_precision(&truth, &hits, &MatchSpec::default()).unwrap();
        assert_eq!(result.per_class[&ClassId::Cars].average_precision, 1.0);
        assert_eq!(result.mean_ap, Some(1.0));
    }

    #[test]
    fn mean_averages_classes_and_skips_unannotated_ones() {
        let truth = vec![
            gt(ClassId::Cars, box_region(0.0, 0.0, 6.0)),
            gt(ClassId::Pedestrians, box_region(20.0, 0.0, 4.0)),
        ];
        // Cars detected perfectly; pedestrians missed entirely; one spurious
        // class with no annotation at all.
        let hits = vec![
            det(ClassId::Cars, box_region(0.0, 0.0, 6.0), 0.9),
            det(ClassId::Bikes, box_region(50.0, 0.0, 4.0), 0.9),
        ];
        let result = average_precision(&truth, &hits, &MatchSpec::default()).unwrap();
        assert_eq!(result.per_class[&ClassId::Cars].average_precision, 1.0);
        assert_eq!(
            result.per_class[&ClassId::Pedestrians].average_precision,
            0.0
        );
        assert_eq!(result.mean_ap, Some(0.5));
        assert_eq!(result.skipped_classes, vec![ClassId::Bikes]);
        assert!(!result.per_class.contains_key(&ClassId::Bikes));
    }

    #[test]
    fn average_precision_never_rises_with_the_threshold() {
        // Partial overlaps: per-pair IoU 9/11 (~0.818), so thresholds above
        // that kill the matches one by one.
        let truth = vec![
            gt(ClassId::Trucks, box_region(0.0, 0.0, 10.0)),
            gt(ClassId::Trucks, box_region(40.0, 0.0, 10.0)),
        ];
        let hits = vec![
            det(ClassId::Trucks, box_region(1.0, 0.0, 10.0), 0.9),
            det(ClassId::Trucks, box_region(41.0, 0.0, 10.0), 0.8),
        ];
        let result = average_precision(&truth, &hits, &MatchSpec::default()).unwrap();
        let aps: Vec<f64> = result.per_class[&ClassId::Trucks]
            .per_threshold
            .iter()
            .map(|t| t.average_precision)
            .collect();
        for pair in aps.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15, "AP rose across thresholds: {aps:?}");
        }
        assert_eq!(aps[0], 1.0);
        assert_eq!(*aps.last().unwrap(), 0.0);
    }

    #[test]
    fn no_annotations_at_all_yields_an_undefined_mean() {
        let hits = vec![det(ClassId::Cars, box_region(0.0, 0.0, 6.0), 0.9)];
        let result = average_precision(&[], &hits, &MatchSpec::default()).unwrap();
        assert_eq!(result.mean_ap, None);
        assert!(result.per_class.is_empty());
        assert_eq!(result.skipped_classes, vec![ClassId::Cars]);
    }

    #[test]
    fn annotated_but_undetected_classes_score_zero() {
        let truth = vec![gt(ClassId::Motorbikes, box_region(0.0, 0.0, 4.0))];
        let result = average_precision(&truth, &[], &MatchSpec::default()).unwrap();
        assert_eq!(
            result.per_class[&ClassId::Motorbikes].average_precision,
            0.0
        );
        assert_eq!(result.mean_ap, Some(0.0));
    }

    #[test]
    fn invalid_sweeps_are_rejected() {
        assert!(MatchSpec {
            iou_thresholds: vec![]
        }
        .validate()
        .is_err());
        assert!(MatchSpec {
            iou_thresholds: vec![0.5, 0.5]
        }
        .validate()
        .is_err());
        assert!(MatchSpec {
            iou_thresholds: vec![0.9, 0.5]
        }
        .validate()
        .is_err());
        assert!(MatchSpec {
            iou_thresholds: vec![0.0, 0.5]
        }
        .validate()
        .is_err());
        assert!(MatchSpec {
            iou_thresholds: vec![0.5, 1.1]
        }
        .validate()
        .is_err());
        assert!(MatchSpec::default().validate().is_ok());
        assert!(MatchSpec::single(0.5).validate().is_ok());
    }

    #[test]
    fn duplicate_detections_cannot_raise_the_score() {
        let truth = vec![gt(ClassId::Cars, box_region(0.0, 0.0, 6.0))];
        let hits = vec![det(ClassId::Cars, box_region(0.0, 0.0, 6.0), 0.9)];
        let mut duplicated = hits.clone();
        duplicated.push(det(ClassId::Cars, box_region(0.0, 0.0, 6.0), 0.8));

        let spec = MatchSpec::default();
        let clean = average_precision(&truth, &hits, &spec).unwrap();
        let doubled = average_precision(&truth, &duplicated, &spec).unwrap();
        assert!(
            doubled.mean_ap.unwrap() <= clean.mean_ap.unwrap(),
            "duplicates raised the mean: {:?} vs {:?}",
            doubled.mean_ap,
            clean.mean_ap
        );
    }
}
