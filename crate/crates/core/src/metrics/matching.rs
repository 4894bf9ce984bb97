//! Greedy score-ordered matching of detections to ground truths, plus
//! precision and recall with explicit handling of undefined ratios.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::iou::{iou, Region};
use crate::seg::ClassId;

/// One detected object with a confidence score.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub class: ClassId,
    pub region: Region,
    pub score: f64,
}

/// One annotated object.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub class: ClassId,
    pub region: Region,
}

/// A matched (detection, ground truth) pair with its overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub class: ClassId,
    /// Index into the detection slice passed to [`match_detections`].
    pub detection_index: usize,
    /// Index into the ground-truth slice passed to [`match_detections`].
    pub ground_truth_index: usize,
    pub iou: f64,
}

/// True/false positive and false negative counts for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Outcome of matching one batch of detections against ground truth.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub per_class: BTreeMap<ClassId, ClassCounts>,
    /// Matched pairs, in the order detections were visited.
    pub matches: Vec<MatchedPair>,
}

impl MatchReport {
    pub fn counts(&self, class: ClassId) -> ClassCounts {
        self.per_class.get(&class).copied().unwrap_or_default()
    }

    pub fn totals(&self) -> ClassCounts {
        let mut t = ClassCounts::default();
        for c in self.per_class.values() {
            t.true_positives += c.true_positives;
            t.false_positives += c.false_positives;
            t.false_negatives += c.false_negatives;
        }
        t
    }
}

/// A ratio that may be undefined (zero denominator). Serialized as a number
/// or as the string `"undefined"` so reports never smuggle a NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ratio {
    Defined(f64),
    #[serde(with = "undefined_marker")]
    Undefined,
}

mod undefined_marker {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str("undefined")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<(), D::Error> {
        let text = String::deserialize(d)?;
        if text == "undefined" {
            Ok(())
        } else {
            Err(D::Error::custom("expected the marker \"undefined\""))
        }
    }
}

impl Ratio {
    fn of(numerator: usize, denominator: usize) -> Ratio {
        if denominator == 0 {
            Ratio::Undefined
        } else {
            Ratio::Defined(numerator as f64 / denominator as f64)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Defined(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

impl ClassCounts {
    /// TP / (TP + FP); undefined without any detections.
    pub fn precision(&self) -> Ratio {
        Ratio::of(
            self.true_positives,
            self.true_positives + self.false_positives,
        )
    }

    /// TP / (TP + FN); undefined without any ground truth.
    pub fn recall(&self) -> Ratio {
        Ratio::of(
            self.true_positives,
            self.true_positives + self.false_negatives,
        )
    }
}

/// Indices ordered for greedy matching: descending score, ties broken by
/// ascending input index so the outcome never depends on sort internals.
pub(crate) fn score_order(detections: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .score
            .partial_cmp(&detections[a].score)
            .expect("scores are validated finite")
            .then(a.cmp(&b))
    });
    order
}

/// Matches detections to ground truths of the same class.
///
/// Detections are visited in descending score order (ties by input index).
/// Each takes the not-yet-matched ground truth of its class with the highest
/// IoU — ties by ground-truth index — and counts as a true positive only when
/// that IoU lies strictly above `iou_threshold`; otherwise it is a false
/// positive. Ground truths can match at most once; the unmatched remainder
/// are false negatives. Errors on empty regions, non-finite scores, or an
/// out-of-range threshold.
pub fn match_detections(
    ground_truths: &[GroundTruth],
    detections: &[Detection],
    iou_threshold: f64,
) -> Result<MatchReport> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::Config(format!(
            "IoU threshold must lie in (0, 1], got {iou_threshold}"
        )));
    }
    for (i, det) in detections.iter().enumerate() {
        if !det.score.is_finite() {
            return Err(Error::Label(format!(
                "detection {i} carries a non-finite score {}",
                det.score
            )));
        }
    }

    let mut report = MatchReport::default();
    for gt in ground_truths {
        report.per_class.entry(gt.class).or_default();
    }
    for det in detections {
        report.per_class.entry(det.class).or_default();
    }

    let mut gt_taken = vec![false; ground_truths.len()];
    for det_index in score_order(detections) {
        let det = &detections[det_index];
        let mut best: Option<(usize, f64)> = None;
        for (gt_index, gt) in ground_truths.iter().enumerate() {
            if gt.class != det.class || gt_taken[gt_index] {
                continue;
            }
            let overlap = iou(&det.region, &gt.region)?;
            let better = match best {
                None => true,
                Some((_, best_iou)) => overlap > best_iou,
            };
            if better {
                best = Some((gt_index, overlap));
            }
        }
        let counts = report.per_class.entry(det.class).or_default();
        match best {
            Some((gt_index, overlap)) if overlap > iou_threshold => {
                gt_taken[gt_index] = true;
                counts.true_positives += 1;
                report.matches.push(MatchedPair {
                    class: det.class,
                    detection_index: det_index,
                    ground_truth_index: gt_index,
                    iou: overlap,
                });
            }
            _ => counts.false_positives += 1,
        }
    }
    for (gt_index, gt) in ground_truths.iter().enumerate() {
        if !gt_taken[gt_index] {
            report
                .per_class
                .entry(gt.class)
                .or_default()
                .false_negatives += 1;
        }
    }
    Ok(report)
}

/// Per-class (precision, recall) pairs for a match report.
pub fn precision_recall(report: &MatchReport) -> BTreeMap<ClassId, (Ratio, Ratio)> {
    report
        .per_class
        .iter()
        .map(|(class, counts)| (*class, (counts.precision(), counts.recall())))
        .collect()
}
