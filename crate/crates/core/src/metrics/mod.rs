//! Detection-quality metrics: intersection over union, greedy score-ordered
//! matching, precision/recall with explicit undefined handling, and
//! interpolated average precision averaged over an IoU-threshold sweep.
//!
//! Matching follows the convention of large-scale detection benchmarks:
//! detections are visited in descending score order; each claims the
//! unmatched ground truth with the highest IoU and counts as a true positive
//! only when that IoU lies strictly above the threshold; each ground truth
//! is matched at most once. Average precision uses 101-point interpolated
//! precision and the 0.50:0.05:0.95 threshold set, and the mean over classes
//! skips classes with no ground truth.

pub mod ap;
pub mod iou;
pub mod matching;

pub use ap::{average_precision, ApResult, ClassAp, MatchSpec, COCO_THRESHOLDS};
pub use iou::{iou, Rect, Region};
pub use matching::{
    match_detections, precision_recall, ClassCounts, Detection, GroundTruth, MatchReport,
    MatchedPair, Ratio,
};
