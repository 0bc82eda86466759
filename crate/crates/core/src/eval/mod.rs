//! Detection metrics: IoU, greedy matching, precision-recall curves,
//! 101-point interpolated AP, mAP50, mAP50-95, P/R/F1 at a fixed confidence
//! and a confusion matrix.
//!
//! Two matching conventions are used on purpose:
//!
//! * AP, precision and recall match within a class. Predictions are taken
//!   in descending confidence (ties keep input order) and each claims the
//!   unmatched ground-truth box of the same class with the highest IoU, if
//!   that IoU reaches the threshold.
//! * The confusion matrix matches across classes with the same greedy rule,
//!   so a well-placed box with the wrong label shows up off the diagonal.
//!
//! Macro averages skip classes without ground truth; their predictions still
//! reach the confusion matrix.

mod confusion;
mod curve;
mod matching;
mod metrics;

pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use curve::{average_precision, pr_curve, recall_grid, PrPoint, RECALL_POINTS};
pub use matching::{iou, match_greedy, match_greedy_multi, MatchResult, PredMatch};
pub use metrics::{
    class_pr_curve, evaluate, map_at, map_range, max_f1_sweep, prf_at_conf, ClassMetrics,
    MapResult, MetricSet, MetricsReport, PrfResult, SweepPoint,
};

use crate::annotation::{NormBox, Prediction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default confidence threshold for the fixed operating point.
pub const DEFAULT_CONF_THRESHOLD: f64 = 0.2;

/// Ground truth and predictions of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord<T> {
    pub stem: String,
    pub gts: Vec<NormBox<T>>,
    pub preds: Vec<Prediction<T>>,
}

impl<T: Scalar> ImageRecord<T> {
    pub fn new(stem: impl Into<String>, gts: Vec<NormBox<T>>, preds: Vec<Prediction<T>>) -> Self {
        ImageRecord {
            stem: stem.into(),
            gts,
            preds,
        }
    }
}

/// The ten IoU thresholds 0.50, 0.55, ..., 0.95, each computed as
/// `(50 + 5 i) / 100` so none carries accumulated rounding error.
pub fn coco_thresholds<T: Scalar>() -> Vec<T> {
    (0..10)
        .map(|i| T::from_usize_lossy(50 + 5 * i) / T::lit(100.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig<T> {
    /// Minimum confidence for the P/R/F1 operating point and the confusion
    /// matrix. AP always sweeps every confidence.
    pub conf_threshold: T,
    /// IoU threshold for mAP50, P/R/F1 and the confusion matrix.
    pub iou_threshold: T,
    /// IoU thresholds averaged for mAP50-95.
    pub range_thresholds: Vec<T>,
}

impl<T: Scalar> Default for EvalConfig<T> {
    fn default() -> Self {
        EvalConfig {
            conf_threshold: T::lit(DEFAULT_CONF_THRESHOLD),
            iou_threshold: T::lit(0.5),
            range_thresholds: coco_thresholds(),
        }
    }
}

impl<T: Scalar> EvalConfig<T> {
    pub fn with_conf_threshold(mut self, conf: T) -> Self {
        self.conf_threshold = conf;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.conf_threshold;
        if !(c >= T::zero() && c <= T::one()) {
            return Err(Error::invalid(format!("confidence threshold {c} outside [0, 1]")));
        }
        let open_unit = |t: T| t > T::zero() && t < T::one();
        if !open_unit(self.iou_threshold) {
            return Err(Error::invalid(format!(
                "IoU threshold {} outside (0, 1)",
                self.iou_threshold
            )));
        }
        if self.range_thresholds.is_empty() {
            return Err(Error::invalid("empty IoU threshold range"));
        }
        if !self.range_thresholds.iter().copied().all(open_unit) {
            return Err(Error::invalid("IoU thresholds must lie in (0, 1)"));
        }
        if self.range_thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("IoU thresholds must be strictly increasing"));
        }
        Ok(())
    }
}

/// Rejects class ids outside `0..n_classes`.
pub(crate) fn check_classes<T: Scalar>(records: &[ImageRecord<T>], n_classes: usize) -> Result<()> {
    let bad = records.iter().find_map(|r| {
        r.gts
            .iter()
            .map(NormBox::class_id)
            .chain(r.preds.iter().map(Prediction::class_id))
            .find(|c| *c >= n_classes)
            .map(|c| (r.stem.as_str(), c))
    });
    match bad {
        Some((stem, c)) => Err(Error::invalid(format!(
            "{stem}: class id {c} out of range for {n_classes} classes"
        ))),
        None => Ok(()),
    }
}
