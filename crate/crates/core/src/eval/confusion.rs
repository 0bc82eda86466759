use super::matching::{greedy_assign, iou, ranked};
use super::{check_classes, ImageRecord};
use crate::annotation::Prediction;
use crate::error::Result;
use crate::scalar::Scalar;

/// `(C + 1) x (C + 1)` counts; rows are ground-truth classes, columns are
/// predicted classes, and index `C` stands for background on both axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix {
            n_classes,
            counts: vec![0; (n_classes + 1) * (n_classes + 1)],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Row/column index used for background.
    pub fn background(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, gt_row: usize, pred_col: usize) -> u64 {
        self.counts[gt_row * (self.n_classes + 1) + pred_col]
    }

    fn bump(&mut self, gt_row: usize, pred_col: usize) {
        self.counts[gt_row * (self.n_classes + 1) + pred_col] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Row-major rows, background last.
    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.n_classes + 1)
    }
}

/// Confusion matrix with class-agnostic greedy matching: predictions at or
/// above `conf_thr`, by descending confidence, claim the unmatched
/// ground-truth box of any class with the highest IoU `>= iou_thr`.
///
/// Matched pairs count at `(gt class, pred class)`, unmatched predictions at
/// `(background, pred class)` and unmatched ground truth at
/// `(gt class, background)`.
pub fn confusion_matrix<T: Scalar>(
    records: &[ImageRecord<T>],
    n_classes: usize,
    conf_thr: T,
    iou_thr: T,
) -> Result<ConfusionMatrix> {
    check_classes(records, n_classes)?;
    let mut cm = ConfusionMatrix::new(n_classes);
    let bg = cm.background();
    for record in records {
        let order = ranked(record.preds.iter().map(Prediction::confidence), conf_thr);
        let ious: Vec<Vec<T>> = record
            .preds
            .iter()
            .map(|p| record.gts.iter().map(|g| iou(p.bbox(), g)).collect())
            .collect();
        let (matches, _) = greedy_assign(&order, &ious, record.gts.len(), &[iou_thr]);
        let mut gt_used = vec![false; record.gts.len()];
        for m in &matches {
            let pred_class = record.preds[m.pred_index].class_id();
            match m.matched_gt[0] {
                Some(g) => {
                    gt_used[g] = true;
                    cm.bump(record.gts[g].class_id(), pred_class);
                }
                None => cm.bump(bg, pred_class),
            }
        }
        for (g, used) in record.gts.iter().zip(gt_used) {
            if !used {
                cm.bump(g.class_id(), bg);
            }
        }
    }
    Ok(cm)
}
