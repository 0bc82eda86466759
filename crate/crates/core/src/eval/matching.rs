use std::cmp::Ordering;

use crate::annotation::{NormBox, Prediction};
use crate::scalar::Scalar;

/// Intersection over union of two boxes in normalized coordinates. Class ids
/// are ignored.
pub fn iou<T: Scalar>(a: &NormBox<T>, b: &NormBox<T>) -> T {
    let (ax0, ay0, ax1, ay1) = a.corners();
    let (bx0, by0, bx1, by1) = b.corners();
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(T::zero());
    let ih = (ay1.min(by1) - ay0.max(by0)).max(T::zero());
    let inter = iw * ih;
    if inter <= T::zero() {
        return T::zero();
    }
    let union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    (inter / union).min(T::one())
}

/// Match outcome of one prediction that passed the confidence filter.
#[derive(Debug, Clone, PartialEq)]
pub struct PredMatch<T> {
    /// Index into the prediction slice given to the matcher.
    pub pred_index: usize,
    pub confidence: T,
    /// Matched ground-truth index per IoU threshold.
    pub matched_gt: Vec<Option<usize>>,
}

impl<T> PredMatch<T> {
    pub fn is_tp(&self, threshold_index: usize) -> bool {
        self.matched_gt[threshold_index].is_some()
    }
}

/// Greedy matching of one image (and one class) at one or more IoU
/// thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<T> {
    pub thresholds: Vec<T>,
    /// Kept predictions in processing order (descending confidence).
    pub preds: Vec<PredMatch<T>>,
    /// Ground-truth boxes left unmatched, per threshold.
    pub unmatched_gt: Vec<usize>,
    pub n_gt: usize,
}

impl<T> MatchResult<T> {
    pub fn tp(&self, threshold_index: usize) -> usize {
        self.preds.iter().filter(|p| p.is_tp(threshold_index)).count()
    }

    pub fn fp(&self, threshold_index: usize) -> usize {
        self.preds.len() - self.tp(threshold_index)
    }

    pub fn fn_count(&self, threshold_index: usize) -> usize {
        self.unmatched_gt[threshold_index]
    }
}

/// Indices of predictions with confidence `>= conf_thr`, sorted by
/// descending confidence with ties in input order.
pub(crate) fn ranked<T: Scalar>(confidences: impl Iterator<Item = T>, conf_thr: T) -> Vec<(usize, T)> {
    let mut order: Vec<(usize, T)> = confidences
        .enumerate()
        .filter(|(_, c)| *c >= conf_thr)
        .collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal));
    order
}

/// Greedy assignment of `preds` to `gts` given a precomputed IoU matrix
/// (`ious[p][g]`). Each threshold is matched independently.
pub(crate) fn greedy_assign<T: Scalar>(
    order: &[(usize, T)],
    ious: &[Vec<T>],
    n_gt: usize,
    thresholds: &[T],
) -> (Vec<PredMatch<T>>, Vec<usize>) {
    let mut out: Vec<PredMatch<T>> = order
        .iter()
        .map(|&(pred_index, confidence)| PredMatch {
            pred_index,
            confidence,
            matched_gt: Vec::with_capacity(thresholds.len()),
        })
        .collect();
    let mut unmatched = Vec::with_capacity(thresholds.len());
    for &thr in thresholds {
        let mut taken = vec![false; n_gt];
        for (slot, &(p, _)) in out.iter_mut().zip(order) {
            let mut best: Option<(usize, T)> = None;
            for g in 0..n_gt {
                if taken[g] {
                    continue;
                }
                let v = ious[p][g];
                if best.map_or(true, |(_, b)| v > b) {
                    best = Some((g, v));
                }
            }
            let hit = best.filter(|&(_, v)| v >= thr).map(|(g, _)| g);
            if let Some(g) = hit {
                taken[g] = true;
            }
            slot.matched_gt.push(hit);
        }
        unmatched.push(taken.iter().filter(|t| !**t).count());
    }
    (out, unmatched)
}

/// Greedy matching at several IoU thresholds at once. The caller passes a
/// single image and a single class; class ids are not checked here.
pub fn match_greedy_multi<T: Scalar>(
    gts: &[NormBox<T>],
    preds: &[Prediction<T>],
    thresholds: &[T],
    conf_thr: T,
) -> MatchResult<T> {
    let order = ranked(preds.iter().map(Prediction::confidence), conf_thr);
    let ious: Vec<Vec<T>> = preds
        .iter()
        .map(|p| gts.iter().map(|g| iou(p.bbox(), g)).collect())
        .collect();
    let (preds, unmatched_gt) = greedy_assign(&order, &ious, gts.len(), thresholds);
    MatchResult {
        thresholds: thresholds.to_vec(),
        preds,
        unmatched_gt,
        n_gt: gts.len(),
    }
}

/// Greedy matching at a single IoU threshold.
pub fn match_greedy<T: Scalar>(
    gts: &[NormBox<T>],
    preds: &[Prediction<T>],
    iou_thr: T,
    conf_thr: T,
) -> MatchResult<T> {
    match_greedy_multi(gts, preds, &[iou_thr], conf_thr)
}
