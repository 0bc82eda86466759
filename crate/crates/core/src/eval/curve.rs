use std::cmp::Ordering;

use crate::scalar::Scalar;

/// Number of recall levels in the interpolation grid (0.00 to 1.00).
pub const RECALL_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint<T> {
    pub precision: T,
    pub recall: T,
    /// Confidence of the prediction that produced this point.
    pub confidence: T,
}

/// The recall levels `i / 100` for `i = 0..=100`.
pub fn recall_grid<T: Scalar>() -> Vec<T> {
    (0..RECALL_POINTS)
        .map(|i| T::from_usize_lossy(i) / T::lit(100.0))
        .collect()
}

/// Precision-recall points from `(confidence, is_true_positive)` pairs of one
/// class pooled over a dataset.
///
/// Pairs are ranked by descending confidence (stable, so equal confidences
/// keep their given order); point `k` has precision `TP_k / k` and recall
/// `TP_k / n_gt`. Returns an empty curve when `n_gt == 0`.
pub fn pr_curve<T: Scalar>(hits: &[(T, bool)], n_gt: usize) -> Vec<PrPoint<T>> {
    if n_gt == 0 {
        return Vec::new();
    }
    let mut ranked: Vec<(T, bool)> = hits.to_vec();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let total = T::from_usize_lossy(n_gt);
    let mut tp = 0usize;
    ranked
        .iter()
        .enumerate()
        .map(|(k, &(confidence, hit))| {
            tp += usize::from(hit);
            let tp_t = T::from_usize_lossy(tp);
            PrPoint {
                precision: tp_t / T::from_usize_lossy(k + 1),
                recall: tp_t / total,
                confidence,
            }
        })
        .collect()
}

/// 101-point interpolated average precision: the mean over recall levels
/// `r = 0.00, 0.01, ..., 1.00` of the highest precision among curve points
/// with recall `>= r` (zero where no point reaches `r`).
pub fn average_precision<T: Scalar>(curve: &[PrPoint<T>]) -> T {
    if curve.is_empty() {
        return T::zero();
    }
    // Sort by recall so a suffix maximum answers "best precision at recall
    // >= r"; curves from `pr_curve` are already in this order.
    let mut pts: Vec<(T, T)> = curve.iter().map(|p| (p.recall, p.precision)).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut envelope: Vec<T> = pts.iter().map(|p| p.1).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut cursor = 0;
    let mut total = T::zero();
    for r in recall_grid::<T>() {
        while cursor < pts.len() && pts[cursor].0 < r {
            cursor += 1;
        }
        if cursor == pts.len() {
            break;
        }
        total = total + envelope[cursor];
    }
    total / T::from_usize_lossy(RECALL_POINTS)
}
