use std::cmp::Ordering;

use super::curve::{average_precision, pr_curve, PrPoint};
use super::matching::match_greedy_multi;
use super::{check_classes, EvalConfig, ImageRecord};
use crate::annotation::{NormBox, Prediction};
use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};

/// The five headline numbers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSet<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub map50: T,
    pub map50_95: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics<T> {
    pub class_id: usize,
    pub n_gt: usize,
    /// Predictions at or above the confidence threshold.
    pub n_pred: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
    /// `None` for classes without ground truth.
    pub metrics: Option<MetricSet<T>>,
}

/// Per-class and macro-averaged metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<T> {
    pub per_class: Vec<ClassMetrics<T>>,
    pub overall: MetricSet<T>,
    pub conf_threshold: T,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn evaluated_classes(&self) -> usize {
        self.per_class.iter().filter(|c| c.metrics.is_some()).count()
    }
}

/// Precision, recall and F1 from counts, each zero when undefined.
fn prf<T: Scalar>(tp: usize, fp: usize, fn_count: usize) -> (T, T, T) {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            T::zero()
        } else {
            T::from_usize_lossy(num) / T::from_usize_lossy(den)
        }
    };
    let p = ratio(tp, tp + fp);
    let r = ratio(tp, tp + fn_count);
    (p, r, f1(p, r))
}

fn f1<T: Scalar>(p: T, r: T) -> T {
    if p + r > T::zero() {
        T::lit(2.0) * p * r / (p + r)
    } else {
        T::zero()
    }
}

fn of_class<T: Scalar>(record: &ImageRecord<T>, class: usize) -> (Vec<NormBox<T>>, Vec<Prediction<T>>) {
    (
        record.gts.iter().filter(|g| g.class_id() == class).copied().collect(),
        record.preds.iter().filter(|p| p.class_id() == class).copied().collect(),
    )
}

/// Every prediction of `class` over the dataset with its hit flags at each
/// threshold, in dataset order (images as given, predictions as listed), plus
/// the class's ground-truth count.
fn class_hits<T: Scalar>(
    records: &[ImageRecord<T>],
    class: usize,
    thresholds: &[T],
) -> (usize, Vec<(T, Vec<bool>)>) {
    let mut n_gt = 0;
    let mut hits = Vec::new();
    for record in records {
        let (gts, preds) = of_class(record, class);
        n_gt += gts.len();
        let m = match_greedy_multi(&gts, &preds, thresholds, T::zero());
        let mut by_input: Vec<Option<Vec<bool>>> = vec![None; preds.len()];
        for pm in &m.preds {
            by_input[pm.pred_index] = Some(pm.matched_gt.iter().map(Option::is_some).collect());
        }
        for (p, flags) in preds.iter().zip(by_input) {
            hits.push((p.confidence(), flags.expect("conf >= 0 keeps every prediction")));
        }
    }
    (n_gt, hits)
}

fn ap_from_hits<T: Scalar>(hits: &[(T, Vec<bool>)], n_gt: usize, threshold_index: usize) -> T {
    let pairs: Vec<(T, bool)> = hits.iter().map(|(c, f)| (*c, f[threshold_index])).collect();
    average_precision(&pr_curve(&pairs, n_gt))
}

/// AP per class (`None` without ground truth) and their macro mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MapResult<T> {
    pub per_class: Vec<Option<T>>,
    pub mean: T,
}

/// Mean of the `Some` entries; errors when there are none.
fn macro_mean<T: Scalar>(values: &[Option<T>]) -> Result<T> {
    let present: Vec<T> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::NoEvaluableClasses);
    }
    Ok(mean(&present))
}

/// mAP at one IoU threshold.
pub fn map_at<T: Scalar>(records: &[ImageRecord<T>], n_classes: usize, iou_thr: T) -> Result<MapResult<T>> {
    check_classes(records, n_classes)?;
    let per_class: Vec<Option<T>> = (0..n_classes)
        .map(|c| {
            let (n_gt, hits) = class_hits(records, c, &[iou_thr]);
            (n_gt > 0).then(|| ap_from_hits(&hits, n_gt, 0))
        })
        .collect();
    let mean = macro_mean(&per_class)?;
    Ok(MapResult { per_class, mean })
}

/// Mean of [`map_at`] over `thresholds`.
pub fn map_range<T: Scalar>(records: &[ImageRecord<T>], n_classes: usize, thresholds: &[T]) -> Result<T> {
    let maps = thresholds
        .iter()
        .map(|&t| map_at(records, n_classes, t).map(|m| m.mean))
        .collect::<Result<Vec<T>>>()?;
    Ok(mean(&maps))
}

/// Precision-recall curve of one class at one IoU threshold.
pub fn class_pr_curve<T: Scalar>(records: &[ImageRecord<T>], class: usize, iou_thr: T) -> Vec<PrPoint<T>> {
    let (n_gt, hits) = class_hits(records, class, &[iou_thr]);
    let pairs: Vec<(T, bool)> = hits.iter().map(|(c, f)| (*c, f[0])).collect();
    pr_curve(&pairs, n_gt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrfResult<T> {
    /// `(precision, recall, f1)` per class, `None` without ground truth.
    pub per_class: Vec<Option<(T, T, T)>>,
    pub precision: T,
    pub recall: T,
    /// Harmonic mean of the macro precision and recall.
    pub f1: T,
}

/// Precision, recall and F1 at a fixed confidence threshold.
///
/// Macro precision and recall average over classes with ground truth; F1
/// is then `2PR / (P + R)` of those macro values.
pub fn prf_at_conf<T: Scalar>(
    records: &[ImageRecord<T>],
    n_classes: usize,
    conf_thr: T,
    iou_thr: T,
) -> Result<PrfResult<T>> {
    check_classes(records, n_classes)?;
    let counts = class_counts(records, n_classes, conf_thr, iou_thr);
    prf_from_counts(&counts)
}

/// `(n_gt, tp, fp, fn)` per class.
fn class_counts<T: Scalar>(
    records: &[ImageRecord<T>],
    n_classes: usize,
    conf_thr: T,
    iou_thr: T,
) -> Vec<(usize, usize, usize, usize)> {
    (0..n_classes)
        .map(|c| {
            let mut acc = (0, 0, 0, 0);
            for record in records {
                let (gts, preds) = of_class(record, c);
                let m = match_greedy_multi(&gts, &preds, &[iou_thr], conf_thr);
                acc.0 += gts.len();
                acc.1 += m.tp(0);
                acc.2 += m.fp(0);
                acc.3 += m.fn_count(0);
            }
            acc
        })
        .collect()
}

fn prf_from_counts<T: Scalar>(counts: &[(usize, usize, usize, usize)]) -> Result<PrfResult<T>> {
    let per_class: Vec<Option<(T, T, T)>> = counts
        .iter()
        .map(|&(n_gt, tp, fp, fn_count)| (n_gt > 0).then(|| prf(tp, fp, fn_count)))
        .collect();
    let precision = macro_mean(&per_class.iter().map(|v| v.map(|t| t.0)).collect::<Vec<_>>())?;
    let recall = macro_mean(&per_class.iter().map(|v| v.map(|t| t.1)).collect::<Vec<_>>())?;
    Ok(PrfResult {
        per_class,
        precision,
        recall,
        f1: f1(precision, recall),
    })
}

/// Full report: P/R/F1 at the configured confidence, mAP50 and mAP50-95.
pub fn evaluate<T: Scalar>(
    records: &[ImageRecord<T>],
    n_classes: usize,
    config: &EvalConfig<T>,
) -> Result<MetricsReport<T>> {
    config.validate()?;
    check_classes(records, n_classes)?;
    let counts = class_counts(records, n_classes, config.conf_threshold, config.iou_threshold);
    let prf_all = prf_from_counts::<T>(&counts)?;

    let mut thresholds = vec![config.iou_threshold];
    thresholds.extend_from_slice(&config.range_thresholds);
    let mut per_class = Vec::with_capacity(n_classes);
    let mut map50 = Vec::with_capacity(n_classes);
    let mut map_range = Vec::with_capacity(n_classes);
    for (c, &(n_gt, tp, fp, fn_count)) in counts.iter().enumerate() {
        let (_, hits) = class_hits(records, c, &thresholds);
        let metrics = (n_gt > 0).then(|| {
            let ap50 = ap_from_hits(&hits, n_gt, 0);
            let aps: Vec<T> = (1..thresholds.len()).map(|i| ap_from_hits(&hits, n_gt, i)).collect();
            let (precision, recall, f1) = prf_all.per_class[c].expect("class has ground truth");
            MetricSet {
                precision,
                recall,
                f1,
                map50: ap50,
                map50_95: mean(&aps),
            }
        });
        map50.push(metrics.map(|m| m.map50));
        map_range.push(metrics.map(|m| m.map50_95));
        per_class.push(ClassMetrics {
            class_id: c,
            n_gt,
            n_pred: tp + fp,
            tp,
            fp,
            fn_count,
            metrics,
        });
    }
    Ok(MetricsReport {
        per_class,
        overall: MetricSet {
            precision: prf_all.precision,
            recall: prf_all.recall,
            f1: prf_all.f1,
            map50: macro_mean(&map50)?,
            map50_95: macro_mean(&map_range)?,
        },
        conf_threshold: config.conf_threshold,
    })
}

/// Operating point with the best macro F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<T> {
    pub conf_threshold: T,
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

/// Scans every distinct prediction confidence as a threshold and returns the
/// one with the highest macro F1 (the highest threshold among ties).
///
/// Greedy matching processes predictions by descending confidence, so the
/// matches at threshold `c` are exactly the full-sweep matches with
/// confidence `>= c`; one matching pass per class serves every threshold.
pub fn max_f1_sweep<T: Scalar>(
    records: &[ImageRecord<T>],
    n_classes: usize,
    iou_thr: T,
) -> Result<Option<SweepPoint<T>>> {
    check_classes(records, n_classes)?;
    let per_class: Vec<(usize, Vec<(T, Vec<bool>)>)> =
        (0..n_classes).map(|c| class_hits(records, c, &[iou_thr])).collect();
    let mut candidates: Vec<T> = per_class
        .iter()
        .flat_map(|(_, h)| h.iter().map(|(c, _)| *c))
        .collect();
    candidates.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    candidates.dedup();

    let mut best: Option<SweepPoint<T>> = None;
    for thr in candidates {
        let counts: Vec<(usize, usize, usize, usize)> = per_class
            .iter()
            .map(|(n_gt, hits)| {
                let kept = hits.iter().filter(|(c, _)| *c >= thr);
                let (tp, total) = kept.fold((0, 0), |(tp, n), (_, f)| (tp + usize::from(f[0]), n + 1));
                (*n_gt, tp, total - tp, n_gt - tp)
            })
            .collect();
        let r = prf_from_counts::<T>(&counts)?;
        if best.map_or(true, |b| r.f1 > b.f1) {
            best = Some(SweepPoint {
                conf_threshold: thr,
                precision: r.precision,
                recall: r.recall,
                f1: r.f1,
            });
        }
    }
    Ok(best)
}
