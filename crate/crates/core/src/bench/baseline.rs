use std::cmp::Ordering;

use crate::annotation::{NormBox, Prediction};
use crate::error::{Error, Result};
use crate::eval::iou;
use crate::forge::RasterImage;

/// Quantization levels per channel of the joint color histogram.
const LEVELS: usize = 4;
const HIST_BINS: usize = LEVELS * LEVELS * LEVELS;

#[derive(Debug, Clone)]
pub struct BaselineConfig {
    /// Window sizes relative to the mean training box.
    pub scales: [f64; 3],
    /// Window stride as a fraction of the window side.
    pub stride: f64,
    pub top_k: usize,
    /// Boxes overlapping a better one (of any class) above this IoU are
    /// suppressed.
    pub nms_iou: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            scales: [0.8, 1.0, 1.25],
            stride: 0.125,
            top_k: 5,
            nms_iou: 0.3,
        }
    }
}

/// Toy detector: color-histogram templates matched over a sliding window.
///
/// Similarity is histogram intersection. Each class's score is rescaled so
/// that the best match to plain training background maps to 0 and a perfect
/// match to 1; that rescaled value is the reported confidence.
#[derive(Debug, Clone)]
pub struct BaselineDetector {
    templates: Vec<Option<[f64; HIST_BINS]>>,
    floors: Vec<f64>,
    window: (f64, f64),
    cfg: BaselineConfig,
}

fn bin(px: &[u8]) -> usize {
    let q = |v: u8| usize::from(v) * LEVELS / 256;
    (q(px[0]) * LEVELS + q(px[1])) * LEVELS + q(px[2])
}

/// Normalized joint histogram of the pixel rectangle `[x0, x1) x [y0, y1)`.
fn window_hist(img: &RasterImage, x0: u32, y0: u32, x1: u32, y1: u32) -> [f64; HIST_BINS] {
    let mut h = [0.0; HIST_BINS];
    let stride = img.width() as usize * 3;
    let px = img.pixels();
    for y in y0..y1 {
        let row = &px[y as usize * stride..][..stride];
        for x in x0..x1 {
            h[bin(&row[x as usize * 3..x as usize * 3 + 3])] += 1.0;
        }
    }
    let n = f64::from((x1 - x0) * (y1 - y0));
    h.iter_mut().for_each(|v| *v /= n);
    h
}

fn intersection(a: &[f64; HIST_BINS], b: &[f64; HIST_BINS]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.min(*y)).sum()
}

/// Pixel rectangle covered by a normalized box, at least one pixel wide.
fn pixel_rect(b: &NormBox<f64>, w: u32, h: u32) -> (u32, u32, u32, u32) {
    let (x0, y0, x1, y1) = b.corners();
    let fx = |v: f64| (v * f64::from(w)).round().clamp(0.0, f64::from(w)) as u32;
    let fy = |v: f64| (v * f64::from(h)).round().clamp(0.0, f64::from(h)) as u32;
    let (x0, y0) = (fx(x0).min(w - 1), fy(y0).min(h - 1));
    (x0, y0, fx(x1).max(x0 + 1), fy(y1).max(y0 + 1))
}

/// Top-left corners of `side`-pixel windows stepping by `step`, always
/// including the last position.
fn positions(extent: u32, side: u32, step: u32) -> Vec<u32> {
    let last = extent - side;
    let mut v: Vec<u32> = (0..=last).step_by(step as usize).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v
}

impl BaselineDetector {
    /// Builds one template per class from the ground-truth crops of the
    /// training images; classes without crops get no template.
    pub fn fit(train: &[(RasterImage, Vec<NormBox<f64>>)], n_classes: usize, cfg: BaselineConfig) -> Result<Self> {
        let mut sums = vec![[0.0; HIST_BINS]; n_classes];
        let mut counts = vec![0usize; n_classes];
        let (mut sw, mut sh, mut nb) = (0.0, 0.0, 0usize);
        for (img, boxes) in train {
            for b in boxes {
                if b.class_id() >= n_classes {
                    return Err(Error::invalid(format!("class id {} out of range", b.class_id())));
                }
                let (x0, y0, x1, y1) = pixel_rect(b, img.width(), img.height());
                let h = window_hist(img, x0, y0, x1, y1);
                sums[b.class_id()].iter_mut().zip(h).for_each(|(s, v)| *s += v);
                counts[b.class_id()] += 1;
                sw += b.w();
                sh += b.h();
                nb += 1;
            }
        }
        if nb == 0 {
            return Err(Error::invalid("no training boxes to build templates from"));
        }
        let templates: Vec<Option<[f64; HIST_BINS]>> = sums
            .into_iter()
            .zip(&counts)
            .map(|(s, &k)| (k > 0).then(|| s.map(|v| v / k as f64)))
            .collect();
        let mut det = BaselineDetector {
            floors: vec![0.5; n_classes],
            templates,
            window: (sw / nb as f64, sh / nb as f64),
            cfg,
        };
        det.floors = det.background_floors(train);
        Ok(det)
    }

    /// Best raw similarity of each template to windows that touch no
    /// ground-truth box.
    fn background_floors(&self, train: &[(RasterImage, Vec<NormBox<f64>>)]) -> Vec<f64> {
        let mut best = vec![None::<f64>; self.templates.len()];
        for (img, boxes) in train {
            for (rect, bbox) in self.windows(img) {
                if boxes.iter().any(|b| iou(b, &bbox) > 0.0) {
                    continue;
                }
                let h = window_hist(img, rect.0, rect.1, rect.2, rect.3);
                for (c, t) in self.templates.iter().enumerate() {
                    if let Some(t) = t {
                        let s = intersection(t, &h);
                        best[c] = Some(best[c].map_or(s, |b: f64| b.max(s)));
                    }
                }
            }
        }
        best.into_iter().map(|b| b.unwrap_or(0.5).min(0.99)).collect()
    }

    fn windows(&self, img: &RasterImage) -> Vec<((u32, u32, u32, u32), NormBox<f64>)> {
        let (w, h) = (img.width(), img.height());
        let mut out = Vec::new();
        for scale in self.cfg.scales {
            let ww = ((self.window.0 * scale * f64::from(w)).round() as u32).clamp(2, w);
            let wh = ((self.window.1 * scale * f64::from(h)).round() as u32).clamp(2, h);
            let sx = ((f64::from(ww) * self.cfg.stride).round() as u32).max(1);
            let sy = ((f64::from(wh) * self.cfg.stride).round() as u32).max(1);
            for &y in &positions(h, wh, sy) {
                for &x in &positions(w, ww, sx) {
                    let b = NormBox::from_corners(
                        0,
                        f64::from(x) / f64::from(w),
                        f64::from(y) / f64::from(h),
                        f64::from(x + ww) / f64::from(w),
                        f64::from(y + wh) / f64::from(h),
                    )
                    .expect("window lies inside the image");
                    out.push(((x, y, x + ww, y + wh), b));
                }
            }
        }
        out
    }

    /// Confidence of a raw similarity for `class`.
    pub fn calibrate(&self, class: usize, similarity: f64) -> f64 {
        let floor = self.floors[class];
        ((similarity - floor) / (1.0 - floor)).clamp(0.0, 1.0)
    }

    /// Up to `top_k` detections, by descending confidence.
    pub fn detect(&self, img: &RasterImage) -> Vec<Prediction<f64>> {
        let mut cands: Vec<Prediction<f64>> = Vec::new();
        for (rect, bbox) in self.windows(img) {
            let h = window_hist(img, rect.0, rect.1, rect.2, rect.3);
            let best = self
                .templates
                .iter()
                .enumerate()
                .filter_map(|(c, t)| t.as_ref().map(|t| (c, self.calibrate(c, intersection(t, &h)))))
                .fold(None::<(usize, f64)>, |acc, (c, s)| match acc {
                    Some((_, bs)) if bs >= s => acc,
                    _ => Some((c, s)),
                });
            if let Some((c, conf)) = best {
                if conf > 0.0 {
                    cands.push(Prediction::new(bbox.with_class(c), conf).expect("confidence in [0, 1]"));
                }
            }
        }
        cands.sort_by(|a, b| b.confidence().partial_cmp(&a.confidence()).unwrap_or(Ordering::Equal));
        let mut kept: Vec<Prediction<f64>> = Vec::new();
        for p in cands {
            if kept.len() == self.cfg.top_k {
                break;
            }
            let suppressed = kept
                .iter()
                .any(|k| iou(k.bbox(), p.bbox()) > self.cfg.nms_iou);
            if !suppressed {
                kept.push(p);
            }
        }
        kept
    }
}
