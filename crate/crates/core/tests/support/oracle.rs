//! Brute-force reference for detection metrics, written without the
//! library's matching or curve code.
//!
//! Boxes are `[cx, cy, w, h]` in normalized units.

#![allow(dead_code)]

use driftbench::annotation::{NormBox, Prediction};
use driftbench::eval::ImageRecord;

#[derive(Debug, Clone)]
pub struct Gt {
    pub class: usize,
    pub b: [f64; 4],
}

#[derive(Debug, Clone)]
pub struct Det {
    pub class: usize,
    pub b: [f64; 4],
    pub conf: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Instance {
    pub n_classes: usize,
    pub images: Vec<(Vec<Gt>, Vec<Det>)>,
}

pub fn oracle_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let lo = |c: f64, s: f64| c - s / 2.0;
    let hi = |c: f64, s: f64| c + s / 2.0;
    let ix = (hi(a[0], a[2]).min(hi(b[0], b[2])) - lo(a[0], a[2]).max(lo(b[0], b[2]))).max(0.0);
    let iy = (hi(a[1], a[3]).min(hi(b[1], b[3])) - lo(a[1], a[3]).max(lo(b[1], b[3]))).max(0.0);
    let inter = ix * iy;
    let area = |x: [f64; 4]| (hi(x[0], x[2]) - lo(x[0], x[2])) * (hi(x[1], x[3]) - lo(x[1], x[3]));
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// `(confidence, image, index, is_tp)` for every detection of `class` with
/// confidence `>= conf_min`, plus the ground-truth count.
fn labelled(inst: &Instance, class: usize, thr: f64, conf_min: f64) -> (Vec<(f64, usize, usize, bool)>, usize) {
    let mut out = Vec::new();
    let mut n_gt = 0;
    for (img, (gts, dets)) in inst.images.iter().enumerate() {
        let gts: Vec<&Gt> = gts.iter().filter(|g| g.class == class).collect();
        n_gt += gts.len();
        let mut mine: Vec<(usize, &Det)> = dets
            .iter()
            .enumerate()
            .filter(|(_, d)| d.class == class && d.conf >= conf_min)
            .collect();
        // Insertion sort keeps equal confidences in file order.
        for i in 1..mine.len() {
            let mut j = i;
            while j > 0 && mine[j - 1].1.conf < mine[j].1.conf {
                mine.swap(j - 1, j);
                j -= 1;
            }
        }
        let mut used = vec![false; gts.len()];
        for (idx, d) in mine {
            let mut best = -1.0;
            let mut pick = None;
            for (g, gt) in gts.iter().enumerate() {
                if used[g] {
                    continue;
                }
                let v = oracle_iou(d.b, gt.b);
                if v > best {
                    best = v;
                    pick = Some(g);
                }
            }
            let tp = match pick {
                Some(g) if best >= thr => {
                    used[g] = true;
                    true
                }
                _ => false,
            };
            out.push((d.conf, img, idx, tp));
        }
    }
    (out, n_gt)
}

/// 101-point interpolated AP by enumerating every cut of the ranked list.
pub fn oracle_ap(inst: &Instance, class: usize, thr: f64) -> Option<f64> {
    let (mut dets, n_gt) = labelled(inst, class, thr, 0.0);
    if n_gt == 0 {
        return None;
    }
    dets.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut cuts: Vec<(usize, usize)> = Vec::new(); // (tp, k)
    for k in 1..=dets.len() {
        let tp = dets[..k].iter().filter(|d| d.3).count();
        cuts.push((tp, k));
    }
    let mut total = 0.0;
    for i in 0..=100usize {
        let mut best = 0.0f64;
        for &(tp, k) in &cuts {
            // recall tp / n_gt >= i / 100, compared exactly
            if tp * 100 >= i * n_gt {
                best = best.max(tp as f64 / k as f64);
            }
        }
        total += best;
    }
    Some(total / 101.0)
}

fn macro_mean(v: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = v.iter().flatten().copied().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

pub fn oracle_map(inst: &Instance, thr: f64) -> Option<f64> {
    let per: Vec<Option<f64>> = (0..inst.n_classes).map(|c| oracle_ap(inst, c, thr)).collect();
    macro_mean(&per)
}

pub fn oracle_map50_95(inst: &Instance) -> Option<f64> {
    let per: Vec<Option<f64>> = (0..inst.n_classes)
        .map(|c| {
            let aps: Vec<f64> = (0..10)
                .map(|i| oracle_ap(inst, c, (50 + 5 * i) as f64 / 100.0))
                .collect::<Option<_>>()?;
            Some(aps.iter().sum::<f64>() / 10.0)
        })
        .collect();
    macro_mean(&per)
}

/// Macro precision and recall over classes with ground truth at a fixed
/// confidence, and the F1 of those two.
pub fn oracle_prf(inst: &Instance, conf: f64, thr: f64) -> Option<(f64, f64, f64)> {
    let mut ps = Vec::new();
    let mut rs = Vec::new();
    for c in 0..inst.n_classes {
        let (dets, n_gt) = labelled(inst, c, thr, conf);
        if n_gt == 0 {
            continue;
        }
        let tp = dets.iter().filter(|d| d.3).count();
        ps.push(if dets.is_empty() { 0.0 } else { tp as f64 / dets.len() as f64 });
        rs.push(tp as f64 / n_gt as f64);
    }
    if ps.is_empty() {
        return None;
    }
    let p = ps.iter().sum::<f64>() / ps.len() as f64;
    let r = rs.iter().sum::<f64>() / rs.len() as f64;
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    Some((p, r, f))
}

/// The same instance as library records.
pub fn to_records(inst: &Instance) -> Vec<ImageRecord<f64>> {
    inst.images
        .iter()
        .enumerate()
        .map(|(i, (gts, dets))| {
            let g = gts
                .iter()
                .map(|g| NormBox::new(g.class, g.b[0], g.b[1], g.b[2], g.b[3]).unwrap())
                .collect();
            let d = dets
                .iter()
                .map(|d| {
                    let b = NormBox::new(d.class, d.b[0], d.b[1], d.b[2], d.b[3]).unwrap();
                    Prediction::new(b, d.conf).unwrap()
                })
                .collect();
            ImageRecord::new(format!("im{i}"), g, d)
        })
        .collect()
}

/// Random box inside the unit square.
pub fn random_box(rng: &mut driftbench::rng::DetRng) -> [f64; 4] {
    let w = 0.05 + 0.45 * rng.uniform();
    let h = 0.05 + 0.45 * rng.uniform();
    let cx = w / 2.0 + (1.0 - w) * rng.uniform();
    let cy = h / 2.0 + (1.0 - h) * rng.uniform();
    [cx, cy, w, h]
}

/// Shifted and rescaled copy of `b`, kept inside the unit square, so IoUs
/// with the original spread over `(0, 1]`.
pub fn jittered(rng: &mut driftbench::rng::DetRng, b: [f64; 4]) -> [f64; 4] {
    let s = 0.25 * rng.uniform();
    let w = (b[2] * (1.0 + s * (rng.uniform() - 0.5))).clamp(0.02, 0.9);
    let h = (b[3] * (1.0 + s * (rng.uniform() - 0.5))).clamp(0.02, 0.9);
    let cx = (b[0] + s * b[2] * (rng.uniform() - 0.5)).clamp(w / 2.0, 1.0 - w / 2.0);
    let cy = (b[1] + s * b[3] * (rng.uniform() - 0.5)).clamp(h / 2.0, 1.0 - h / 2.0);
    [cx, cy, w, h]
}

/// Random micro-instance: up to 5 images, up to 6 boxes each side, up to 3
/// classes. Confidences sit on a 0.05 grid so ties occur.
pub fn random_instance(rng: &mut driftbench::rng::DetRng) -> Instance {
    let n_classes = 1 + rng.bounded(3) as usize;
    let n_images = 1 + rng.bounded(5) as usize;
    let mut images = Vec::new();
    for _ in 0..n_images {
        let n_gt = rng.bounded(7) as usize;
        let gts: Vec<Gt> = (0..n_gt)
            .map(|_| Gt {
                class: rng.bounded(n_classes as u64) as usize,
                b: random_box(rng),
            })
            .collect();
        let n_det = rng.bounded(7) as usize;
        let dets = (0..n_det)
            .map(|_| {
                let from_gt = !gts.is_empty() && rng.uniform() < 0.7;
                let (class, b) = if from_gt {
                    let g = &gts[rng.bounded(gts.len() as u64) as usize];
                    let class = if rng.uniform() < 0.85 { g.class } else { rng.bounded(n_classes as u64) as usize };
                    (class, jittered(rng, g.b))
                } else {
                    (rng.bounded(n_classes as u64) as usize, random_box(rng))
                };
                Det {
                    class,
                    b,
                    conf: rng.bounded(21) as f64 / 20.0,
                }
            })
            .collect();
        images.push((gts, dets));
    }
    Instance { n_classes, images }
}
