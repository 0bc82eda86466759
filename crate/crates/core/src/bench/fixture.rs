use std::fs;
use std::path::Path;

use crate::annotation::{write_label_file, ClassTable, NormBox};
use crate::error::{Error, Result};
use crate::forge::RasterImage;
use crate::rng::DetRng;

/// Class names of the synthetic sign fixture, in id order.
pub const FIXTURE_CLASSES: [&str; 4] = ["stop", "yield", "mandatory", "restricted"];

const SIGN_COLORS: [[u8; 3]; 4] = [[200, 30, 30], [225, 195, 40], [30, 60, 200], [150, 40, 170]];

#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub images_per_class: usize,
    /// Side of the square images in pixels.
    pub size: u32,
    pub seed: u64,
    /// Chance that an image carries a second sign of another class.
    pub second_object: f64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            images_per_class: 12,
            size: 64,
            seed: 7,
            second_object: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixtureImage {
    pub stem: String,
    pub image: RasterImage,
    pub boxes: Vec<NormBox<f64>>,
}

pub fn fixture_classes() -> ClassTable {
    ClassTable::new(FIXTURE_CLASSES).expect("fixture names are valid")
}

fn jitter(rng: &mut DetRng, base: u8, spread: i32) -> u8 {
    let d = rng.bounded((2 * spread + 1) as u64) as i32 - spread;
    (i32::from(base) + d).clamp(0, 255) as u8
}

/// Asphalt-like noise with a lighter band, so histograms are not degenerate.
fn background(size: u32, rng: &mut DetRng) -> RasterImage {
    let band = rng.bounded(u64::from(size)) as u32;
    let mut img = RasterImage::filled(size, size, [0, 0, 0]).expect("positive size");
    for y in 0..size {
        for x in 0..size {
            let base = if y.abs_diff(band) < size / 8 { 140 } else { 100 };
            let g = jitter(rng, base, 14);
            img.put(x, y, [g, jitter(rng, g, 4), jitter(rng, g.saturating_add(6), 4)]);
        }
    }
    img
}

/// Whether pixel `(px, py)` (relative to the sign's top-left corner) lies in
/// the shape of `class` drawn in an `s`-pixel square.
fn inside(class: usize, px: u32, py: u32, s: u32) -> bool {
    let (x, y, s) = (px as f64 + 0.5, py as f64 + 0.5, s as f64);
    let (u, v) = (x / s - 0.5, y / s - 0.5);
    match class {
        0 => u * u + v * v <= 0.25,
        1 => y <= s * (1.0 - (2.0 * u).abs()) && y >= 0.0,
        2 => u.abs() <= 0.5 && v.abs() <= 0.5,
        _ => u.abs() + v.abs() <= 0.5,
    }
}

fn draw_sign(img: &mut RasterImage, rng: &mut DetRng, class: usize, x0: u32, y0: u32, s: u32) -> Option<NormBox<f64>> {
    let color = SIGN_COLORS[class];
    let (mut lo, mut hi) = ((u32::MAX, u32::MAX), (0, 0));
    for py in 0..s {
        for px in 0..s {
            if !inside(class, px, py, s) {
                continue;
            }
            let (x, y) = (x0 + px, y0 + py);
            let c = color.map(|v| jitter(rng, v, 10));
            img.put(x, y, c);
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x + 1), hi.1.max(y + 1));
        }
    }
    let size = f64::from(img.width());
    NormBox::from_corners(
        class,
        f64::from(lo.0) / size,
        f64::from(lo.1) / size,
        f64::from(hi.0) / size,
        f64::from(hi.1) / size,
    )
    .ok()
}

fn overlaps(a: (u32, u32, u32), b: (u32, u32, u32)) -> bool {
    let gap = 2;
    a.0 < b.0 + b.2 + gap && b.0 < a.0 + a.2 + gap && a.1 < b.1 + b.2 + gap && b.1 < a.1 + a.2 + gap
}

/// Generates `images_per_class * 4` images of colored sign shapes on a
/// noisy background. Image `i` always carries a sign of class `i % 4`.
pub fn generate_fixture(cfg: &FixtureConfig) -> Result<Vec<FixtureImage>> {
    if cfg.size < 32 {
        return Err(Error::invalid("fixture images must be at least 32 pixels"));
    }
    let mut rng = DetRng::new(cfg.seed);
    let n = cfg.images_per_class * FIXTURE_CLASSES.len();
    let (min_s, max_s) = (cfg.size / 5, cfg.size / 3);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut img = background(cfg.size, &mut rng);
        let mut classes = vec![i % FIXTURE_CLASSES.len()];
        if rng.uniform() < cfg.second_object {
            let other = (classes[0] + 1 + rng.bounded(3) as usize) % FIXTURE_CLASSES.len();
            classes.push(other);
        }
        let mut placed: Vec<(u32, u32, u32)> = Vec::new();
        let mut boxes = Vec::new();
        for class in classes {
            for _ in 0..50 {
                let s = min_s + rng.bounded(u64::from(max_s - min_s + 1)) as u32;
                let x = rng.bounded(u64::from(cfg.size - s + 1)) as u32;
                let y = rng.bounded(u64::from(cfg.size - s + 1)) as u32;
                if placed.iter().any(|&p| overlaps(p, (x, y, s))) {
                    continue;
                }
                placed.push((x, y, s));
                boxes.extend(draw_sign(&mut img, &mut rng, class, x, y, s));
                break;
            }
        }
        out.push(FixtureImage {
            stem: format!("img_{i:04}"),
            image: img,
            boxes,
        });
    }
    Ok(out)
}

/// Writes a flat dataset: `images/<stem>.png`, `labels/<stem>.txt` and
/// `classes.txt`.
pub fn write_fixture(dir: &Path, images: &[FixtureImage], classes: &ClassTable) -> Result<()> {
    for sub in ["images", "labels"] {
        let d = dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    for f in images {
        f.image.save(&dir.join("images").join(format!("{}.png", f.stem)))?;
        let label = dir.join("labels").join(format!("{}.txt", f.stem));
        fs::write(&label, write_label_file(&f.boxes)).map_err(|e| Error::io(&label, e))?;
    }
    let list = dir.join("classes.txt");
    fs::write(&list, classes.list_text()).map_err(|e| Error::io(&list, e))
}
