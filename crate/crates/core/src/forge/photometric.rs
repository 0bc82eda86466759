use super::raster::{to_u8, RasterImage};
use crate::rng::DetRng;

/// Airlight level fog blends toward, per channel.
pub const FOG_AIRLIGHT: f64 = 230.0;
/// Brightness of a fully opaque rain streak.
pub const RAIN_LEVEL: f64 = 235.0;
/// Blur applied after drawing rain streaks.
pub const RAIN_BLUR_SIGMA: f64 = 0.5;
/// Channel gain slope of the seasonal color-temperature shift.
pub const SEASONAL_SLOPE: f64 = 0.3;

/// Normalized 1-D Gaussian kernel of radius `ceil(3 sigma)`.
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable Gaussian blur with edge clamping. `sigma == 0` returns the
/// input unchanged.
pub fn blur(image: &RasterImage, sigma: f64) -> RasterImage {
    if sigma <= 0.0 {
        return image.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let (w, h) = (image.width() as i64, image.height() as i64);
    let src = image.pixels();
    let idx = |x: i64, y: i64| 3 * (y * w + x) as usize;

    let mut horizontal = vec![0.0f64; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, weight) in kernel.iter().enumerate() {
                let sx = (x + k as i64 - radius).clamp(0, w - 1);
                let i = idx(sx, y);
                for c in 0..3 {
                    acc[c] += weight * f64::from(src[i + c]);
                }
            }
            horizontal[idx(x, y)..idx(x, y) + 3].copy_from_slice(&acc);
        }
    }

    let mut out = image.clone();
    let dst = out.pixels_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, weight) in kernel.iter().enumerate() {
                let sy = (y + k as i64 - radius).clamp(0, h - 1);
                let i = idx(x, sy);
                for c in 0..3 {
                    acc[c] += weight * horizontal[i + c];
                }
            }
            let o = idx(x, y);
            for c in 0..3 {
                dst[o + c] = to_u8(acc[c]);
            }
        }
    }
    out
}

/// Elliptical highlight in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Glare {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
    /// Peak blend weight toward white, in `[0, 1]`.
    pub intensity: f64,
}

/// Gamma/gain exposure change, `v -> 255 * gain * (v / 255)^gamma`, with an
/// optional glare that blends toward white with a raised-cosine falloff from
/// the ellipse center to its rim.
pub fn illumination(image: &RasterImage, gamma: f64, gain: f64, glare: Option<Glare>) -> RasterImage {
    let lut: Vec<f64> = (0..256)
        .map(|v| 255.0 * gain * (f64::from(v) / 255.0).powf(gamma))
        .collect();
    let (w, h) = (image.width(), image.height());
    let mut out = image.clone();
    let dst = out.pixels_mut();
    for y in 0..h {
        for x in 0..w {
            let weight = glare.map_or(0.0, |g| {
                let nx = (f64::from(x) + 0.5) / f64::from(w);
                let ny = (f64::from(y) + 0.5) / f64::from(h);
                let d = (((nx - g.cx) / g.rx).powi(2) + ((ny - g.cy) / g.ry).powi(2)).sqrt();
                if d < 1.0 {
                    g.intensity * 0.5 * (1.0 + (std::f64::consts::PI * d).cos())
                } else {
                    0.0
                }
            });
            let o = 3 * (y as usize * w as usize + x as usize);
            for c in 0..3 {
                let v = lut[dst[o + c] as usize].clamp(0.0, 255.0);
                dst[o + c] = to_u8(v + weight * (255.0 - v));
            }
        }
    }
    out
}

/// Uniform-transmittance fog: `v -> (1 - density) v + density * 230`.
pub fn fog(image: &RasterImage, density: f64) -> RasterImage {
    let mut out = image.clone();
    for v in out.pixels_mut() {
        *v = to_u8((1.0 - density) * f64::from(*v) + density * FOG_AIRLIGHT);
    }
    out
}

/// Parameters of the rain-streak overlay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RainParams {
    pub streaks: u32,
    pub length_px: f64,
    /// Lean from vertical in degrees, positive toward +x.
    pub angle_deg: f64,
    pub alpha: f64,
}

/// Distance from `p` to the segment `a`-`b`.
fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * vx, a.1 + t * vy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Draws anti-aliased bright streaks at seeded positions, alpha-blends them
/// toward [`RAIN_LEVEL`] and softens the result with a 0.5 px blur.
///
/// Each streak consumes two uniforms for its start point, drawn from
/// `[0, W) x [0, H)` in pixel units. Coverage of a pixel is
/// `max(0, 1 - distance)` from its center to the nearest streak.
pub fn rain(image: &RasterImage, params: RainParams, seed: u64) -> RasterImage {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let mut coverage = vec![0.0f64; w * h];
    let mut rng = DetRng::new(seed);
    let theta = params.angle_deg.to_radians();
    let (dx, dy) = (params.length_px * theta.sin(), params.length_px * theta.cos());
    for _ in 0..params.streaks {
        let a = (rng.uniform() * w as f64, rng.uniform() * h as f64);
        let b = (a.0 + dx, a.1 + dy);
        let x_lo = (a.0.min(b.0) - 1.0).floor().max(0.0) as usize;
        let x_hi = ((a.0.max(b.0) + 1.0).ceil() as usize).min(w);
        let y_lo = (a.1.min(b.1) - 1.0).floor().max(0.0) as usize;
        let y_hi = ((a.1.max(b.1) + 1.0).ceil() as usize).min(h);
        for y in y_lo..y_hi {
            for x in x_lo..x_hi {
                let d = segment_distance((x as f64 + 0.5, y as f64 + 0.5), a, b);
                let cov = (1.0 - d).max(0.0);
                let cell = &mut coverage[y * w + x];
                *cell = cell.max(cov);
            }
        }
    }
    let mut streaked = image.clone();
    for (px, cov) in streaked.pixels_mut().chunks_exact_mut(3).zip(&coverage) {
        let k = params.alpha * cov;
        for v in px {
            let f = f64::from(*v);
            *v = to_u8(f + k * (RAIN_LEVEL - f));
        }
    }
    blur(&streaked, RAIN_BLUR_SIGMA)
}

/// Color-temperature shift: red gain `1 + 0.3 t`, blue gain `1 - 0.3 t`,
/// green untouched.
pub fn seasonal(image: &RasterImage, temp_shift: f64) -> RasterImage {
    let gains = [
        1.0 + SEASONAL_SLOPE * temp_shift,
        1.0,
        1.0 - SEASONAL_SLOPE * temp_shift,
    ];
    let mut out = image.clone();
    for px in out.pixels_mut().chunks_exact_mut(3) {
        for c in [0, 2] {
            px[c] = to_u8(f64::from(px[c]) * gains[c]);
        }
    }
    out
}

/// Camera drift: additive Gaussian noise (standard deviation in 8-bit
/// levels, one normal variate per channel sample in row-major order)
/// followed by a defocus blur.
pub fn sensor_noise(image: &RasterImage, noise_sigma: f64, defocus_sigma: f64, seed: u64) -> RasterImage {
    let mut out = image.clone();
    if noise_sigma > 0.0 {
        let mut rng = DetRng::new(seed);
        for v in out.pixels_mut() {
            *v = to_u8(f64::from(*v) + noise_sigma * rng.standard_normal());
        }
    }
    blur(&out, defocus_sigma)
}
