use super::raster::{to_u8, RasterImage};
use super::TransformResult;
use crate::annotation::NormBox;
use crate::scalar::Scalar;

/// Default minimum fraction of a rotated box hull that must stay on the
/// canvas for the box to be kept.
pub const DEFAULT_MIN_VISIBLE: f64 = 0.3;

/// Default fill for pixels rotated in from outside the source.
pub const DEFAULT_FILL: [u8; 3] = [128, 128, 128];

/// Horizontal flip of pixels and boxes. An involution.
pub fn mirror_h<T: Scalar>(image: &RasterImage, boxes: &[NormBox<T>]) -> TransformResult<T> {
    let (w, h) = (image.width(), image.height());
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            out.put(w - 1 - x, y, image.get(x, y));
        }
    }
    TransformResult {
        image: out,
        boxes: boxes.iter().map(|b| b.mirrored_h()).collect(),
        dropped: 0,
    }
}

/// Number of counter-clockwise quarter turns when `angle_deg` is an exact
/// multiple of 90 degrees.
fn quarter_turns(angle_deg: f64) -> Option<i32> {
    match angle_deg {
        a if a == 0.0 => Some(0),
        a if a == 90.0 => Some(1),
        a if a == 180.0 || a == -180.0 => Some(2),
        a if a == -90.0 || a == 270.0 => Some(3),
        _ => None,
    }
}

/// `(cos, sin)` of the angle, exact for quarter turns.
fn cos_sin(angle_deg: f64) -> (f64, f64) {
    match quarter_turns(angle_deg) {
        Some(0) => (1.0, 0.0),
        Some(1) => (0.0, 1.0),
        Some(2) => (-1.0, 0.0),
        Some(3) => (0.0, -1.0),
        _ => {
            let r = angle_deg.to_radians();
            (r.cos(), r.sin())
        }
    }
}

/// Rotates the image about its center, counter-clockwise (as displayed) for
/// positive angles, keeping the canvas size.
///
/// Pixels are resampled bilinearly; taps that fall outside the source take
/// `fill`. Each box is mapped by rotating its four corners, taking the
/// axis-aligned hull and clipping it to the canvas. A box whose clipped area
/// is below `min_visible` of its hull area is dropped.
pub fn rotate<T: Scalar>(
    image: &RasterImage,
    boxes: &[NormBox<T>],
    angle_deg: f64,
    fill: [u8; 3],
    min_visible: f64,
) -> TransformResult<T> {
    let (w, h) = (image.width(), image.height());
    let (cos, sin) = cos_sin(angle_deg);
    let (half_w, half_h) = (f64::from(w) / 2.0, f64::from(h) / 2.0);
    let mut out = image.clone();
    let fill_f = fill.map(f64::from);
    let tap = |xi: i64, yi: i64| -> [f64; 3] {
        if xi < 0 || yi < 0 || xi >= i64::from(w) || yi >= i64::from(h) {
            fill_f
        } else {
            image.get(xi as u32, yi as u32).map(f64::from)
        }
    };

    for y in 0..h {
        for x in 0..w {
            // output pixel center relative to the canvas center
            let dx = f64::from(x) + 0.5 - half_w;
            let dy = f64::from(y) + 0.5 - half_h;
            // inverse rotation into the source, back to index coordinates
            let sx = dx * cos - dy * sin + half_w - 0.5;
            let sy = dx * sin + dy * cos + half_h - 0.5;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (xi, yi) = (x0 as i64, y0 as i64);
            let p00 = tap(xi, yi);
            let p10 = tap(xi + 1, yi);
            let p01 = tap(xi, yi + 1);
            let p11 = tap(xi + 1, yi + 1);
            let mut rgb = [0u8; 3];
            for c in 0..3 {
                let top = p00[c] * (1.0 - fx) + p10[c] * fx;
                let bottom = p01[c] * (1.0 - fx) + p11[c] * fx;
                rgb[c] = to_u8(top * (1.0 - fy) + bottom * fy);
            }
            out.put(x, y, rgb);
        }
    }

    let aspect = f64::from(h) / f64::from(w);
    let mut kept = Vec::with_capacity(boxes.len());
    let mut dropped = 0;
    for b in boxes {
        match rotate_box(b, angle_deg, aspect, min_visible) {
            Some(r) => kept.push(r),
            None => dropped += 1,
        }
    }
    TransformResult {
        image: out,
        boxes: kept,
        dropped,
    }
}

/// Maps a box through a rotation about the canvas center. `aspect` is
/// `height / width`.
fn rotate_box<T: Scalar>(
    b: &NormBox<T>,
    angle_deg: f64,
    aspect: f64,
    min_visible: f64,
) -> Option<NormBox<T>> {
    // Half turns (any canvas) and quarter turns (square canvas) keep the box
    // on the canvas and permute its corners, so the hull is known in closed
    // form.
    match (quarter_turns(angle_deg), aspect == 1.0) {
        (Some(0), _) => return Some(*b),
        (Some(2), _) => return Some(b.half_turn()),
        (Some(1), true) => return Some(b.quarter_turn_ccw()),
        (Some(3), true) => return Some(b.half_turn().quarter_turn_ccw()),
        _ => {}
    }
    let half = T::lit(0.5);
    let (cos, sin) = cos_sin(angle_deg);
    let (cos, sin, aspect) = (T::lit(cos), T::lit(sin), T::lit(aspect));
    // Corner offsets from the canvas center, with y scaled to width units so
    // the rotation is isotropic in pixels.
    let (dx, dy) = b.center_offset();
    let (hw, hh) = (b.w() * half, b.h() * half * aspect);
    let dy = dy * aspect;
    let (mut x0, mut y0) = (T::infinity(), T::infinity());
    let (mut x1, mut y1) = (T::neg_infinity(), T::neg_infinity());
    for (ox, oy) in [(-hw, -hh), (hw, -hh), (-hw, hh), (hw, hh)] {
        let (px, py) = (dx + ox, dy + oy);
        let rx = px * cos + py * sin;
        let ry = (-px * sin + py * cos) / aspect;
        x0 = x0.min(rx);
        x1 = x1.max(rx);
        y0 = y0.min(ry);
        y1 = y1.max(ry);
    }
    let hull_area = (x1 - x0) * (y1 - y0);
    let (vx0, vy0) = (x0.max(-half), y0.max(-half));
    let (vx1, vy1) = (x1.min(half), y1.min(half));
    if vx1 <= vx0 || vy1 <= vy0 {
        return None;
    }
    let visible = (vx1 - vx0) * (vy1 - vy0);
    if visible < T::lit(min_visible) * hull_area {
        return None;
    }
    NormBox::from_offsets(
        b.class_id(),
        (vx0 + vx1) * half,
        (vy0 + vy1) * half,
        vx1 - vx0,
        vy1 - vy0,
    )
    .ok()
}
