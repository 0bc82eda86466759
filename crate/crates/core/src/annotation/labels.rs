use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Slack allowed when checking that a box stays inside the unit canvas.
pub const EDGE_TOLERANCE: f64 = 1e-6;

/// Ordered class names; a class id is the position in the list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    names: Vec<String>,
}

impl ClassTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::invalid("class table is empty"));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::invalid(format!("class {i} has an empty name")));
            }
            if name.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!(
                    "class name {name:?} contains whitespace"
                )));
            }
            if names[..i].contains(name) {
                return Err(Error::invalid(format!("duplicate class name {name:?}")));
            }
        }
        Ok(ClassTable { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Parses a class list: one name per line, blank lines and `#` comments
    /// skipped.
    pub fn parse_list(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    /// Inverse of [`ClassTable::parse_list`].
    pub fn list_text(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(name);
            out.push('\n');
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Class-tagged box in normalized center form (`cx cy w h`, all relative to
/// the image size).
///
/// Construction guarantees `0 <= cx, cy <= 1`, `0 < w, h <= 1` and that the
/// box lies within the unit canvas up to [`EDGE_TOLERANCE`].
///
/// The center is stored as an offset from the canvas midpoint, so reflections
/// and quarter turns are sign flips and swaps that round-trip bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBox<T> {
    class_id: usize,
    dx: T,
    dy: T,
    w: T,
    h: T,
}

impl<T: Scalar> NormBox<T> {
    /// Strict constructor: rejects boxes that leave the canvas.
    pub fn new(class_id: usize, cx: T, cy: T, w: T, h: T) -> Result<Self> {
        check_ranges(cx, cy, w, h)?;
        let half = T::lit(0.5);
        Self::from_offsets(class_id, cx - half, cy - half, w, h)
    }

    /// Builds a box from its center offset relative to the canvas midpoint.
    pub(crate) fn from_offsets(class_id: usize, dx: T, dy: T, w: T, h: T) -> Result<Self> {
        let half = T::lit(0.5);
        let limit = half + T::lit(EDGE_TOLERANCE);
        let extent = |v: T| v.is_finite() && v > T::zero() && v <= T::one();
        if !(dx.is_finite() && dy.is_finite() && extent(w) && extent(h)) {
            return Err(Error::invalid(format!(
                "degenerate box offset ({dx}, {dy}) size ({w}, {h})"
            )));
        }
        if dx.abs() + w * half > limit || dy.abs() + h * half > limit || dx.abs() > half || dy.abs() > half {
            return Err(Error::invalid(format!(
                "box ({}, {}, {w}, {h}) extends beyond the image",
                half + dx,
                half + dy
            )));
        }
        Ok(NormBox {
            class_id,
            dx,
            dy,
            w,
            h,
        })
    }

    /// Like [`NormBox::new`] but clips a box that overhangs the canvas edge.
    /// Boxes already inside the canvas are returned unchanged.
    pub fn clamped(class_id: usize, cx: T, cy: T, w: T, h: T) -> Result<Self> {
        check_ranges(cx, cy, w, h)?;
        let half = T::lit(0.5);
        let (mut cx, mut w) = (cx, w);
        let (mut cy, mut h) = (cy, h);
        let (x0, x1) = (cx - w * half, cx + w * half);
        if x0 < T::zero() || x1 > T::one() {
            let (a, b) = (x0.max(T::zero()), x1.min(T::one()));
            cx = (a + b) * half;
            w = b - a;
        }
        let (y0, y1) = (cy - h * half, cy + h * half);
        if y0 < T::zero() || y1 > T::one() {
            let (a, b) = (y0.max(T::zero()), y1.min(T::one()));
            cy = (a + b) * half;
            h = b - a;
        }
        Self::new(class_id, cx, cy, w, h)
    }

    /// Builds a box from normalized corners `x0 < x1`, `y0 < y1`.
    pub fn from_corners(class_id: usize, x0: T, y0: T, x1: T, y1: T) -> Result<Self> {
        let half = T::lit(0.5);
        Self::new(
            class_id,
            (x0 + x1) * half,
            (y0 + y1) * half,
            x1 - x0,
            y1 - y0,
        )
    }

    pub fn class_id(&self) -> usize {
        self.class_id
    }

    pub fn cx(&self) -> T {
        T::lit(0.5) + self.dx
    }

    pub fn cy(&self) -> T {
        T::lit(0.5) + self.dy
    }

    pub fn w(&self) -> T {
        self.w
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// Center relative to the canvas midpoint, `(cx - 0.5, cy - 0.5)`.
    pub fn center_offset(&self) -> (T, T) {
        (self.dx, self.dy)
    }

    /// `(x0, y0, x1, y1)` in normalized units.
    pub fn corners(&self) -> (T, T, T, T) {
        let half = T::lit(0.5);
        (
            self.cx() - self.w * half,
            self.cy() - self.h * half,
            self.cx() + self.w * half,
            self.cy() + self.h * half,
        )
    }

    pub fn area(&self) -> T {
        self.w * self.h
    }

    pub fn with_class(mut self, class_id: usize) -> Self {
        self.class_id = class_id;
        self
    }

    /// Mirrors the box about the vertical center line (`cx -> 1 - cx`).
    pub fn mirrored_h(self) -> Self {
        NormBox {
            dx: -self.dx,
            ..self
        }
    }

    /// Counter-clockwise quarter turn about the canvas center on a square
    /// canvas: `(x, y) -> (y, 1 - x)`.
    pub(crate) fn quarter_turn_ccw(self) -> Self {
        NormBox {
            class_id: self.class_id,
            dx: self.dy,
            dy: -self.dx,
            w: self.h,
            h: self.w,
        }
    }

    /// Half turn about the canvas center: `(x, y) -> (1 - x, 1 - y)`.
    pub(crate) fn half_turn(self) -> Self {
        NormBox {
            dx: -self.dx,
            dy: -self.dy,
            ..self
        }
    }
}

fn check_ranges<T: Scalar>(cx: T, cy: T, w: T, h: T) -> Result<()> {
    let unit = |v: T| v.is_finite() && v >= T::zero() && v <= T::one();
    let extent = |v: T| v.is_finite() && v > T::zero() && v <= T::one();
    if !unit(cx) || !unit(cy) {
        return Err(Error::invalid(format!(
            "center ({cx}, {cy}) outside [0, 1]"
        )));
    }
    if !extent(w) || !extent(h) {
        return Err(Error::invalid(format!("size ({w}, {h}) outside (0, 1]")));
    }
    Ok(())
}

/// A detector output: a box plus a confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    bbox: NormBox<T>,
    confidence: T,
}

impl<T: Scalar> Prediction<T> {
    pub fn new(bbox: NormBox<T>, confidence: T) -> Result<Self> {
        if !(confidence.is_finite() && confidence >= T::zero() && confidence <= T::one()) {
            return Err(Error::invalid(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(Prediction { bbox, confidence })
    }

    pub fn bbox(&self) -> &NormBox<T> {
        &self.bbox
    }

    pub fn confidence(&self) -> T {
        self.confidence
    }

    pub fn class_id(&self) -> usize {
        self.bbox.class_id
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: Scalar>(field: &str, what: &str, line: usize) -> Result<T> {
    field
        .parse::<T>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("malformed {what} {field:?}")))
}

fn parse_box<T: Scalar>(fields: &[&str], classes: &ClassTable, line: usize) -> Result<NormBox<T>> {
    let class_id: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(line, format!("malformed class id {:?}", fields[0])))?;
    if class_id >= classes.len() {
        return Err(parse_err(
            line,
            format!(
                "class id {class_id} out of range for {} classes",
                classes.len()
            ),
        ));
    }
    let cx = parse_num(fields[1], "cx", line)?;
    let cy = parse_num(fields[2], "cy", line)?;
    let w = parse_num(fields[3], "w", line)?;
    let h = parse_num(fields[4], "h", line)?;
    NormBox::clamped(class_id, cx, cy, w, h).map_err(|e| match e {
        Error::Invalid(m) => parse_err(line, m),
        other => other,
    })
}

/// Records of a label-style file as `(line number, fields)`, skipping blank
/// lines. Line numbers are 1-based.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, f)| !f.is_empty())
}

/// Parses a YOLO label file (`<class> <cx> <cy> <w> <h>` per line).
///
/// Boxes that overhang the image edge are clipped to it; coordinates outside
/// `[0, 1]` are errors.
pub fn parse_label_file<T: Scalar>(text: &str, classes: &ClassTable) -> Result<Vec<NormBox<T>>> {
    records(text)
        .map(|(line, fields)| {
            if fields.len() != 5 {
                return Err(parse_err(
                    line,
                    format!("expected 5 fields, found {}", fields.len()),
                ));
            }
            parse_box(&fields, classes, line)
        })
        .collect()
}

/// Parses a prediction file: the label format plus a sixth confidence field.
pub fn parse_prediction_file<T: Scalar>(
    text: &str,
    classes: &ClassTable,
) -> Result<Vec<Prediction<T>>> {
    records(text)
        .map(|(line, fields)| {
            match fields.len() {
                6 => {}
                5 => return Err(parse_err(line, "missing confidence")),
                n => return Err(parse_err(line, format!("expected 6 fields, found {n}"))),
            }
            let bbox = parse_box(&fields, classes, line)?;
            let conf: T = parse_num(fields[5], "confidence", line)?;
            Prediction::new(bbox, conf).map_err(|_| {
                parse_err(line, format!("confidence {} outside [0, 1]", fields[5]))
            })
        })
        .collect()
}

pub fn write_label_file<T: Scalar>(boxes: &[NormBox<T>]) -> String {
    let mut out = String::new();
    for b in boxes {
        writeln!(
            out,
            "{} {:.6} {:.6} {:.6} {:.6}",
            b.class_id,
            b.cx(),
            b.cy(),
            b.w,
            b.h
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn write_prediction_file<T: Scalar>(preds: &[Prediction<T>]) -> String {
    let mut out = String::new();
    for p in preds {
        let b = &p.bbox;
        writeln!(
            out,
            "{} {:.6} {:.6} {:.6} {:.6} {:.6}",
            b.class_id,
            b.cx(),
            b.cy(),
            b.w,
            b.h,
            p.confidence
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize) -> ClassTable {
        ClassTable::new((0..n).map(|i| format!("c{i}"))).unwrap()
    }

    #[test]
    fn parses_single_record() {
        let boxes: Vec<NormBox<f64>> = parse_label_file("0 0.5 0.5 0.2 0.1\n", &table(8)).unwrap();
        assert_eq!(
            boxes,
            vec![NormBox::new(0, 0.5, 0.5, 0.2, 0.1).unwrap()]
        );
    }

    #[test]
    fn empty_file_is_empty_list() {
        let boxes: Vec<NormBox<f64>> = parse_label_file("", &table(1)).unwrap();
        assert!(boxes.is_empty());
    }

    #[test]
    fn class_out_of_range_reports_line() {
        let err = parse_label_file::<f64>("7 0.5 0.5 0.2 0.1", &table(7)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "0 0.5 0.5 0.2 0.1\n0 0.5 abc 0.2 0.1\n";
        let err = parse_label_file::<f64>(text, &table(1)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_label_file::<f64>("0 0.5 0.5 0.2\n", &table(1)).unwrap_err();
        assert!(err.to_string().contains("expected 5 fields"));
        let err = parse_label_file::<f64>("0 1.5 0.5 0.2 0.1\n", &table(1)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_label_file::<f64>("0 0.5 0.5 0.0 0.1\n", &table(1)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn overhanging_box_is_clipped() {
        let boxes: Vec<NormBox<f64>> = parse_label_file("0 0.05 0.5 0.2 0.2", &table(1)).unwrap();
        let (x0, _, x1, _) = boxes[0].corners();
        assert_eq!(x0, 0.0);
        assert!((x1 - 0.15).abs() < 1e-12);
    }

    #[test]
    fn strict_constructor_rejects_overhang() {
        assert!(NormBox::new(0, 0.05, 0.5, 0.2, 0.2).is_err());
        assert!(NormBox::new(0, 0.1, 0.5, 0.2, 0.2).is_ok());
    }

    #[test]
    fn writes_six_decimals() {
        let b = NormBox::new(2, 0.25, 0.75, 0.1, 0.2).unwrap();
        assert_eq!(
            write_label_file(&[b]),
            "2 0.250000 0.750000 0.100000 0.200000\n"
        );
        assert_eq!(write_label_file::<f64>(&[]), "");
    }

    #[test]
    fn parses_predictions() {
        let p: Vec<Prediction<f64>> =
            parse_prediction_file("1 0.5 0.5 0.1 0.1 0.90\n", &table(2)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].class_id(), 1);
        assert_eq!(p[0].confidence(), 0.90);
    }

    #[test]
    fn prediction_errors() {
        let err = parse_prediction_file::<f64>("1 0.5 0.5 0.1 0.1 1.5", &table(2)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_prediction_file::<f64>("1 0.5 0.5 0.1 0.1", &table(2)).unwrap_err();
        assert!(err.to_string().contains("missing confidence"), "{err}");
    }

    #[test]
    fn works_in_single_precision() {
        let boxes: Vec<NormBox<f32>> = parse_label_file("3 0.25 0.5 0.5 0.25\n", &table(4)).unwrap();
        assert_eq!(write_label_file(&boxes), "3 0.250000 0.500000 0.500000 0.250000\n");
    }

    #[test]
    fn class_table_validation() {
        assert!(ClassTable::new(Vec::<String>::new()).is_err());
        assert!(ClassTable::new(["a", "a"]).is_err());
        assert!(ClassTable::new(["a b"]).is_err());
        assert!(ClassTable::new([""]).is_err());
        let t = ClassTable::new(["stop", "limit_30"]).unwrap();
        assert_eq!(t.id_of("limit_30"), Some(1));
        assert_eq!(t.name(0), Some("stop"));
    }

    #[test]
    fn class_list_round_trip() {
        let t = ClassTable::parse_list("# signs\nstop\n\n  yield \n").unwrap();
        assert_eq!(t.names(), ["stop", "yield"]);
        assert_eq!(ClassTable::parse_list(&t.list_text()).unwrap(), t);
        assert!(ClassTable::parse_list("# none\n").is_err());
    }
}
