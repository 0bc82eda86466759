use std::fmt::Write as _;
use std::path::Path;

use super::evaluate::read_metrics_file;
use super::output::{prepare_out, OutputSet};
use crate::error::{Error, Result};
use crate::eval::MetricSet;

pub const METRIC_NAMES: [&str; 5] = ["Precision", "Recall", "F1-Score", "mAP50", "mAP50-95"];
pub const COMPARE_TABLE: &str = "compare.txt";
pub const COMPARE_CSV: &str = "compare.csv";

/// Two evaluation runs side by side, five metric rows, rendered to four
/// decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    labels: [String; 2],
    values: [[f64; 2]; 5],
}

fn as_row(m: &MetricSet<f64>) -> [f64; 5] {
    [m.precision, m.recall, m.f1, m.map50, m.map50_95]
}

/// Value in units of 1e-4; cells and deltas are rendered from these so the
/// delta always equals the difference of the printed cells.
fn units(v: f64) -> i64 {
    (v * 1e4).round() as i64
}

fn render_units(u: i64, signed: bool) -> String {
    let sign = match (u < 0, signed && u > 0) {
        (true, _) => "-",
        (false, true) => "+",
        _ => "",
    };
    let a = u.unsigned_abs();
    format!("{sign}{}.{:04}", a / 10_000, a % 10_000)
}

impl ComparisonTable {
    pub fn new(labels: [&str; 2], a: &MetricSet<f64>, b: &MetricSet<f64>) -> Result<Self> {
        let (ra, rb) = (as_row(a), as_row(b));
        let mut values = [[0.0; 2]; 5];
        for i in 0..5 {
            for v in [ra[i], rb[i]] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!("{} {v} outside [0, 1]", METRIC_NAMES[i])));
                }
            }
            values[i] = [ra[i], rb[i]];
        }
        Ok(ComparisonTable {
            labels: labels.map(String::from),
            values,
        })
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row][col]
    }

    /// Cell as printed, e.g. `0.9899`.
    pub fn cell(&self, row: usize, col: usize) -> String {
        render_units(units(self.values[row][col]), false)
    }

    /// Second column minus first, as printed (`+0.0123`, `-0.4072`, `0.0000`).
    pub fn delta(&self, row: usize) -> String {
        let [a, b] = self.values[row];
        render_units(units(b) - units(a), true)
    }

    pub fn to_text(&self) -> String {
        let w1 = self.labels[0].len().max(8);
        let w2 = self.labels[1].len().max(8);
        let mut out = format!(
            "{:<10} {:>w1$} {:>w2$} {:>8}\n",
            "Criteria", self.labels[0], self.labels[1], "Delta"
        );
        for (i, name) in METRIC_NAMES.iter().enumerate() {
            writeln!(
                out,
                "{name:<10} {:>w1$} {:>w2$} {:>8}",
                self.cell(i, 0),
                self.cell(i, 1),
                self.delta(i)
            )
            .expect("String write");
        }
        out
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        w.write_record(["criteria", &self.labels[0], &self.labels[1], "delta"])
            .map_err(csv_err)?;
        for (i, name) in METRIC_NAMES.iter().enumerate() {
            w.write_record([name.to_string(), self.cell(i, 0), self.cell(i, 1), self.delta(i)])
                .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))
    }
}

/// Compares two `metrics.csv` files; writes `compare.txt` and `compare.csv`
/// when `out` is given.
pub fn cmd_compare(a: &Path, b: &Path, labels: [&str; 2], out: Option<&Path>) -> Result<ComparisonTable> {
    let table = ComparisonTable::new(labels, &read_metrics_file(a)?, &read_metrics_file(b)?)?;
    if let Some(out) = out {
        let mut files = OutputSet::default();
        files.bytes(COMPARE_TABLE, table.to_text());
        files.bytes(COMPARE_CSV, table.to_csv()?);
        prepare_out(out, &[COMPARE_TABLE, COMPARE_CSV], false, true)?;
        files.commit(out)?;
    }
    Ok(table)
}
