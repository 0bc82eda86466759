use std::path::Path;

use super::output::{prepare_out, read_text, OutputSet};
use crate::error::Result;
use crate::gauge::{drift_report, split_summary, DriftReport, DriftThresholds, HistogramSummary};

pub const REPORT_CSV: &str = "drift_report.csv";
pub const REPORT_TABLE: &str = "drift_report.txt";
pub const SUMMARY_A: &str = "summary_a.txt";
pub const SUMMARY_B: &str = "summary_b.txt";

/// A split directory is summarized with `bins` bins; a file is read as a
/// cached summary and keeps its own bin count.
pub fn load_summary(source: &Path, bins: usize) -> Result<HistogramSummary> {
    if source.is_dir() {
        split_summary(source, bins)
    } else {
        HistogramSummary::from_text(&read_text(source)?)
    }
}

/// Scores drift from `a` to `b`; writes the report and both summaries when
/// `out` is given.
pub fn cmd_driftscore(
    a: &Path,
    b: &Path,
    bins: usize,
    thresholds: DriftThresholds<f64>,
    out: Option<&Path>,
) -> Result<DriftReport<f64>> {
    let sa = load_summary(a, bins)?;
    let sb = load_summary(b, bins)?;
    let report = drift_report(&sa, &sb, thresholds)?;
    if let Some(out) = out {
        let mut files = OutputSet::default();
        files.bytes(REPORT_CSV, report.to_csv());
        files.bytes(REPORT_TABLE, report.to_table());
        files.bytes(SUMMARY_A, sa.to_text());
        files.bytes(SUMMARY_B, sb.to_text());
        prepare_out(out, &[REPORT_CSV, REPORT_TABLE, SUMMARY_A, SUMMARY_B], false, true)?;
        files.commit(out)?;
    }
    Ok(report)
}
