//! File-level commands and the demo pipeline.
//!
//! Every command computes its outputs in memory and writes them in one final
//! phase ending with a `DONE` marker file, so an interrupted run is easy to
//! spot.

mod baseline;
mod compare;
mod demo;
mod drift;
mod driftscore;
mod evaluate;
mod fixture;
mod output;
mod split;

pub use baseline::{BaselineConfig, BaselineDetector};
pub use compare::{cmd_compare, ComparisonTable, COMPARE_CSV, COMPARE_TABLE, METRIC_NAMES};
pub use demo::{run_demo, DemoConfig, DemoOutcome, DEMO_SPEC};
pub use drift::{cmd_drift, read_class_list, DriftConfig, DriftOutcome, DRIFT_RECORD};
pub use driftscore::{cmd_driftscore, load_summary, REPORT_CSV, REPORT_TABLE, SUMMARY_A, SUMMARY_B};
pub use evaluate::{
    cmd_eval, confusion_csv, eval_records, load_predictions, metrics_csv, metrics_table,
    read_metrics_file, EvalRun, EvalRunConfig, CONFUSION_CSV, METRICS_CSV, METRICS_TABLE,
    OVERALL_ROW, PR_DIR, SWEEP_CSV,
};
pub use fixture::{fixture_classes, generate_fixture, write_fixture, FixtureConfig, FixtureImage, FIXTURE_CLASSES};
pub use output::DONE_MARKER;
pub use split::{cmd_split, SplitConfig, CLASS_LIST, MANIFEST_NAME, SPLIT_AUDIT};
