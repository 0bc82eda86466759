//! Dataset data model: YOLO labels, prediction files, manifests and splits.

mod labels;
mod manifest;
mod split;
mod stats;

pub use labels::{
    parse_label_file, parse_prediction_file, write_label_file, write_prediction_file, ClassTable,
    NormBox, Prediction, EDGE_TOLERANCE,
};
pub use manifest::{
    load_manifest, load_split, manifest_text, scan_split, DatasetManifest, LabeledImage, Sample,
    Split,
};
pub use split::{split_dataset, SplitAssignment};
pub use stats::{dataset_stats, DatasetStats, SplitStats};
