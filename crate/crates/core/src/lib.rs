//! Toolkit for studying how distribution drift affects object detectors.
//!
//! The crate is organized around the workflow of a drift study:
//!
//! * [`annotation`] reads and writes YOLO-format labels, predictions and
//!   dataset manifests, and splits datasets deterministically.
//! * [`forge`] applies seeded augmentation and drift transforms to images
//!   while keeping bounding boxes consistent with the pixels.
//! * [`gauge`] summarizes datasets as channel histograms and scores the drift
//!   between two of them (PSI, Jensen-Shannon, Wasserstein-1).
//! * [`eval`] computes precision, recall, F1, mAP50 and mAP50-95 plus a
//!   confusion matrix from ground truth and predictions.
//! * [`bench`] ties the pieces into file-level commands and ships a toy
//!   template-matching detector for end-to-end demos.
//!
//! Geometry and metric code is generic over the floating-point type through
//! [`Scalar`]; the aliases below fix it to `f64` (or `f32`) for everyday use.

pub mod annotation;
pub mod bench;
pub mod error;
pub mod eval;
pub mod forge;
pub mod gauge;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Normalized, class-tagged box in double precision.
pub type LabelBox = annotation::NormBox<f64>;
/// Normalized, class-tagged box in single precision.
pub type LabelBox32 = annotation::NormBox<f32>;
/// Scored detection in double precision.
pub type ScoredBox = annotation::Prediction<f64>;
/// Scored detection in single precision.
pub type ScoredBox32 = annotation::Prediction<f32>;
/// Ground truth and predictions of one image in double precision.
pub type ImageEval = eval::ImageRecord<f64>;
/// Five-metric report in double precision.
pub type Metrics = eval::MetricsReport<f64>;
/// Five-metric report in single precision.
pub type Metrics32 = eval::MetricsReport<f32>;
/// Drift scores in double precision.
pub type DriftScores = gauge::DriftReport<f64>;
