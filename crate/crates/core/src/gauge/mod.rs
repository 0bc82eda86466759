//! Pixel-statistics drift between two image sets.
//!
//! Datasets are summarized as per-channel intensity histograms
//! ([`HistogramSummary`]); two summaries are compared with the population
//! stability index, Jensen-Shannon divergence and the 1-D Wasserstein
//! distance ([`drift_report`]).

mod divergence;
mod report;
mod summary;

pub use divergence::{js_divergence, psi, smooth, wasserstein1d, SMOOTHING_EPSILON};
pub use report::{drift_report, ChannelScores, DriftFlags, DriftReport, DriftThresholds, CHANNEL_NAMES};
pub use summary::{dataset_summary, split_summary, HistogramSummary, DEFAULT_BINS};
