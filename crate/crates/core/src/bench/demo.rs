use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::baseline::{BaselineConfig, BaselineDetector};
use super::compare::{cmd_compare, ComparisonTable};
use super::drift::{cmd_drift, DriftConfig, DriftOutcome};
use super::evaluate::{cmd_eval, EvalRun, EvalRunConfig, METRICS_CSV};
use super::fixture::{fixture_classes, generate_fixture, write_fixture, FixtureConfig};
use super::output::{prepare_out, OutputSet};
use super::split::{cmd_split, SplitConfig};
use crate::annotation::{load_split, write_prediction_file, ClassTable};
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::forge::RasterImage;

/// Drift applied to the demo test split.
pub const DEMO_SPEC: &str = "fog density=0.6\nrotate angle=15\n";

#[derive(Debug, Clone)]
pub struct DemoConfig {
    pub out: PathBuf,
    pub seed: u64,
    pub images_per_class: usize,
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub clean: EvalRun,
    pub drifted: EvalRun,
    pub drift: DriftOutcome,
    pub table: ComparisonTable,
}

/// Runs the baseline detector over `split_dir` and writes one prediction
/// file per image into `out`.
fn predict_split(det: &BaselineDetector, split_dir: &Path, classes: &ClassTable, out: &Path) -> Result<()> {
    let items = load_split::<f64>(split_dir, classes)?;
    let preds: Vec<(String, String)> = items
        .par_iter()
        .map(|i| {
            let img = RasterImage::load(&i.sample.image)?;
            Ok((format!("{}.txt", i.sample.stem), write_prediction_file(&det.detect(&img))))
        })
        .collect::<Result<_>>()?;
    let mut files = OutputSet::default();
    for (name, body) in preds {
        files.bytes(name, body);
    }
    if out.exists() {
        fs::remove_dir_all(out).map_err(|e| Error::io(out, e))?;
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    files.commit(out)
}

/// End-to-end demo on a synthetic sign fixture: split it, fit the baseline
/// on the train half, and evaluate it on the clean test half and on a copy
/// drifted by [`DEMO_SPEC`].
///
/// Everything lands under `out`: `fixture/`, `split/`, `test_drifted/`,
/// `preds_clean/`, `preds_drifted/`, `eval_clean/`, `eval_drifted/` and
/// `compare/`.
pub fn run_demo(cfg: &DemoConfig) -> Result<DemoOutcome> {
    let out = &cfg.out;
    let owned = [
        "fixture", "split", "test_drifted", "preds_clean", "preds_drifted", "eval_clean",
        "eval_drifted", "compare", "drift_spec.txt",
    ];
    prepare_out(out, &owned, false, true)?;
    let classes = fixture_classes();
    let fixture = generate_fixture(&FixtureConfig {
        images_per_class: cfg.images_per_class,
        seed: cfg.seed,
        ..Default::default()
    })?;
    write_fixture(&out.join("fixture"), &fixture, &classes)?;
    cmd_split(&SplitConfig {
        input: out.join("fixture"),
        classes: None,
        out: out.join("split"),
        ratios: [0.5, 0.0, 0.5],
        seed: cfg.seed,
        force: true,
        link: false,
    })?;

    let train: Vec<_> = load_split::<f64>(&out.join("split/train"), &classes)?
        .into_par_iter()
        .map(|i| Ok((RasterImage::load(&i.sample.image)?, i.boxes)))
        .collect::<Result<_>>()?;
    let det = BaselineDetector::fit(&train, classes.len(), BaselineConfig::default())?;

    let spec_path = out.join("drift_spec.txt");
    fs::write(&spec_path, DEMO_SPEC).map_err(|e| Error::io(&spec_path, e))?;
    let drift = cmd_drift(&DriftConfig {
        input: out.join("split/test"),
        classes: classes.clone(),
        spec: spec_path,
        seed: cfg.seed,
        out: out.join("test_drifted"),
    })?;

    let mut runs = Vec::new();
    for (data, tag) in [(out.join("split/test"), "clean"), (out.join("test_drifted"), "drifted")] {
        let preds = out.join(format!("preds_{tag}"));
        predict_split(&det, &data, &classes, &preds)?;
        runs.push(cmd_eval(&EvalRunConfig {
            split_dir: data,
            classes: classes.clone(),
            preds,
            eval: EvalConfig::default(),
            sweep: false,
            out: Some(out.join(format!("eval_{tag}"))),
        })?);
    }
    let table = cmd_compare(
        &out.join("eval_clean").join(METRICS_CSV),
        &out.join("eval_drifted").join(METRICS_CSV),
        ["clean", "drifted"],
        Some(&out.join("compare")),
    )?;
    OutputSet::default().commit(out)?;
    let drifted = runs.pop().expect("two runs");
    let clean = runs.pop().expect("two runs");
    Ok(DemoOutcome {
        clean,
        drifted,
        drift,
        table,
    })
}
