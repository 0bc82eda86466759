use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::output::{prepare_out, OutputSet};
use crate::annotation::{load_split, parse_prediction_file, ClassTable, Prediction};
use crate::error::{Error, Result};
use crate::eval::{
    class_pr_curve, confusion_matrix, evaluate, max_f1_sweep, ConfusionMatrix, EvalConfig,
    ImageRecord, MetricSet, MetricsReport, SweepPoint,
};

#[derive(Debug, Clone)]
pub struct EvalRunConfig {
    /// Split-style directory with `images/` and `labels/`.
    pub split_dir: PathBuf,
    pub classes: ClassTable,
    /// One `<stem>.txt` prediction file per image; missing files mean no
    /// detections.
    pub preds: PathBuf,
    pub eval: EvalConfig<f64>,
    /// Also search for the confidence threshold with the best F1.
    pub sweep: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct EvalRun {
    pub report: MetricsReport<f64>,
    pub confusion: ConfusionMatrix,
    pub sweep: Option<SweepPoint<f64>>,
}

pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_TABLE: &str = "metrics.txt";
pub const CONFUSION_CSV: &str = "confusion.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const PR_DIR: &str = "pr";
/// Row label of the macro-averaged metrics in `metrics.csv`.
pub const OVERALL_ROW: &str = "all";

/// Reads a predictions directory into per-stem lists. Files for stems not in
/// `stems` are rejected.
pub fn load_predictions(
    dir: &Path,
    stems: &[&str],
    classes: &ClassTable,
) -> Result<BTreeMap<String, Vec<Prediction<f64>>>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::invalid(format!("{}: bad file name", path.display())))?
            .to_string();
        if !stems.contains(&stem.as_str()) {
            return Err(Error::invalid(format!(
                "{}: no image with stem {stem:?} in the evaluated split",
                path.display()
            )));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let preds = parse_prediction_file(&text, classes).map_err(|e| match e {
            Error::Parse { line, message } => Error::ParseFile {
                path: path.clone(),
                line,
                message,
            },
            other => other,
        })?;
        out.insert(stem, preds);
    }
    Ok(out)
}

/// Ground truth and predictions of a split, in stem order.
pub fn eval_records(split_dir: &Path, classes: &ClassTable, preds: &Path) -> Result<Vec<ImageRecord<f64>>> {
    let items = load_split::<f64>(split_dir, classes)?;
    if items.is_empty() {
        return Err(Error::invalid(format!("{} has no images", split_dir.display())));
    }
    let stems: Vec<&str> = items.iter().map(|i| i.sample.stem.as_str()).collect();
    let mut by_stem = load_predictions(preds, &stems, classes)?;
    Ok(items
        .iter()
        .map(|i| {
            let p = by_stem.remove(&i.sample.stem).unwrap_or_default();
            ImageRecord::new(i.sample.stem.clone(), i.boxes.clone(), p)
        })
        .collect())
}

/// Evaluates predictions against a split and optionally writes
/// `metrics.csv`, `metrics.txt`, `confusion.csv`, `pr/<class>.csv` and
/// `sweep.csv`.
pub fn cmd_eval(cfg: &EvalRunConfig) -> Result<EvalRun> {
    cfg.eval.validate()?;
    let records = eval_records(&cfg.split_dir, &cfg.classes, &cfg.preds)?;
    let n = cfg.classes.len();
    let report = evaluate(&records, n, &cfg.eval)?;
    let confusion = confusion_matrix(&records, n, cfg.eval.conf_threshold, cfg.eval.iou_threshold)?;
    let sweep = if cfg.sweep {
        max_f1_sweep(&records, n, cfg.eval.iou_threshold)?
    } else {
        None
    };
    let run = EvalRun {
        report,
        confusion,
        sweep,
    };
    if let Some(out) = &cfg.out {
        let mut files = OutputSet::default();
        files.bytes(METRICS_CSV, metrics_csv(&run.report, &cfg.classes)?);
        files.bytes(METRICS_TABLE, metrics_table(&run.report, &cfg.classes));
        files.bytes(CONFUSION_CSV, confusion_csv(&run.confusion, &cfg.classes)?);
        files.dir(PR_DIR);
        for (c, name) in cfg.classes.names().iter().enumerate() {
            let curve = class_pr_curve(&records, c, cfg.eval.iou_threshold);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["confidence", "precision", "recall"]).map_err(csv_err)?;
            for p in curve {
                w.write_record([fmt6(p.confidence), fmt6(p.precision), fmt6(p.recall)])
                    .map_err(csv_err)?;
            }
            files.bytes(format!("{PR_DIR}/{name}.csv"), finish(w)?);
        }
        if let Some(s) = &run.sweep {
            let body = format!(
                "conf_threshold,precision,recall,f1\n{},{},{},{}\n",
                fmt6(s.conf_threshold),
                fmt6(s.precision),
                fmt6(s.recall),
                fmt6(s.f1)
            );
            files.bytes(SWEEP_CSV, body);
        }
        let owned = [METRICS_CSV, METRICS_TABLE, CONFUSION_CSV, PR_DIR, SWEEP_CSV];
        prepare_out(out, &owned, false, true)?;
        files.commit(out)?;
    }
    Ok(run)
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))
}

/// `class,n_gt,n_pred,tp,fp,fn,precision,recall,f1,map50,map50_95`, one row
/// per class (metric cells empty without ground truth) and a final `all`
/// row with the macro averages.
pub fn metrics_csv(report: &MetricsReport<f64>, classes: &ClassTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "class", "n_gt", "n_pred", "tp", "fp", "fn", "precision", "recall", "f1", "map50", "map50_95",
    ])
    .map_err(csv_err)?;
    let cells = |m: Option<&MetricSet<f64>>| -> [String; 5] {
        match m {
            Some(m) => [m.precision, m.recall, m.f1, m.map50, m.map50_95].map(fmt6),
            None => Default::default(),
        }
    };
    let (mut gt, mut pred, mut tp, mut fp, mut fn_) = (0, 0, 0, 0, 0);
    for c in &report.per_class {
        let name = classes.name(c.class_id).unwrap_or("?");
        let mut row = vec![
            name.to_string(),
            c.n_gt.to_string(),
            c.n_pred.to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_count.to_string(),
        ];
        row.extend(cells(c.metrics.as_ref()));
        w.write_record(&row).map_err(csv_err)?;
        gt += c.n_gt;
        pred += c.n_pred;
        tp += c.tp;
        fp += c.fp;
        fn_ += c.fn_count;
    }
    let mut row = vec![OVERALL_ROW.to_string()];
    row.extend([gt, pred, tp, fp, fn_].map(|v| v.to_string()));
    row.extend(cells(Some(&report.overall)));
    w.write_record(&row).map_err(csv_err)?;
    finish(w)
}

/// Reads the `all` row of a `metrics.csv`. Only the `class` column and the
/// five metric columns are required.
pub fn read_metrics_file(path: &Path) -> Result<MetricSet<f64>> {
    let bad = |msg: String| Error::invalid(format!("{}: {msg}", path.display()));
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| bad(format!("missing column {name}")))
    };
    let class_col = col("class")?;
    let cols = [col("precision")?, col("recall")?, col("f1")?, col("map50")?, col("map50_95")?];
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.get(class_col).map(str::trim) != Some(OVERALL_ROW) {
            continue;
        }
        let mut v = [0.0; 5];
        for (slot, &c) in v.iter_mut().zip(&cols) {
            let cell = rec.get(c).unwrap_or("").trim();
            *slot = cell
                .parse::<f64>()
                .map_err(|_| bad(format!("malformed metric {cell:?}")))?;
            if !(0.0..=1.0).contains(slot) {
                return Err(bad(format!("metric {cell} outside [0, 1]")));
            }
        }
        return Ok(MetricSet {
            precision: v[0],
            recall: v[1],
            f1: v[2],
            map50: v[3],
            map50_95: v[4],
        });
    }
    Err(bad(format!("no {OVERALL_ROW:?} row")))
}

pub fn metrics_table(report: &MetricsReport<f64>, classes: &ClassTable) -> String {
    let width = classes.names().iter().map(String::len).max().unwrap_or(0).max(5);
    let mut out = format!(
        "{:<width$} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
        "class", "gt", "pred", "precision", "recall", "f1", "mAP50", "mAP50-95"
    );
    let row = |out: &mut String, name: &str, gt: usize, pred: usize, m: Option<&MetricSet<f64>>| {
        let cells = match m {
            Some(m) => [m.precision, m.recall, m.f1, m.map50, m.map50_95].map(|v| format!("{v:.4}")),
            None => std::array::from_fn(|_| "-".to_string()),
        };
        writeln!(
            out,
            "{name:<width$} {gt:>6} {pred:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
            cells[0], cells[1], cells[2], cells[3], cells[4]
        )
        .expect("String write");
    };
    for c in &report.per_class {
        row(&mut out, classes.name(c.class_id).unwrap_or("?"), c.n_gt, c.n_pred, c.metrics.as_ref());
    }
    let gt = report.per_class.iter().map(|c| c.n_gt).sum();
    let pred = report.per_class.iter().map(|c| c.n_pred).sum();
    row(&mut out, OVERALL_ROW, gt, pred, Some(&report.overall));
    writeln!(out, "confidence threshold {}", report.conf_threshold).expect("String write");
    out
}

/// Rows are ground truth, columns predictions; `background` closes both.
pub fn confusion_csv(m: &ConfusionMatrix, classes: &ClassTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut labels: Vec<&str> = classes.names().iter().map(String::as_str).collect();
    labels.push("background");
    let mut header = vec!["gt\\pred"];
    header.extend(&labels);
    w.write_record(&header).map_err(csv_err)?;
    for (label, row) in labels.iter().zip(m.rows()) {
        let mut rec = vec![label.to_string()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}
