use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use driftbench::annotation::{load_manifest, parse_label_file, ClassTable, NormBox, Split};
use driftbench::bench::*;
use driftbench::eval::{iou, EvalConfig};
use driftbench::forge::RasterImage;
use driftbench::gauge::DriftThresholds;
use driftbench::Error;

fn classes() -> ClassTable {
    fixture_classes()
}

/// Small fixture written as a flat dataset; returns its directory.
fn fixture_dir(root: &Path, per_class: usize) -> PathBuf {
    let dir = root.join("flat");
    let imgs = generate_fixture(&FixtureConfig {
        images_per_class: per_class,
        ..Default::default()
    })
    .unwrap();
    write_fixture(&dir, &imgs, &classes()).unwrap();
    dir
}

/// Every file under `dir` with its bytes, keyed by relative path.
fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn count(dir: &Path) -> usize {
    fs::read_dir(dir).map(|d| d.count()).unwrap_or(0)
}

fn split_cfg(input: &Path, out: &Path, ratios: [f64; 3]) -> SplitConfig {
    SplitConfig {
        input: input.to_path_buf(),
        classes: None,
        out: out.to_path_buf(),
        ratios,
        seed: 11,
        force: false,
        link: false,
    }
}

#[test]
fn split_2017_images_into_1613_and_404() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = tmp.path().join("flat");
    fs::create_dir_all(flat.join("images")).unwrap();
    fs::create_dir_all(flat.join("labels")).unwrap();
    let px = RasterImage::filled(1, 1, [9, 9, 9]).unwrap().encode_for(Path::new("x.png")).unwrap();
    for i in 0..2017 {
        fs::write(flat.join(format!("images/s{i:04}.png")), &px).unwrap();
        fs::write(flat.join(format!("labels/s{i:04}.txt")), "0 0.5 0.5 1 1\n").unwrap();
    }
    fs::write(flat.join("classes.txt"), "sign\n").unwrap();
    let out = tmp.path().join("out");
    let a = cmd_split(&split_cfg(&flat, &out, [0.8, 0.2, 0.0])).unwrap();
    assert_eq!((a.train.len(), a.val.len(), a.test.len()), (1613, 404, 0));
    assert_eq!(count(&out.join("train/images")), 1613);
    assert_eq!(count(&out.join("train/labels")), 1613);
    assert_eq!(count(&out.join("val/images")), 404);
    assert_eq!(count(&out.join("test/images")), 0);
    assert!(out.join(DONE_MARKER).exists());
    let m = load_manifest(&out.join(MANIFEST_NAME)).unwrap();
    assert_eq!(m.split_dir(Split::Val), out.join("val"));

    let audit = fs::read_to_string(out.join(SPLIT_AUDIT)).unwrap();
    let err = cmd_split(&split_cfg(&flat, &out, [0.8, 0.2, 0.0])).unwrap_err();
    assert!(err.is_usage(), "{err}");
    let mut again = split_cfg(&flat, &out, [0.8, 0.2, 0.0]);
    again.force = true;
    cmd_split(&again).unwrap();
    assert_eq!(fs::read_to_string(out.join(SPLIT_AUDIT)).unwrap(), audit);
}

#[test]
fn split_validates_ratios_and_links() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = fixture_dir(tmp.path(), 2);
    let err = cmd_split(&split_cfg(&flat, &tmp.path().join("o"), [0.5, 0.2, 0.2])).unwrap_err();
    assert!(matches!(err, Error::Invalid(_)) && err.is_usage());
    assert!(!tmp.path().join("o").join(DONE_MARKER).exists());
    let mut cfg = split_cfg(&flat, &tmp.path().join("o"), [0.5, 0.25, 0.25]);
    cfg.link = true;
    let a = cmd_split(&cfg).unwrap();
    assert_eq!(a.train.len() + a.val.len() + a.test.len(), 8);
    let stem = &a.train[0];
    let copied = fs::read(tmp.path().join(format!("o/train/images/{stem}.png"))).unwrap();
    assert_eq!(copied, fs::read(flat.join(format!("images/{stem}.png"))).unwrap());
}

fn drift(input: &Path, out: &Path, spec: &str, seed: u64) -> DriftOutcome {
    let spec_path = out.with_extension("spec");
    fs::write(&spec_path, spec).unwrap();
    cmd_drift(&DriftConfig {
        input: input.to_path_buf(),
        classes: classes(),
        spec: spec_path,
        seed,
        out: out.to_path_buf(),
    })
    .unwrap()
}

#[test]
fn empty_spec_copies_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = fixture_dir(tmp.path(), 2);
    let out = tmp.path().join("d");
    let o = drift(&flat, &out, "# nothing\n\n", 5);
    assert_eq!(o.images, 8);
    let (src, dst) = (tree(&flat), tree(&out));
    for (rel, bytes) in &src {
        if rel.starts_with("images") || rel.starts_with("labels") {
            assert_eq!(&dst[rel], bytes, "{}", rel.display());
        }
    }
    let record = fs::read_to_string(out.join(DRIFT_RECORD)).unwrap();
    assert!(record.starts_with(&format!("spec_sha256 {}\nseed 5\n", o.spec_sha256)));
    assert_eq!(o.spec_sha256.len(), 64);
}

#[test]
fn mirror_spec_mirrors_every_label() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = fixture_dir(tmp.path(), 2);
    let out = tmp.path().join("d");
    drift(&flat, &out, "mirror_h\n", 0);
    for e in fs::read_dir(flat.join("labels")).unwrap() {
        let p = e.unwrap().path();
        let before: Vec<NormBox<f64>> = parse_label_file(&fs::read_to_string(&p).unwrap(), &classes()).unwrap();
        let after: Vec<NormBox<f64>> = parse_label_file(
            &fs::read_to_string(out.join("labels").join(p.file_name().unwrap())).unwrap(),
            &classes(),
        )
        .unwrap();
        assert_eq!(before.len(), after.len());
        for (b, a) in before.iter().zip(&after) {
            assert!((a.cx() - (1.0 - b.cx())).abs() < 1e-6);
            assert_eq!((a.cy(), a.class_id()), (b.cy(), b.class_id()));
        }
    }
}

#[test]
fn drift_is_deterministic_and_photometric_keeps_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = fixture_dir(tmp.path(), 2);
    let spec = "fog density=0.3\nrain count=15\nsensor_noise noise=3 defocus=0.5\n";
    drift(&flat, &tmp.path().join("a"), spec, 42);
    drift(&flat, &tmp.path().join("b"), spec, 42);
    let (a, b) = (tree(&tmp.path().join("a")), tree(&tmp.path().join("b")));
    assert_eq!(a, b);
    let src = tree(&flat);
    for (rel, bytes) in &src {
        if rel.starts_with("labels") {
            assert_eq!(&a[rel], bytes);
        }
        if rel.starts_with("images") {
            assert_ne!(&a[rel], bytes);
        }
    }
    drift(&flat, &tmp.path().join("c"), spec, 43);
    assert_ne!(tree(&tmp.path().join("c")), a);
}

#[test]
fn invalid_spec_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = fixture_dir(tmp.path(), 1);
    let spec = tmp.path().join("bad.spec");
    fs::write(&spec, "fog density=0.2\nwobble amount=3\n").unwrap();
    let err = cmd_drift(&DriftConfig {
        input: flat,
        classes: classes(),
        spec,
        seed: 0,
        out: tmp.path().join("d"),
    })
    .unwrap_err();
    assert!(matches!(err, Error::Spec { line: 2, .. }), "{err}");
    assert!(err.is_usage());
}

fn eval(split_dir: &Path, preds: &Path, out: Option<PathBuf>) -> EvalRun {
    cmd_eval(&EvalRunConfig {
        split_dir: split_dir.to_path_buf(),
        classes: classes(),
        preds: preds.to_path_buf(),
        eval: EvalConfig::default(),
        sweep: true,
        out,
    })
    .unwrap()
}

#[test]
fn self_predictions_score_one() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = fixture_dir(tmp.path(), 3);
    let preds = tmp.path().join("preds");
    fs::create_dir_all(&preds).unwrap();
    for e in fs::read_dir(flat.join("labels")).unwrap() {
        let p = e.unwrap().path();
        let body: String = fs::read_to_string(&p)
            .unwrap()
            .lines()
            .map(|l| format!("{l} 1.0\n"))
            .collect();
        fs::write(preds.join(p.file_name().unwrap()), body).unwrap();
    }
    let out = tmp.path().join("eval");
    let run = eval(&flat, &preds, Some(out.clone()));
    let m = run.report.overall;
    assert_eq!([m.precision, m.recall, m.f1, m.map50, m.map50_95], [1.0; 5]);
    let table = cmd_compare(&out.join(METRICS_CSV), &out.join(METRICS_CSV), ["a", "b"], None).unwrap();
    for i in 0..5 {
        assert_eq!(table.cell(i, 0), "1.0000");
        assert_eq!(table.delta(i), "0.0000");
    }
    for f in [METRICS_CSV, METRICS_TABLE, CONFUSION_CSV, SWEEP_CSV, DONE_MARKER] {
        assert!(out.join(f).exists(), "{f}");
    }
    for name in FIXTURE_CLASSES {
        assert!(out.join(PR_DIR).join(format!("{name}.csv")).exists());
    }
    let confusion = fs::read_to_string(out.join(CONFUSION_CSV)).unwrap();
    assert!(confusion.lines().last().unwrap().starts_with("background,0,0,0,0"));
}

#[test]
fn empty_predictions_score_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = fixture_dir(tmp.path(), 1);
    let preds = tmp.path().join("preds");
    fs::create_dir_all(&preds).unwrap();
    let m = eval(&flat, &preds, None).report.overall;
    assert_eq!([m.precision, m.recall, m.f1, m.map50, m.map50_95], [0.0; 5]);
    fs::write(preds.join("nope.txt"), "").unwrap();
    assert!(cmd_eval(&EvalRunConfig {
        split_dir: flat,
        classes: classes(),
        preds,
        eval: EvalConfig::default(),
        sweep: false,
        out: None,
    })
    .is_err());
}

fn metrics_file(dir: &Path, name: &str, v: [&str; 5]) -> PathBuf {
    let p = dir.join(name);
    fs::write(
        &p,
        format!("class,precision,recall,f1,map50,map50_95\nall,{},{},{},{},{}\n", v[0], v[1], v[2], v[3], v[4]),
    )
    .unwrap();
    p
}

#[test]
fn compare_renders_reference_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let val = metrics_file(tmp.path(), "val.csv", ["0.9899", "0.9920", "0.9909", "0.9891", "0.9126"]);
    let test = metrics_file(tmp.path(), "test.csv", ["0.5827", "0.5562", "0.5691", "0.3798", "0.4000"]);
    let out = tmp.path().join("cmp");
    let t = cmd_compare(&val, &test, ["Validation", "Test"], Some(&out)).unwrap();
    let text = fs::read_to_string(out.join(COMPARE_TABLE)).unwrap();
    assert_eq!(text, t.to_text());
    let expected = [
        ("Precision", "0.9899", "0.5827", "-0.4072"),
        ("Recall", "0.9920", "0.5562", "-0.4358"),
        ("F1-Score", "0.9909", "0.5691", "-0.4218"),
        ("mAP50", "0.9891", "0.3798", "-0.6093"),
        ("mAP50-95", "0.9126", "0.4000", "-0.5126"),
    ];
    let lines: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    for (row, (name, a, b, d)) in lines.iter().zip(expected) {
        assert_eq!(row, &vec![name, a, b, d]);
    }
    let csv = fs::read_to_string(out.join(COMPARE_CSV)).unwrap();
    assert!(csv.starts_with("criteria,Validation,Test,delta\nPrecision,0.9899,0.5827,-0.4072\n"));
}

#[test]
fn driftscore_self_fog_and_cache_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = fixture_dir(tmp.path(), 2);
    let th = DriftThresholds::default();
    let same = cmd_driftscore(&flat, &flat, 64, th, None).unwrap();
    assert!(same.aggregate.psi.abs() < 1e-12 && same.aggregate.jsd.abs() < 1e-12 && same.aggregate.w1.abs() < 1e-12);
    assert!(!same.flags.any());

    let foggy = tmp.path().join("fog");
    drift(&flat, &foggy, "fog density=0.8\n", 0);
    let out = tmp.path().join("score");
    let r = cmd_driftscore(&flat, &foggy, 64, th, Some(&out)).unwrap();
    assert!(r.flags.psi);
    let csv = fs::read_to_string(out.join(REPORT_CSV)).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("mean,psi,") && l.ends_with(",1")));

    // Cached summaries stand in for the directories; bin counts must agree.
    let cached = cmd_driftscore(&out.join(SUMMARY_A), &out.join(SUMMARY_B), 64, th, None).unwrap();
    assert_eq!(cached, r);
    let coarse = tmp.path().join("coarse");
    cmd_driftscore(&flat, &flat, 32, th, Some(&coarse)).unwrap();
    let err = cmd_driftscore(&out.join(SUMMARY_A), &coarse.join(SUMMARY_A), 64, th, None).unwrap_err();
    assert!(matches!(err, Error::BinMismatch(64, 32)));
}

fn fitted() -> (BaselineDetector, Vec<FixtureImage>) {
    let fx = generate_fixture(&FixtureConfig {
        images_per_class: 8,
        ..Default::default()
    })
    .unwrap();
    let train: Vec<_> = fx.iter().map(|f| (f.image.clone(), f.boxes.clone())).collect();
    (BaselineDetector::fit(&train, 4, BaselineConfig::default()).unwrap(), fx)
}

#[test]
fn baseline_finds_an_exact_template_copy() {
    let fx = generate_fixture(&FixtureConfig {
        images_per_class: 1,
        ..Default::default()
    })
    .unwrap();
    for f in &fx {
        // One training crop makes the template exactly that crop's histogram
        // and the unit-scale window exactly its size.
        let gt = f.boxes[0];
        let det = BaselineDetector::fit(&[(f.image.clone(), vec![gt])], 4, BaselineConfig::default()).unwrap();
        let (x0, y0, x1, y1) = gt.corners();
        let px = |v: f64| (v * 64.0).round() as u32;
        let crop = f.image.crop(px(x0), px(y0), px(x1) - px(x0), px(y1) - px(y0)).unwrap();
        // The window grid always contains the origin.
        let mut canvas = RasterImage::filled(64, 64, [100, 100, 100]).unwrap();
        for y in 0..crop.height() {
            for x in 0..crop.width() {
                canvas.put(x, y, crop.get(x, y));
            }
        }
        let truth = NormBox::from_corners(
            gt.class_id(),
            0.0,
            0.0,
            f64::from(crop.width()) / 64.0,
            f64::from(crop.height()) / 64.0,
        )
        .unwrap();
        let preds = det.detect(&canvas);
        let top = preds.first().expect("a detection");
        assert_eq!(top.class_id(), truth.class_id(), "{}", f.stem);
        assert!(iou(top.bbox(), &truth) > 0.5, "{}", f.stem);
    }
}

#[test]
fn baseline_blank_images_regression() {
    let (det, _) = fitted();
    // Measured once on this fixture: no window clears the background floor.
    for rgb in [[100, 100, 100], [0, 0, 0], [140, 140, 146], [255, 255, 255]] {
        let preds = det.detect(&RasterImage::filled(64, 64, rgb).unwrap());
        assert!(preds.len() <= BaselineConfig::default().top_k);
        assert!(preds.iter().all(|p| p.confidence() < 0.2));
        assert_eq!(preds.len(), 0, "{rgb:?}");
    }
}
