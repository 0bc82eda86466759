use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn driftbench(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_driftbench"));
    cmd.args(args).env_remove("DRIFTBENCH_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_2_and_io_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&driftbench(&["frobnicate"], &[])), 2);
    assert_eq!(code(&driftbench(&["split", "--out", "x", "--input", "y", "--ratios", "1,2"], &[])), 2);
    let missing = tmp.path().join("missing");
    let o = driftbench(&["split", "--input", s(&missing), "--out", s(&tmp.path().join("o"))], &[]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn demo_then_split_eval_compare_driftscore() {
    let tmp = tempfile::tempdir().unwrap();
    let demo = tmp.path().join("demo");
    let o = driftbench(&["demo", "--out", s(&demo), "--images-per-class", "6"], &[("DRIFTBENCH_SEED", "3")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("mAP50-95"));
    assert!(demo.join("DONE").exists());

    let flat = demo.join("fixture");
    let bad = driftbench(
        &["split", "--input", s(&flat), "--out", s(&tmp.path().join("bad")), "--ratios", "0.5,0.2,0.2"],
        &[],
    );
    assert_eq!(code(&bad), 2);

    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = driftbench(&["split", "--input", s(&flat), "--out", s(&a), "--ratios", "0.5,0.25,0.25"], &[("DRIFTBENCH_SEED", "9")]);
    assert_eq!(code(&o), 0);
    driftbench(&["split", "--input", s(&flat), "--out", s(&b), "--ratios", "0.5,0.25,0.25", "--seed", "9"], &[]);
    assert_eq!(fs::read(a.join("split.txt")).unwrap(), fs::read(b.join("split.txt")).unwrap());
    let again = driftbench(&["split", "--input", s(&flat), "--out", s(&a), "--ratios", "0.5,0.25,0.25"], &[]);
    assert_eq!(code(&again), 2);
    let forced = driftbench(&["split", "--input", s(&flat), "--out", s(&a), "--ratios", "0.5,0.25,0.25", "--force"], &[]);
    assert_eq!(code(&forced), 0);

    let eval_out = tmp.path().join("eval");
    let o = driftbench(
        &[
            "eval", "--manifest", s(&demo.join("split/data.yaml")), "--split", "test",
            "--preds", s(&demo.join("preds_clean")), "--out", s(&eval_out), "--sweep",
        ],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("best F1"));
    let clean_csv = demo.join("eval_clean/metrics.csv");
    assert_eq!(fs::read(eval_out.join("metrics.csv")).unwrap(), fs::read(&clean_csv).unwrap());

    let o = driftbench(&["compare", s(&clean_csv), s(&clean_csv), "--labels", "x,y"], &[]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with("0.0000")));

    let spec = tmp.path().join("fog.spec");
    fs::write(&spec, "fog density=0.8\n").unwrap();
    let fogged = tmp.path().join("fogged");
    let o = driftbench(
        &["drift", "--input", s(&demo.join("split/test")), "--classes", s(&demo.join("split/classes.txt")),
          "--spec", s(&spec), "--out", s(&fogged)],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = driftbench(&["driftscore", s(&demo.join("split/test")), s(&fogged)], &[]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("drift: yes"));

    fs::write(&spec, "fog density=2\n").unwrap();
    let o = driftbench(
        &["drift", "--manifest", s(&demo.join("split/data.yaml")), "--split", "test",
          "--spec", s(&spec), "--out", s(&tmp.path().join("f2"))],
        &[],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}
