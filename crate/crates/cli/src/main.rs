use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use driftbench::annotation::{load_manifest, ClassTable, Split};
use driftbench::bench::{
    cmd_compare, cmd_drift, cmd_driftscore, cmd_eval, cmd_split, metrics_table, read_class_list,
    run_demo, DemoConfig, DriftConfig, EvalRunConfig, SplitConfig, CLASS_LIST,
};
use driftbench::eval::EvalConfig;
use driftbench::gauge::{DriftThresholds, DEFAULT_BINS};
use driftbench::{Error, Result};

#[derive(Parser)]
#[command(name = "driftbench", version, about = "Dataset drift and detection-metric toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a flat images/ + labels/ dataset into train/val/test.
    Split(SplitArgs),
    /// Apply a drift spec file to a dataset.
    Drift(DriftArgs),
    /// Evaluate predictions against ground truth.
    Eval(EvalArgs),
    /// Compare two metrics.csv files side by side.
    Compare(CompareArgs),
    /// Score pixel-distribution drift between two datasets.
    Driftscore(DriftscoreArgs),
    /// Run the synthetic clean-vs-drifted baseline demo.
    Demo(DemoArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Global seed.
    #[arg(long, env = "DRIFTBENCH_SEED", default_value_t = 0)]
    seed: u64,
}

/// A split directory given directly or through a manifest.
#[derive(Args)]
struct DatasetArgs {
    /// Dataset manifest (data.yaml).
    #[arg(long, conflicts_with = "input", requires = "split")]
    manifest: Option<PathBuf>,
    /// Split of the manifest to use.
    #[arg(long, value_parser = parse_split)]
    split: Option<Split>,
    /// Split-style directory with images/ and labels/.
    #[arg(long, required_unless_present = "manifest")]
    input: Option<PathBuf>,
    /// Class list, one name per line [default: <input>/classes.txt].
    #[arg(long, conflicts_with = "manifest")]
    classes: Option<PathBuf>,
}

impl DatasetArgs {
    fn resolve(&self) -> Result<(PathBuf, ClassTable)> {
        if let Some(m) = &self.manifest {
            let manifest = load_manifest(m)?;
            let split = self.split.expect("clap requires --split with --manifest");
            return Ok((manifest.split_dir(split).to_path_buf(), manifest.classes().clone()));
        }
        let input = self.input.clone().expect("clap requires --input without --manifest");
        let classes = self.classes.clone().unwrap_or_else(|| input.join(CLASS_LIST));
        Ok((input, read_class_list(&classes)?))
    }
}

#[derive(Args)]
struct SplitArgs {
    /// Flat dataset directory (images/ + labels/).
    #[arg(long)]
    input: PathBuf,
    /// Class list [default: <input>/classes.txt].
    #[arg(long)]
    classes: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Train, val and test ratios, summing to 1.
    #[arg(long, value_parser = parse_ratios, default_value = "0.8,0.2,0")]
    ratios: [f64; 3],
    #[command(flatten)]
    seed: SeedArg,
    /// Replace existing split outputs.
    #[arg(long)]
    force: bool,
    /// Hard-link files instead of copying them.
    #[arg(long)]
    link: bool,
}

#[derive(Args)]
struct DriftArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Drift spec file, one transform per line.
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Directory of <stem>.txt prediction files.
    #[arg(long)]
    preds: PathBuf,
    /// Confidence threshold for precision, recall and F1.
    #[arg(long, default_value_t = 0.2)]
    conf: f64,
    /// IoU threshold for matching.
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    /// Also report the confidence threshold with the best F1.
    #[arg(long)]
    sweep: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// First metrics.csv.
    a: PathBuf,
    /// Second metrics.csv.
    b: PathBuf,
    /// Column labels as `first,second`.
    #[arg(long, value_parser = parse_labels, default_value = "Validation,Test")]
    labels: (String, String),
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DriftscoreArgs {
    /// Reference split directory or cached summary file.
    a: PathBuf,
    /// Compared split directory or cached summary file.
    b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 0.25)]
    psi_threshold: f64,
    #[arg(long, default_value_t = 0.1)]
    jsd_threshold: f64,
    #[arg(long, default_value_t = 8.0)]
    w1_threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value_t = 12)]
    images_per_class: usize,
}

fn parse_ratios(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, c] = parts[..] else {
        return Err(format!("expected three comma-separated ratios, got {s:?}"));
    };
    let num = |v: &str| v.parse::<f64>().map_err(|_| format!("malformed ratio {v:?}"));
    Ok([num(a)?, num(b)?, num(c)?])
}

fn parse_labels(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains(',') => Ok((a.into(), b.into())),
        _ => Err(format!("expected two comma-separated labels, got {s:?}")),
    }
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    Split::parse(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Split(a) => {
            let asg = cmd_split(&SplitConfig {
                input: a.input,
                classes: a.classes,
                out: a.out.clone(),
                ratios: a.ratios,
                seed: a.seed.seed,
                force: a.force,
                link: a.link,
            })?;
            println!(
                "train {} val {} test {} -> {}",
                asg.train.len(),
                asg.val.len(),
                asg.test.len(),
                a.out.display()
            );
        }
        Command::Drift(a) => {
            let (input, classes) = a.data.resolve()?;
            let o = cmd_drift(&DriftConfig {
                input,
                classes,
                spec: a.spec,
                seed: a.seed.seed,
                out: a.out.clone(),
            })?;
            println!(
                "{} images, {} boxes dropped, spec sha256 {} -> {}",
                o.images,
                o.dropped_boxes,
                o.spec_sha256,
                a.out.display()
            );
        }
        Command::Eval(a) => {
            let (split_dir, classes) = a.data.resolve()?;
            let eval = EvalConfig {
                conf_threshold: a.conf,
                iou_threshold: a.iou,
                ..EvalConfig::default()
            };
            let run = cmd_eval(&EvalRunConfig {
                split_dir,
                classes: classes.clone(),
                preds: a.preds,
                eval,
                sweep: a.sweep,
                out: a.out,
            })?;
            print!("{}", metrics_table(&run.report, &classes));
            if let Some(s) = run.sweep {
                println!(
                    "best F1 {:.4} at confidence {:.4} (P {:.4} R {:.4})",
                    s.f1, s.conf_threshold, s.precision, s.recall
                );
            }
        }
        Command::Compare(a) => {
            let table = cmd_compare(&a.a, &a.b, [&a.labels.0, &a.labels.1], a.out.as_deref())?;
            print!("{}", table.to_text());
        }
        Command::Driftscore(a) => {
            let thresholds = DriftThresholds {
                psi: a.psi_threshold,
                jsd: a.jsd_threshold,
                w1: a.w1_threshold,
            };
            let report = cmd_driftscore(&a.a, &a.b, a.bins, thresholds, a.out.as_deref())?;
            print!("{}", report.to_table());
        }
        Command::Demo(a) => {
            let o = run_demo(&DemoConfig {
                out: a.out.clone(),
                seed: a.seed.seed,
                images_per_class: a.images_per_class,
            })?;
            print!("{}", o.table.to_text());
            let (c, d) = (o.clean.report.overall.map50, o.drifted.report.overall.map50);
            println!(
                "mAP50 clean {c:.4} vs drifted {d:.4}: {}",
                if c > d { "drift degrades the baseline" } else { "no degradation" }
            );
            println!("outputs in {}", a.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("driftbench: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_usage() {
        2
    } else {
        1
    }
}
