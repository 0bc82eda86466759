use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::output::{file_name, prepare_out, read_text, OutputSet};
use super::split::CLASS_LIST;
use crate::annotation::{load_split, write_label_file, ClassTable};
use crate::error::{Error, Result};
use crate::forge::{apply_pipeline, parse_spec_file, RasterImage};

#[derive(Debug, Clone)]
pub struct DriftConfig {
    /// Split-style directory with `images/` and `labels/`.
    pub input: PathBuf,
    pub classes: ClassTable,
    pub spec: PathBuf,
    /// Seed for spec lines without their own `seed=`.
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriftOutcome {
    pub spec_sha256: String,
    pub images: usize,
    pub dropped_boxes: usize,
}

pub const DRIFT_RECORD: &str = "drift.txt";

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").expect("String write");
        s
    })
}

/// Applies a drift spec file to every image of `input`, writing
/// `images/`, `labels/`, `classes.txt` and the `drift.txt` record to `out`.
///
/// An empty spec copies images byte for byte; a spec without geometric
/// transforms copies label files byte for byte.
pub fn cmd_drift(cfg: &DriftConfig) -> Result<DriftOutcome> {
    if let (Ok(a), Ok(b)) = (cfg.input.canonicalize(), cfg.out.canonicalize()) {
        if a == b {
            return Err(Error::invalid("drift output directory must differ from the input"));
        }
    }
    let spec_bytes = fs::read(&cfg.spec).map_err(|e| Error::io(&cfg.spec, e))?;
    let spec_text = String::from_utf8(spec_bytes.clone())
        .map_err(|_| Error::invalid(format!("{}: spec file is not UTF-8", cfg.spec.display())))?;
    let specs = parse_spec_file(&spec_text, cfg.seed)?;
    let geometric = specs.iter().any(|s| s.kind().is_geometric());
    let items = load_split::<f64>(&cfg.input, &cfg.classes)?;
    if items.is_empty() {
        return Err(Error::invalid(format!("{} has no images", cfg.input.display())));
    }

    struct Done {
        image_rel: String,
        image: Option<Vec<u8>>,
        label: Option<(String, Option<String>)>,
        dropped: usize,
    }
    let results: Vec<Done> = items
        .par_iter()
        .map(|item| {
            let sample = &item.sample;
            let image_rel = format!("images/{}", file_name(&sample.image)?);
            let label_rel = match &sample.label {
                Some(p) => Some(format!("labels/{}", file_name(p)?)),
                None => None,
            };
            if specs.is_empty() {
                return Ok(Done {
                    image_rel,
                    image: None,
                    label: label_rel.map(|r| (r, None)),
                    dropped: 0,
                });
            }
            let raster = RasterImage::load(&sample.image)?;
            let result = apply_pipeline(&raster, &item.boxes, &specs, &sample.stem);
            let bytes = result.image.encode_for(&sample.image)?;
            let label = label_rel.map(|r| {
                let body = geometric.then(|| write_label_file(&result.boxes));
                (r, body)
            });
            Ok(Done {
                image_rel,
                image: Some(bytes),
                label,
                dropped: result.dropped,
            })
        })
        .collect::<Result<_>>()?;

    let mut files = OutputSet::default();
    files.dir("images");
    files.dir("labels");
    let mut dropped = 0;
    for (item, done) in items.iter().zip(results) {
        match done.image {
            Some(bytes) => files.bytes(done.image_rel, bytes),
            None => files.copy(done.image_rel, &item.sample.image),
        }
        if let (Some((rel, body)), Some(src)) = (done.label, &item.sample.label) {
            match body {
                Some(text) => files.bytes(rel, text),
                None => files.copy(rel, src),
            }
        }
        dropped += done.dropped;
    }
    let outcome = DriftOutcome {
        spec_sha256: hex(&Sha256::digest(&spec_bytes)),
        images: items.len(),
        dropped_boxes: dropped,
    };
    let mut record = format!(
        "spec_sha256 {}\nseed {}\nimages {}\ndropped_boxes {}\n",
        outcome.spec_sha256, cfg.seed, outcome.images, outcome.dropped_boxes
    );
    for spec in &specs {
        writeln!(record, "# {} seed={}", spec.op(), spec.seed()).expect("String write");
    }
    files.bytes(DRIFT_RECORD, record);
    files.bytes(CLASS_LIST, cfg.classes.list_text());

    prepare_out(&cfg.out, &["images", "labels", DRIFT_RECORD, CLASS_LIST], false, true)?;
    files.commit(&cfg.out)?;
    Ok(outcome)
}

/// Reads a class list file.
pub fn read_class_list(path: &std::path::Path) -> Result<ClassTable> {
    ClassTable::parse_list(&read_text(path)?)
}
