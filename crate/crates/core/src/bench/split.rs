use std::path::PathBuf;

use super::output::{file_name, prepare_out, read_text, OutputSet};
use crate::annotation::{load_split, manifest_text, split_dataset, ClassTable, Split, SplitAssignment};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SplitConfig {
    /// Flat dataset: `images/` and `labels/`.
    pub input: PathBuf,
    /// Class list; defaults to `<input>/classes.txt`.
    pub classes: Option<PathBuf>,
    pub out: PathBuf,
    pub ratios: [f64; 3],
    pub seed: u64,
    pub force: bool,
    /// Hard-link instead of copying.
    pub link: bool,
}

pub const SPLIT_AUDIT: &str = "split.txt";
pub const MANIFEST_NAME: &str = "data.yaml";
pub const CLASS_LIST: &str = "classes.txt";

/// Splits a flat dataset into `train/`, `val/` and `test/` trees under
/// `out`, plus `split.txt`, `classes.txt` and a `data.yaml` manifest.
pub fn cmd_split(cfg: &SplitConfig) -> Result<SplitAssignment> {
    let class_path = cfg.classes.clone().unwrap_or_else(|| cfg.input.join(CLASS_LIST));
    let classes = ClassTable::parse_list(&read_text(&class_path)?)?;
    if !cfg.input.join("images").is_dir() {
        return Err(Error::invalid(format!(
            "{} has no images/ directory",
            cfg.input.display()
        )));
    }
    // Parsing every label up front validates the dataset before any write.
    let items = load_split::<f64>(&cfg.input, &classes)?;
    let stems: Vec<String> = items.iter().map(|i| i.sample.stem.clone()).collect();
    let assignment = split_dataset(&stems, cfg.ratios, cfg.seed)?;

    let mut files = OutputSet::default();
    for split in Split::ALL {
        files.dir(format!("{}/images", split.name()));
        files.dir(format!("{}/labels", split.name()));
    }
    for item in &items {
        let split = assignment
            .split_of(&item.sample.stem)
            .expect("every stem is assigned");
        let mut place = |src: &std::path::Path, sub: &str| -> Result<()> {
            let rel = format!("{}/{sub}/{}", split.name(), file_name(src)?);
            if cfg.link {
                files.link(rel, src);
            } else {
                files.copy(rel, src);
            }
            Ok(())
        };
        place(&item.sample.image, "images")?;
        if let Some(label) = &item.sample.label {
            place(label, "labels")?;
        }
    }
    files.bytes(SPLIT_AUDIT, assignment.audit_text());
    files.bytes(CLASS_LIST, classes.list_text());
    files.bytes(MANIFEST_NAME, manifest_text(".", "train", "val", "test", &classes));

    let owned = ["train", "val", "test", SPLIT_AUDIT, CLASS_LIST, MANIFEST_NAME];
    prepare_out(&cfg.out, &owned, true, cfg.force)?;
    files.commit(&cfg.out)?;
    Ok(assignment)
}
