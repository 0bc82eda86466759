use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use super::labels::{parse_label_file, ClassTable, NormBox};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Image extensions recognized when scanning a split directory.
const IMAGE_EXTENSIONS: &[&str] = &["png", "ppm"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Result<Split> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!(
                "unknown split {other:?} (expected train, val or test)"
            ))),
        }
    }
}

/// Dataset description loaded from a manifest file.
///
/// Each split directory holds `images/<stem>.<ext>` and optionally
/// `labels/<stem>.txt`; a missing label file means the image has no objects.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    root: PathBuf,
    splits: [PathBuf; 3],
    classes: ClassTable,
}

impl DatasetManifest {
    /// Assembles and validates a manifest from already-resolved directories.
    pub fn new(root: PathBuf, train: PathBuf, val: PathBuf, test: PathBuf, classes: ClassTable) -> Result<Self> {
        let manifest = DatasetManifest {
            root,
            splits: [train, val, test],
            classes,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn split_dir(&self, split: Split) -> &Path {
        &self.splits[split as usize]
    }

    pub fn classes(&self) -> &ClassTable {
        &self.classes
    }

    fn validate(&self) -> Result<()> {
        if !self.root.is_dir() {
            return Err(Error::Manifest(format!(
                "dataset root {} is not a directory",
                self.root.display()
            )));
        }
        let mut owner: HashMap<String, Split> = HashMap::new();
        for split in Split::ALL {
            let dir = self.split_dir(split);
            if !dir.is_dir() {
                return Err(Error::Manifest(format!(
                    "{} directory {} does not exist",
                    split.name(),
                    dir.display()
                )));
            }
            for sample in scan_split(dir)? {
                if let Some(prev) = owner.insert(sample.stem.clone(), split) {
                    return Err(Error::Manifest(format!(
                        "stem {:?} appears in both {} and {}",
                        sample.stem,
                        prev.name(),
                        split.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One image of a split and its (optional) label file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub stem: String,
    pub image: PathBuf,
    pub label: Option<PathBuf>,
}

/// An image with its parsed ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage<T> {
    pub sample: Sample,
    pub boxes: Vec<NormBox<T>>,
}

/// Lists the images of a split directory sorted by stem.
///
/// A missing `images/` directory is an empty split. Two images sharing a stem
/// are rejected because they would share one label file.
pub fn scan_split(dir: &Path) -> Result<Vec<Sample>> {
    let images_dir = dir.join("images");
    let labels_dir = dir.join("labels");
    if !images_dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut by_stem: BTreeMap<String, PathBuf> = BTreeMap::new();
    let entries = fs::read_dir(&images_dir).map_err(|e| Error::io(&images_dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&images_dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        let Some(ext) = ext else { continue };
        if !IMAGE_EXTENSIONS.contains(&ext.as_str()) || !path.is_file() {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some(prev) = by_stem.insert(stem.to_string(), path.clone()) {
            return Err(Error::Manifest(format!(
                "images {} and {} share the stem {stem:?}",
                prev.display(),
                path.display()
            )));
        }
    }
    Ok(by_stem
        .into_iter()
        .map(|(stem, image)| {
            let label = labels_dir.join(format!("{stem}.txt"));
            Sample {
                label: label.is_file().then_some(label),
                stem,
                image,
            }
        })
        .collect())
}

/// Scans a split and parses every label file.
pub fn load_split<T: Scalar>(dir: &Path, classes: &ClassTable) -> Result<Vec<LabeledImage<T>>> {
    scan_split(dir)?
        .into_iter()
        .map(|sample| {
            let boxes = match &sample.label {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                    parse_label_file(&text, classes).map_err(|e| match e {
                        Error::Parse { line, message } => Error::ParseFile {
                            path: path.clone(),
                            line,
                            message,
                        },
                        other => other,
                    })?
                }
                None => Vec::new(),
            };
            Ok(LabeledImage { sample, boxes })
        })
        .collect()
}

/// Reads a manifest file.
///
/// Grammar: `path`, `train`, `val` and `test` as `key: value` lines plus a
/// `names:` block of indented `- <name>` items. Lines starting with `#` are
/// comments. `path` is resolved against the manifest's directory when
/// relative; the split entries are resolved against `path`.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, base)
}

fn parse_manifest(text: &str, base: &Path) -> Result<DatasetManifest> {
    const KEYS: [&str; 5] = ["path", "train", "val", "test", "names"];
    let mut values: HashMap<&str, String> = HashMap::new();
    let mut names: Option<Vec<String>> = None;
    let mut in_names = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        if raw.trim_start().starts_with('#') || raw.trim().is_empty() {
            continue;
        }
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        if indented {
            let item = raw.trim();
            if !in_names {
                return Err(Error::Manifest(format!(
                    "line {lineno}: unexpected indented line"
                )));
            }
            let Some(name) = item.strip_prefix("- ").or_else(|| item.strip_prefix('-')) else {
                return Err(Error::Manifest(format!(
                    "line {lineno}: expected `- <name>` under names"
                )));
            };
            names
                .get_or_insert_with(Vec::new)
                .push(name.trim().to_string());
            continue;
        }
        in_names = false;
        let Some((key, value)) = raw.split_once(':') else {
            return Err(Error::Manifest(format!(
                "line {lineno}: expected `key: value`"
            )));
        };
        let key = key.trim_end();
        let value = value.trim();
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::Manifest(format!("line {lineno}: unknown key {key}")));
        };
        if values.contains_key(key) || (key == "names" && names.is_some()) {
            return Err(Error::Manifest(format!("duplicate key {key}")));
        }
        if key == "names" {
            if !value.is_empty() {
                return Err(Error::Manifest(format!(
                    "line {lineno}: names takes an indented list"
                )));
            }
            names = Some(Vec::new());
            in_names = true;
        } else {
            if value.is_empty() {
                return Err(Error::Manifest(format!("line {lineno}: empty value for {key}")));
            }
            values.insert(key, value.to_string());
        }
    }

    let mut take = |key: &str| {
        values
            .remove(key)
            .ok_or_else(|| Error::Manifest(format!("missing key {key}")))
    };
    let root = PathBuf::from(take("path")?);
    let train = take("train")?;
    let val = take("val")?;
    let test = take("test")?;
    let names = names.ok_or_else(|| Error::Manifest("missing key names".into()))?;
    if names.is_empty() {
        return Err(Error::Manifest("empty names list".into()));
    }
    let classes = ClassTable::new(names).map_err(|e| Error::Manifest(e.to_string()))?;
    let root = if root.is_absolute() { root } else { base.join(root) };
    DatasetManifest::new(
        root.clone(),
        root.join(train),
        root.join(val),
        root.join(test),
        classes,
    )
}

/// Renders a manifest in the grammar accepted by [`load_manifest`].
pub fn manifest_text(root: &str, train: &str, val: &str, test: &str, classes: &ClassTable) -> String {
    let mut out = format!("path: {root}\ntrain: {train}\nval: {val}\ntest: {test}\nnames:\n");
    for name in classes.names() {
        out.push_str("  - ");
        out.push_str(name);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(path: &Path) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, b"").unwrap();
    }

    fn layout(root: &Path) {
        for split in ["train", "val", "test"] {
            fs::create_dir_all(root.join(split).join("images")).unwrap();
        }
    }

    const EIGHT: &str = "path: .\ntrain: train\nval: val\ntest: test\nnames:\n  - round_30\n  - round_60\n  - round_90\n  - square_30\n  - square_60\n  - square_90\n  - stop\n  - yield\n";

    #[test]
    fn loads_eight_class_manifest() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path());
        fs::write(dir.path().join("data.yaml"), EIGHT).unwrap();
        let m = load_manifest(&dir.path().join("data.yaml")).unwrap();
        assert_eq!(m.classes().len(), 8);
        assert_eq!(m.split_dir(Split::Val), dir.path().join("./val"));
    }

    #[test]
    fn comments_are_ignored() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path());
        let text = format!("# dataset\n{EIGHT}# trailing\n");
        fs::write(dir.path().join("data.yaml"), text).unwrap();
        assert!(load_manifest(&dir.path().join("data.yaml")).is_ok());
    }

    #[test]
    fn missing_val_key() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path());
        let err = parse_manifest("path: .\ntrain: train\ntest: test\nnames:\n  - a\n", dir.path())
            .unwrap_err();
        assert_eq!(err.to_string(), "manifest: missing key val");
    }

    #[test]
    fn duplicate_and_empty_names() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path());
        let err = parse_manifest(
            "path: .\ntrain: train\ntrain: val\nval: val\ntest: test\nnames:\n  - a\n",
            dir.path(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate key train"), "{err}");
        let err = parse_manifest("path: .\ntrain: train\nval: val\ntest: test\nnames:\n", dir.path())
            .unwrap_err();
        assert!(err.to_string().contains("empty names list"), "{err}");
    }

    #[test]
    fn nonexistent_directory() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path());
        let err = parse_manifest(
            "path: .\ntrain: train\nval: nowhere\ntest: test\nnames:\n  - a\n",
            dir.path(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("does not exist"), "{err}");
    }

    #[test]
    fn stem_shared_across_splits_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path());
        touch(&dir.path().join("train/images/a.png"));
        touch(&dir.path().join("test/images/a.png"));
        let err = parse_manifest(
            "path: .\ntrain: train\nval: val\ntest: test\nnames:\n  - a\n",
            dir.path(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("appears in both train and test"), "{err}");
    }

    #[test]
    fn scan_pairs_labels_by_stem() {
        let dir = tempfile::tempdir().unwrap();
        touch(&dir.path().join("images/b.png"));
        touch(&dir.path().join("images/a.ppm"));
        touch(&dir.path().join("images/notes.md"));
        touch(&dir.path().join("labels/a.txt"));
        let samples = scan_split(dir.path()).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].stem, "a");
        assert!(samples[0].label.is_some());
        assert!(samples[1].label.is_none());
    }

    #[test]
    fn same_stem_two_extensions_rejected() {
        let dir = tempfile::tempdir().unwrap();
        touch(&dir.path().join("images/a.png"));
        touch(&dir.path().join("images/a.ppm"));
        assert!(scan_split(dir.path()).is_err());
    }

    #[test]
    fn manifest_text_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path());
        let classes = ClassTable::new(["x", "y"]).unwrap();
        let text = manifest_text(".", "train", "val", "test", &classes);
        let m = parse_manifest(&text, dir.path()).unwrap();
        assert_eq!(m.classes(), &classes);
    }
}
