use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Written last by every command; its absence marks an interrupted run.
pub const DONE_MARKER: &str = "DONE";

/// Files computed in memory and flushed in one writer phase.
#[derive(Debug, Default)]
pub(crate) struct OutputSet {
    files: Vec<(PathBuf, FileBody)>,
}

#[derive(Debug)]
enum FileBody {
    Bytes(Vec<u8>),
    CopyOf(PathBuf),
    LinkTo(PathBuf),
    Dir,
}

impl OutputSet {
    pub(crate) fn bytes(&mut self, rel: impl Into<PathBuf>, body: impl Into<Vec<u8>>) {
        self.files.push((rel.into(), FileBody::Bytes(body.into())));
    }

    pub(crate) fn copy(&mut self, rel: impl Into<PathBuf>, from: &Path) {
        self.files.push((rel.into(), FileBody::CopyOf(from.to_path_buf())));
    }

    pub(crate) fn link(&mut self, rel: impl Into<PathBuf>, from: &Path) {
        self.files.push((rel.into(), FileBody::LinkTo(from.to_path_buf())));
    }

    pub(crate) fn dir(&mut self, rel: impl Into<PathBuf>) {
        self.files.push((rel.into(), FileBody::Dir));
    }

    /// Writes every file under `out`, then the `DONE` marker.
    pub(crate) fn commit(self, out: &Path) -> Result<()> {
        for (rel, body) in self.files {
            let path = out.join(rel);
            if let FileBody::Dir = body {
                fs::create_dir_all(&path).map_err(|e| Error::io(&path, e))?;
                continue;
            }
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            match body {
                FileBody::Bytes(b) => fs::write(&path, b).map(|_| ()),
                FileBody::CopyOf(src) => fs::copy(&src, &path).map(|_| ()),
                FileBody::LinkTo(src) => fs::hard_link(&src, &path),
                FileBody::Dir => unreachable!("handled above"),
            }
            .map_err(|e| Error::io(&path, e))?;
        }
        fs::write(out.join(DONE_MARKER), b"").map_err(|e| Error::io(out.join(DONE_MARKER), e))
    }
}

/// Creates `out` and clears the entries a command owns.
///
/// With `exclusive`, pre-existing owned entries are an error unless `force`
/// is set.
pub(crate) fn prepare_out(out: &Path, owned: &[&str], exclusive: bool, force: bool) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let present: Vec<PathBuf> = owned
        .iter()
        .chain([&DONE_MARKER])
        .map(|name| out.join(name))
        .filter(|p| p.exists())
        .collect();
    if exclusive && !force {
        if let Some(p) = present.first() {
            return Err(Error::invalid(format!(
                "{} already exists (pass --force to replace it)",
                p.display()
            )));
        }
    }
    for p in present {
        let res = if p.is_dir() {
            fs::remove_dir_all(&p)
        } else {
            fs::remove_file(&p)
        };
        res.map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// File name of `path` as UTF-8.
pub(crate) fn file_name(path: &Path) -> Result<&str> {
    path.file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::invalid(format!("{}: not a UTF-8 file name", path.display())))
}
