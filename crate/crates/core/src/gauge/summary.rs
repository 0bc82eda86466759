use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::annotation::scan_split;
use crate::error::{Error, Result};
use crate::forge::RasterImage;
use crate::scalar::Scalar;

pub const DEFAULT_BINS: usize = 64;

/// Pooled per-channel statistics of a set of images.
///
/// Raw integer counts and sums are kept so that merging summaries is exact
/// and order-independent; normalized views are computed on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramSummary {
    bins: usize,
    counts: [Vec<u64>; 3],
    sums: [u64; 3],
    sums_sq: [u64; 3],
    pixels: u64,
    images: usize,
}

impl HistogramSummary {
    fn empty(bins: usize) -> Result<Self> {
        if bins == 0 || bins > 256 {
            return Err(Error::invalid(format!("bin count {bins} outside 1..=256")));
        }
        Ok(HistogramSummary {
            bins,
            counts: [vec![0; bins], vec![0; bins], vec![0; bins]],
            sums: [0; 3],
            sums_sq: [0; 3],
            pixels: 0,
            images: 0,
        })
    }

    /// Summary of a single image. Value `v` falls in bin `v * bins / 256`.
    pub fn from_image(image: &RasterImage, bins: usize) -> Result<Self> {
        let mut s = Self::empty(bins)?;
        for px in image.pixels().chunks_exact(3) {
            for c in 0..3 {
                let v = usize::from(px[c]);
                s.counts[c][v * bins / 256] += 1;
                s.sums[c] += v as u64;
                s.sums_sq[c] += (v * v) as u64;
            }
        }
        s.pixels = u64::from(image.width()) * u64::from(image.height());
        s.images = 1;
        Ok(s)
    }

    /// Pools two summaries (pixel-count weighted).
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.bins != other.bins {
            return Err(Error::BinMismatch(self.bins, other.bins));
        }
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.counts[c].iter_mut().zip(&other.counts[c]) {
                *a += b;
            }
            out.sums[c] += other.sums[c];
            out.sums_sq[c] += other.sums_sq[c];
        }
        out.pixels += other.pixels;
        out.images += other.images;
        Ok(out)
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn images(&self) -> usize {
        self.images
    }

    pub fn pixels(&self) -> u64 {
        self.pixels
    }

    /// Width of a bin in intensity levels.
    pub fn bin_width(&self) -> f64 {
        256.0 / self.bins as f64
    }

    /// Normalized histogram of channel `c` (0 = R, 1 = G, 2 = B).
    pub fn histogram<T: Scalar>(&self, c: usize) -> Vec<T> {
        let n = T::lit(self.pixels as f64);
        self.counts[c].iter().map(|&k| T::lit(k as f64) / n).collect()
    }

    pub fn mean<T: Scalar>(&self, c: usize) -> T {
        T::lit(self.sums[c] as f64 / self.pixels as f64)
    }

    /// Population standard deviation of channel `c`.
    pub fn std_dev<T: Scalar>(&self, c: usize) -> T {
        let n = self.pixels as f64;
        let m = self.sums[c] as f64 / n;
        T::lit((self.sums_sq[c] as f64 / n - m * m).max(0.0).sqrt())
    }

    /// Plain-text form: a few header lines, then one line per bin with the
    /// R, G and B counts.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# driftbench histogram summary v1\n");
        let [r, g, b] = self.sums;
        let [r2, g2, b2] = self.sums_sq;
        write!(
            out,
            "bins {}\nimages {}\npixels {}\nsum {r} {g} {b}\nsumsq {r2} {g2} {b2}\n",
            self.bins, self.images, self.pixels
        )
        .expect("String write");
        for k in 0..self.bins {
            writeln!(
                out,
                "{k} {} {} {}",
                self.counts[0][k], self.counts[1][k], self.counts[2][k]
            )
            .expect("String write");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |key: &str, n: usize| -> Result<Vec<u64>> {
            let (line, body) = lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("summary ends before {key}"),
            })?;
            let mut fields = body.split_whitespace();
            let bad = |message: String| Error::Parse { line, message };
            if key != "bin" && fields.next() != Some(key) {
                return Err(bad(format!("expected {key}")));
            }
            let values: Vec<u64> = fields
                .map(|f| f.parse::<u64>().map_err(|_| bad(format!("malformed count {f:?}"))))
                .collect::<Result<_>>()?;
            if values.len() != n {
                return Err(bad(format!("expected {n} values")));
            }
            Ok(values)
        };
        let bins = next("bins", 1)?[0] as usize;
        let mut s = Self::empty(bins)?;
        s.images = next("images", 1)?[0] as usize;
        s.pixels = next("pixels", 1)?[0];
        let sums = next("sum", 3)?;
        let sums_sq = next("sumsq", 3)?;
        for c in 0..3 {
            s.sums[c] = sums[c];
            s.sums_sq[c] = sums_sq[c];
        }
        for k in 0..bins {
            let row = next("bin", 4)?;
            if row[0] as usize != k {
                return Err(Error::invalid(format!("summary bin {} out of order", row[0])));
            }
            for c in 0..3 {
                s.counts[c][k] = row[c + 1];
            }
        }
        for c in 0..3 {
            if s.counts[c].iter().sum::<u64>() != s.pixels {
                return Err(Error::invalid("summary bin counts do not add up to the pixel count"));
            }
        }
        if s.images == 0 || s.pixels == 0 {
            return Err(Error::invalid("summary covers no images"));
        }
        Ok(s)
    }
}

/// Pools the histograms of every image in `paths`.
///
/// Images are read and summarized in parallel; integer merging makes the
/// result independent of scheduling.
pub fn dataset_summary(paths: &[impl AsRef<Path> + Sync], bins: usize) -> Result<HistogramSummary> {
    if paths.is_empty() {
        return Err(Error::invalid("cannot summarize an empty image set"));
    }
    let parts: Vec<HistogramSummary> = paths
        .par_iter()
        .map(|p| HistogramSummary::from_image(&RasterImage::load(p.as_ref())?, bins))
        .collect::<Result<_>>()?;
    let mut total = HistogramSummary::empty(bins)?;
    for part in &parts {
        total = total.merge(part)?;
    }
    Ok(total)
}

/// Summary of every image in a split directory (`images/` + `labels/`).
pub fn split_summary(dir: &Path, bins: usize) -> Result<HistogramSummary> {
    let samples = scan_split(dir)?;
    if samples.is_empty() {
        return Err(Error::invalid(format!("split {} has no images", dir.display())));
    }
    let paths: Vec<_> = samples.into_iter().map(|s| s.image).collect();
    dataset_summary(&paths, bins)
}
