use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::divergence::{js_divergence, psi, wasserstein1d};
use super::summary::HistogramSummary;

pub const CHANNEL_NAMES: [&str; 3] = ["R", "G", "B"];

/// Flag thresholds. A score strictly above its threshold raises the flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftThresholds<T> {
    pub psi: T,
    pub jsd: T,
    pub w1: T,
}

impl<T: Scalar> Default for DriftThresholds<T> {
    /// PSI 0.25, JSD 0.1, W1 8 intensity levels (two bins). Heuristics.
    fn default() -> Self {
        DriftThresholds {
            psi: T::lit(0.25),
            jsd: T::lit(0.1),
            w1: T::lit(8.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelScores<T> {
    pub psi: T,
    pub jsd: T,
    pub w1: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DriftFlags {
    pub psi: bool,
    pub jsd: bool,
    pub w1: bool,
}

impl DriftFlags {
    pub fn any(&self) -> bool {
        self.psi || self.jsd || self.w1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport<T> {
    pub channels: [ChannelScores<T>; 3],
    /// Mean over channels of each score.
    pub aggregate: ChannelScores<T>,
    pub thresholds: DriftThresholds<T>,
    /// Verdict on the aggregate scores.
    pub flags: DriftFlags,
}

fn flags_for<T: Scalar>(s: &ChannelScores<T>, t: &DriftThresholds<T>) -> DriftFlags {
    DriftFlags {
        psi: s.psi > t.psi,
        jsd: s.jsd > t.jsd,
        w1: s.w1 > t.w1,
    }
}

pub fn drift_report<T: Scalar>(
    a: &HistogramSummary,
    b: &HistogramSummary,
    thresholds: DriftThresholds<T>,
) -> Result<DriftReport<T>> {
    if a.bins() != b.bins() {
        return Err(Error::BinMismatch(a.bins(), b.bins()));
    }
    let width = T::lit(a.bin_width());
    let mut channels = [ChannelScores::default(); 3];
    for (c, out) in channels.iter_mut().enumerate() {
        let (p, q) = (a.histogram::<T>(c), b.histogram::<T>(c));
        *out = ChannelScores {
            psi: psi(&p, &q)?,
            jsd: js_divergence(&p, &q)?,
            w1: wasserstein1d(&p, &q, width)?,
        };
    }
    let three = T::lit(3.0);
    let aggregate = ChannelScores {
        psi: channels.iter().map(|s| s.psi).sum::<T>() / three,
        jsd: channels.iter().map(|s| s.jsd).sum::<T>() / three,
        w1: channels.iter().map(|s| s.w1).sum::<T>() / three,
    };
    Ok(DriftReport {
        channels,
        aggregate,
        flags: flags_for(&aggregate, &thresholds),
        thresholds,
    })
}

impl<T: Scalar> DriftReport<T> {
    /// Flags of a single channel against the same thresholds.
    pub fn channel_flags(&self, c: usize) -> DriftFlags {
        flags_for(&self.channels[c], &self.thresholds)
    }

    fn rows(&self) -> Vec<(&'static str, ChannelScores<T>, DriftFlags)> {
        let mut rows: Vec<_> = (0..3)
            .map(|c| (CHANNEL_NAMES[c], self.channels[c], self.channel_flags(c)))
            .collect();
        rows.push(("mean", self.aggregate, self.flags));
        rows
    }

    /// `channel,score,value,flag` with one row per channel and score.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,score,value,flag\n");
        for (name, s, f) in self.rows() {
            for (score, v, flag) in [("psi", s.psi, f.psi), ("jsd", s.jsd, f.jsd), ("w1", s.w1, f.w1)] {
                writeln!(out, "{name},{score},{:.6},{}", v, u8::from(flag)).expect("String write");
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mark = |v: T, f: bool| format!("{:.4}{}", v, if f { " *" } else { "" });
        let mut out = format!("{:<8}{:>12}{:>12}{:>12}\n", "channel", "psi", "jsd", "w1");
        for (name, s, f) in self.rows() {
            writeln!(
                out,
                "{:<8}{:>12}{:>12}{:>12}",
                name,
                mark(s.psi, f.psi),
                mark(s.jsd, f.jsd),
                mark(s.w1, f.w1)
            )
            .expect("String write");
        }
        let t = &self.thresholds;
        writeln!(
            out,
            "thresholds: psi > {} jsd > {} w1 > {}  drift: {}",
            t.psi,
            t.jsd,
            t.w1,
            if self.flags.any() { "yes" } else { "no" }
        )
        .expect("String write");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::{fog, RasterImage};

    fn textured() -> RasterImage {
        let mut px = Vec::new();
        for y in 0..32u32 {
            for x in 0..32u32 {
                px.extend_from_slice(&[(x * 8) as u8, (y * 8) as u8, ((x + y) * 4) as u8]);
            }
        }
        RasterImage::new(32, 32, px).unwrap()
    }

    #[test]
    fn self_report_is_zero() {
        let s = HistogramSummary::from_image(&textured(), 64).unwrap();
        let r: DriftReport<f64> = drift_report(&s, &s, DriftThresholds::default()).unwrap();
        for c in r.channels.iter().chain([&r.aggregate]) {
            assert!(c.psi.abs() < 1e-12 && c.jsd.abs() < 1e-12 && c.w1.abs() < 1e-12);
        }
        assert!(!r.flags.any());
        assert_eq!(r.to_csv().lines().count(), 13);
    }

    #[test]
    fn fog_raises_psi_and_symmetric_scores_agree() {
        let img = textured();
        let foggy = fog(&img, 0.8);
        let a = HistogramSummary::from_image(&img, 64).unwrap();
        let b = HistogramSummary::from_image(&foggy, 64).unwrap();
        let ab: DriftReport<f64> = drift_report(&a, &b, DriftThresholds::default()).unwrap();
        let ba: DriftReport<f64> = drift_report(&b, &a, DriftThresholds::default()).unwrap();
        assert!(ab.flags.psi, "{}", ab.to_table());
        for c in 0..3 {
            assert!((ab.channels[c].jsd - ba.channels[c].jsd).abs() < 1e-12);
            assert!((ab.channels[c].w1 - ba.channels[c].w1).abs() < 1e-12);
        }
        assert!(ab.to_table().contains('*'));
    }

    #[test]
    fn bin_mismatch() {
        let a = HistogramSummary::from_image(&textured(), 64).unwrap();
        let b = HistogramSummary::from_image(&textured(), 32).unwrap();
        assert!(drift_report::<f64>(&a, &b, DriftThresholds::default()).is_err());
    }
}
