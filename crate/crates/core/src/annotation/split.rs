use std::collections::HashSet;
use std::fmt::Write as _;

use super::manifest::Split;
use crate::error::{Error, Result};
use crate::rng::DetRng;

/// Assignment of image stems to train/val/test.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    pub ratios: [f64; 3],
}

impl SplitAssignment {
    pub fn stems(&self, split: Split) -> &[String] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn split_of(&self, stem: &str) -> Option<Split> {
        Split::ALL
            .into_iter()
            .find(|s| self.stems(*s).iter().any(|x| x == stem))
    }

    /// Audit record: a header with seed and ratios, then `<stem> <split>` per
    /// line sorted by stem.
    pub fn audit_text(&self) -> String {
        let [a, b, c] = self.ratios;
        let mut out = format!("# seed={} ratios={a},{b},{c}\n", self.seed);
        let mut rows: Vec<(&str, Split)> = Split::ALL
            .into_iter()
            .flat_map(|s| self.stems(s).iter().map(move |x| (x.as_str(), s)))
            .collect();
        rows.sort();
        for (stem, split) in rows {
            writeln!(out, "{stem} {}", split.name()).expect("String write");
        }
        out
    }
}

/// Checks a ratio triple: finite, non-negative, summing to 1 within 1e-9.
pub(crate) fn validate_ratios(ratios: [f64; 3]) -> Result<()> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::invalid(format!(
            "ratios must be non-negative, got {ratios:?}"
        )));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("ratios must sum to 1, got {sum}")));
    }
    Ok(())
}

/// `floor(ratio * n)`, nudged so products like `0.29 * 100` that land a hair
/// below an integer still floor to it.
fn cut(ratio: f64, n: usize) -> usize {
    ((ratio * n as f64) + 1e-6).floor() as usize
}

/// Splits stems with a seeded shuffle.
///
/// Stems are sorted first so the result depends only on the stem set, then
/// shuffled with [`DetRng::shuffle`]. The first `floor(r_train * N)` go to
/// train, the last `floor(r_test * N)` to test and everything in between to
/// val, so an empty test ratio never receives rounding leftovers.
pub fn split_dataset(stems: &[String], ratios: [f64; 3], seed: u64) -> Result<SplitAssignment> {
    if stems.is_empty() {
        return Err(Error::invalid("cannot split an empty stem list"));
    }
    validate_ratios(ratios)?;
    let mut seen = HashSet::with_capacity(stems.len());
    for s in stems {
        if !seen.insert(s.as_str()) {
            return Err(Error::invalid(format!("duplicate stem {s:?}")));
        }
    }

    let mut order: Vec<String> = stems.to_vec();
    order.sort();
    DetRng::new(seed).shuffle(&mut order);

    let n = order.len();
    let n_train = cut(ratios[0], n).min(n);
    let n_test = cut(ratios[2], n).min(n - n_train);
    let n_val = n - n_train - n_test;
    let test = order.split_off(n_train + n_val);
    let val = order.split_off(n_train);
    Ok(SplitAssignment {
        train: order,
        val,
        test,
        seed,
        ratios,
    })
}
