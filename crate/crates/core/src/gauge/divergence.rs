use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mass given to empty bins before renormalizing.
pub const SMOOTHING_EPSILON: f64 = 1e-6;

fn same_len<T>(p: &[T], q: &[T]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::BinMismatch(p.len(), q.len()));
    }
    if p.is_empty() {
        return Err(Error::invalid("empty histogram"));
    }
    Ok(())
}

/// Replaces zero bins with [`SMOOTHING_EPSILON`] and renormalizes.
pub fn smooth<T: Scalar>(p: &[T]) -> Vec<T> {
    let eps = T::lit(SMOOTHING_EPSILON);
    let lifted: Vec<T> = p
        .iter()
        .map(|&v| if v > T::zero() { v } else { eps })
        .collect();
    let total: T = lifted.iter().copied().sum();
    lifted.into_iter().map(|v| v / total).collect()
}

/// Population stability index `sum (p_i - q_i) ln(p_i / q_i)` on smoothed
/// histograms.
pub fn psi<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    same_len(p, q)?;
    let (p, q) = (smooth(p), smooth(q));
    Ok(p.iter().zip(&q).map(|(&a, &b)| (a - b) * (a / b).ln()).sum())
}

fn kl<T: Scalar>(p: &[T], q: &[T]) -> T {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > T::zero())
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// Jensen-Shannon divergence (natural log, so at most `ln 2`) on smoothed
/// histograms.
pub fn js_divergence<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    same_len(p, q)?;
    let (p, q) = (smooth(p), smooth(q));
    let half = T::lit(0.5);
    let m: Vec<T> = p.iter().zip(&q).map(|(&a, &b)| (a + b) * half).collect();
    let d = half * kl(&p, &m) + half * kl(&q, &m);
    Ok(d.max(T::zero()))
}

/// 1-D earth mover's distance between histograms on equally spaced bins:
/// `sum |CDF_p(i) - CDF_q(i)| * bin_width`, in intensity levels. No smoothing
/// is needed because no ratio is taken.
pub fn wasserstein1d<T: Scalar>(p: &[T], q: &[T], bin_width: T) -> Result<T> {
    same_len(p, q)?;
    let (mut cp, mut cq) = (T::zero(), T::zero());
    let mut total = T::zero();
    for (&a, &b) in p.iter().zip(q) {
        cp = cp + a;
        cq = cq + b;
        total = total + (cp - cq).abs();
    }
    Ok(total * bin_width)
}
