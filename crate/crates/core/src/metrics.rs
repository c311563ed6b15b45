//! Norms, normalized misalignment, channel sparsity and the sign-agreement
//! diagnostic.

use crate::error::{Error, Result};
use crate::filter::sign;

/// One recorded point of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub n: usize,
    pub misalignment_db: f64,
    pub kappa: f64,
    pub error: f64,
    pub sign_agreement: f64,
    pub smoothed_mse: f64,
}

/// Which taps the sign-agreement diagnostic looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignScope {
    /// Only taps where the true channel is nonzero.
    #[default]
    ActiveTaps,
    AllTaps,
}

/// Returns `(‖w‖₁, ‖w‖₂)`.
pub fn norms(w: &[f64]) -> (f64, f64) {
    let (l1, sq) = w
        .iter()
        .fold((0.0, 0.0), |(l1, sq), &v| (l1 + v.abs(), sq + v * v));
    (l1, sq.sqrt())
}

pub fn l2_norm(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Normalized misalignment `20·log10(‖h − w‖₂ / ‖h‖₂)` in dB.
///
/// Returns `f64::NEG_INFINITY` when `w` equals `h` exactly.
pub fn misalignment_db(h: &[f64], w: &[f64]) -> Result<f64> {
    if h.len() != w.len() {
        return Err(Error::invalid(format!(
            "misalignment: channel has {} taps, filter has {}",
            h.len(),
            w.len()
        )));
    }
    let h2 = l2_norm(h);
    if h2 == 0.0 {
        return Err(Error::invalid("misalignment: true channel is all zeros"));
    }
    let diff = h
        .iter()
        .zip(w)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if diff == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(20.0 * (diff / h2).log10())
}

/// Channel sparsity `L/(L − √L) · (1 − ‖h‖₁ / (√L·‖h‖₂))`, in `[0, 1]`.
///
/// 1 for a single nonzero tap, 0 when every tap has the same magnitude.
pub fn sparsity_xi(h: &[f64]) -> Result<f64> {
    let len = h.len();
    if len < 2 {
        return Err(Error::invalid("sparsity: need at least two taps"));
    }
    let (l1, l2) = norms(h);
    if l2 == 0.0 {
        return Err(Error::invalid("sparsity: zero vector"));
    }
    let l = len as f64;
    let root = l.sqrt();
    let xi = l / (l - root) * (1.0 - l1 / (root * l2));
    // rounding can push the extremes a hair outside the unit interval
    Ok(xi.clamp(0.0, 1.0))
}

/// Fraction of in-scope taps where `sgn(w_i) = sgn(h_i)`.
pub fn sign_agreement(h: &[f64], w: &[f64], scope: SignScope) -> Result<f64> {
    if h.len() != w.len() {
        return Err(Error::invalid(format!(
            "sign agreement: channel has {} taps, filter has {}",
            h.len(),
            w.len()
        )));
    }
    let mut total = 0usize;
    let mut agree = 0usize;
    for (&hi, &wi) in h.iter().zip(w) {
        if scope == SignScope::ActiveTaps && hi == 0.0 {
            continue;
        }
        total += 1;
        if sign(hi) == sign(wi) {
            agree += 1;
        }
    }
    if total == 0 {
        return Err(Error::invalid("sign agreement: no taps in scope"));
    }
    Ok(agree as f64 / total as f64)
}

/// One step of the exponentially smoothed squared error.
pub fn smoothed_mse(prev: f64, e: f64, beta: f64) -> f64 {
    (1.0 - beta) * prev + beta * e * e
}
