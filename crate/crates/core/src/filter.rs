//! Per-sample ZA-LMS adaptation.
//!
//! ```text
//! e(n) = d(n) - x(n)ᵀ w(n-1)
//! w(n) = w(n-1) + μ x(n) e(n) - κ(n) sgn(w(n-1))
//! ```
//!
//! With `κ ≡ 0` this is plain LMS.

use crate::error::{Error, Result};
use crate::signal::dot;
use crate::stepsize::StepSizeController;

/// Component sign: `x/|x|` for nonzero `x`, otherwise 0.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn sign_vec(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&v| sign(v)).collect()
}

/// A priori error `d - xᵀ w_prev`.
pub fn predict_error(w_prev: &[f64], x: &[f64], d: f64) -> Result<f64> {
    if w_prev.len() != x.len() {
        return Err(Error::invalid(format!(
            "filter has {} taps but regressor has {}",
            w_prev.len(),
            x.len()
        )));
    }
    Ok(d - dot(x, w_prev))
}

/// Index of the first weight that became non-finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFinite {
    pub tap: usize,
}

/// Returns `w_prev + mu·x·e − kappa·sgn(w_prev)` as a new vector.
pub fn apply_update(
    w_prev: &[f64],
    x: &[f64],
    e: f64,
    mu: f64,
    kappa: f64,
) -> std::result::Result<Vec<f64>, NonFinite> {
    let mut w = w_prev.to_vec();
    apply_update_in_place(&mut w, x, e, mu, kappa)?;
    Ok(w)
}

/// In-place form of [`apply_update`]. On error `w` holds the partially
/// updated (non-finite) weights.
pub fn apply_update_in_place(
    w: &mut [f64],
    x: &[f64],
    e: f64,
    mu: f64,
    kappa: f64,
) -> std::result::Result<(), NonFinite> {
    assert_eq!(w.len(), x.len(), "weight/regressor length mismatch");
    let g = mu * e;
    let mut bad = None;
    for (i, (wi, &xi)) in w.iter_mut().zip(x).enumerate() {
        let next = *wi + g * xi - kappa * sign(*wi);
        if bad.is_none() && !next.is_finite() {
            bad = Some(i);
        }
        *wi = next;
    }
    match bad {
        Some(tap) => Err(NonFinite { tap }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    w: Vec<f64>,
    n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub e: f64,
    pub kappa: f64,
}

impl FilterState {
    /// Zero-initialized filter of `len` taps.
    pub fn new(len: usize) -> Self {
        FilterState {
            w: vec![0.0; len],
            n: 0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Number of updates applied so far.
    pub fn sample_index(&self) -> usize {
        self.n
    }

    /// One adaptation step. Error and κ are both computed from the
    /// pre-update weights, then the weights advance.
    pub fn step(
        &mut self,
        x: &[f64],
        d: f64,
        mu: f64,
        controller: &mut StepSizeController,
    ) -> Result<StepOutcome> {
        let e = predict_error(&self.w, x, d)?;
        let kappa = controller.next_kappa(e, x, &self.w);
        apply_update_in_place(&mut self.w, x, e, mu, kappa).map_err(|nf| Error::Diverged {
            sample: self.n,
            tap: nf.tap,
        })?;
        self.n += 1;
        Ok(StepOutcome { e, kappa })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepsize::ControllerConfig;
    use proptest::prelude::*;

    #[test]
    fn sign_examples() {
        assert_eq!(sign_vec(&[0.0, 2.5, -3.0]), vec![0.0, 1.0, -1.0]);
        assert_eq!(sign_vec(&[0.0; 4]), vec![0.0; 4]);
        assert_eq!(sign(-0.0), 0.0);
    }

    #[test]
    fn predict_error_examples() {
        assert_eq!(predict_error(&[0.0, 0.0], &[3.0, 1.0], 1.5).unwrap(), 1.5);
        let h = [0.25, -1.0, 0.5];
        let x = [2.0, 1.0, -4.0];
        let d = dot(&x, &h);
        assert_eq!(predict_error(&h, &x, d).unwrap(), 0.0);
        assert_eq!(predict_error(&[0.5, -0.5], &[2.0, 4.0], 1.0).unwrap(), 2.0);
        assert!(predict_error(&[0.0], &[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn update_examples() {
        assert_eq!(
            apply_update(&[0.0, 0.0], &[1.0, 1.0], 1.0, 0.5, 0.0).unwrap(),
            vec![0.5, 0.5]
        );
        let w = apply_update(&[0.5, -0.5], &[0.0, 0.0], 0.0, 0.3, 0.1).unwrap();
        assert!((w[0] - 0.4).abs() < 1e-15 && (w[1] + 0.4).abs() < 1e-15);
        let prev = [0.1, -2.0, 0.0];
        assert_eq!(
            apply_update(&prev, &[1.0, 2.0, 3.0], 0.0, 7.0, 0.0).unwrap(),
            prev.to_vec()
        );
    }

    #[test]
    fn update_reports_first_bad_tap() {
        let r = apply_update(
            &[0.0, 0.0, 0.0],
            &[1.0, f64::INFINITY, f64::NAN],
            1.0,
            1.0,
            0.0,
        );
        assert_eq!(r, Err(NonFinite { tap: 1 }));
    }

    #[test]
    fn step_reports_divergence_with_sample_index() {
        let mut state = FilterState::new(2);
        let mut ctl = ControllerConfig::Fixed { kappa0: 0.0 }.build(1.0).unwrap();
        state.step(&[1.0, 0.0], 1.0, 1.0, &mut ctl).unwrap();
        let err = state
            .step(&[f64::MAX, 0.0], 1.0, 1e10, &mut ctl)
            .unwrap_err();
        assert!(
            matches!(err, Error::Diverged { sample: 1, tap: 0 }),
            "{err:?}"
        );
    }

    #[test]
    fn first_step_from_zero_matches_lms() {
        let x = [0.3, -1.1, 2.0];
        let mut za = FilterState::new(3);
        let mut ctl = ControllerConfig::Fixed { kappa0: 0.05 }.build(0.1).unwrap();
        let out = za.step(&x, 0.7, 0.1, &mut ctl).unwrap();
        assert_eq!(out.e, 0.7);
        assert_eq!(
            za.weights(),
            apply_update(&[0.0; 3], &x, 0.7, 0.1, 0.0).unwrap()
        );
    }

    #[test]
    fn zero_kappa_is_textbook_lms() {
        let xs: Vec<[f64; 3]> = (0..50)
            .map(|i| {
                let t = i as f64;
                [(0.7 * t).sin(), (1.3 * t).cos(), (0.1 * t * t).sin()]
            })
            .collect();
        let h = [0.5, -0.2, 0.1];
        let mut state = FilterState::new(3);
        let mut ctl = ControllerConfig::Fixed { kappa0: 0.0 }.build(0.2).unwrap();
        let mut w = [0.0; 3];
        for x in &xs {
            let d = dot(x, &h);
            state.step(x, d, 0.2, &mut ctl).unwrap();
            let e = d - (x[0] * w[0] + x[1] * w[1] + x[2] * w[2]);
            for i in 0..3 {
                w[i] += 0.2 * e * x[i];
            }
            assert_eq!(state.weights(), &w);
        }
        assert_eq!(state.sample_index(), 50);
    }

    proptest! {
        #[test]
        fn sign_is_idempotent(w in prop::collection::vec(-1e3f64..1e3, 0..32)) {
            let s = sign_vec(&w);
            prop_assert_eq!(sign_vec(&s), s);
        }

        #[test]
        fn attraction_shrinks_without_crossing(w in prop::collection::vec(-10.0f64..10.0, 1..32), frac in 0.0f64..=1.0) {
            let min_mag = w.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            let kappa = frac * min_mag;
            let zeros = vec![0.0; w.len()];
            let next = apply_update(&w, &zeros, 0.0, 0.5, kappa).unwrap();
            for (a, b) in w.iter().zip(&next) {
                prop_assert!((b.abs() - (a.abs() - kappa)).abs() <= 1e-12 * a.abs().max(1.0));
                prop_assert!(sign(*b) == sign(*a) || *b == 0.0);
            }
        }
    }
}
