//! Zero-attractor step-size (κ) controllers.
//!
//! Every controller is fed `(e(n), x(n), w(n-1))` once per sample and returns
//! the κ(n) used in that sample's weight update.
//!
//! * `Fixed`: constant κ (κ = 0 is plain LMS).
//! * `You`: start large, multiply by η on each detected convergence plateau
//!   until κ drops to κ_min, then freeze.
//! * `Liu`: drive κ by the gap between the current sparseness measure J(w)
//!   and its running average φ.
//! * `ProposedL1`: drive κ by an estimate of the l1 sparseness distance
//!   `|e·xᵀsgn(w)| / xᵀx`.
//! * `ProposedNorm`: the same estimate normalized by `(√L − 1)·‖w‖₂`, which
//!   tracks the distance in the scale-free sparsity measure instead.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::filter::sign;
use crate::metrics::{norms, smoothed_mse, sparsity_xi};

/// Sparseness measure J(w) used by the Liu controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SparsenessMeasure {
    L1,
    #[default]
    Xi,
}

impl SparsenessMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            SparsenessMeasure::L1 => "l1",
            SparsenessMeasure::Xi => "xi",
        }
    }

    pub fn evaluate(self, w: &[f64]) -> f64 {
        match self {
            SparsenessMeasure::L1 => norms(w).0,
            // ξ is undefined for the all-zero start-up filter; it carries no
            // sparseness information, so report 0
            SparsenessMeasure::Xi => sparsity_xi(w).unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub beta: f64,
    pub window: usize,
    pub tolerance: f64,
    pub cooldown: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            beta: 0.01,
            window: 200,
            tolerance: 0.05,
            cooldown: 200,
        }
    }
}

/// Controller parameters as written in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerConfig {
    Lms,
    Fixed {
        kappa0: f64,
    },
    You {
        kappa0: f64,
        eta: f64,
        kappa_min: f64,
        detector: DetectorConfig,
    },
    Liu {
        lambda: f64,
        alpha: f64,
        gamma: f64,
        measure: SparsenessMeasure,
        kappa0: f64,
        kappa_max: Option<f64>,
    },
    ProposedL1 {
        alpha: f64,
        gamma: f64,
        kappa0: f64,
        kappa_max: Option<f64>,
    },
    ProposedNorm {
        alpha: f64,
        gamma: f64,
        w2_floor: f64,
        kappa0: f64,
        kappa_max: Option<f64>,
    },
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be in (0,1), got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be > 0, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be >= 0, got {v}")))
    }
}

impl ControllerConfig {
    /// Kind name used in config files.
    pub fn kind_name(&self) -> &'static str {
        match self {
            ControllerConfig::Lms => "lms",
            ControllerConfig::Fixed { .. } => "fixed_zap",
            ControllerConfig::You { .. } => "you",
            ControllerConfig::Liu { .. } => "liu",
            ControllerConfig::ProposedL1 { .. } => "proposed_l1",
            ControllerConfig::ProposedNorm { .. } => "proposed_norm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ControllerConfig::Lms => Ok(()),
            ControllerConfig::Fixed { kappa0 } => non_negative("kappa", kappa0),
            ControllerConfig::You {
                kappa0,
                eta,
                kappa_min,
                detector,
            } => {
                non_negative("kappa0", kappa0)?;
                open_unit("eta", eta)?;
                positive("kappa_min", kappa_min)?;
                open_unit("beta", detector.beta)?;
                positive("tolerance", detector.tolerance)?;
                if detector.window == 0 {
                    return Err(Error::invalid("window must be >= 1"));
                }
                Ok(())
            }
            ControllerConfig::Liu {
                lambda,
                alpha,
                gamma,
                kappa0,
                kappa_max,
                ..
            } => {
                open_unit("lambda", lambda)?;
                smoothed_params(alpha, gamma, kappa0, kappa_max)
            }
            ControllerConfig::ProposedL1 {
                alpha,
                gamma,
                kappa0,
                kappa_max,
            } => smoothed_params(alpha, gamma, kappa0, kappa_max),
            ControllerConfig::ProposedNorm {
                alpha,
                gamma,
                w2_floor,
                kappa0,
                kappa_max,
            } => {
                positive("w2_floor", w2_floor)?;
                smoothed_params(alpha, gamma, kappa0, kappa_max)
            }
        }
    }

    /// Validates and instantiates the controller. `mu` is the scenario's
    /// adaptation step; it is the default κ ceiling for smoothed controllers.
    pub fn build(&self, mu: f64) -> Result<StepSizeController> {
        self.validate()?;
        Ok(match *self {
            ControllerConfig::Lms => StepSizeController::Fixed { kappa0: 0.0 },
            ControllerConfig::Fixed { kappa0 } => StepSizeController::Fixed { kappa0 },
            ControllerConfig::You {
                kappa0,
                eta,
                kappa_min,
                detector,
            } => StepSizeController::You(YouState {
                kappa: kappa0,
                eta,
                kappa_min,
                detector: ConvergenceDetector::new(detector),
            }),
            ControllerConfig::Liu {
                lambda,
                alpha,
                gamma,
                measure,
                kappa0,
                kappa_max,
            } => StepSizeController::Liu(LiuState {
                phi: 0.0,
                lambda,
                measure,
                smooth: Smoother::new(alpha, gamma, kappa0, kappa_max.unwrap_or(mu)),
            }),
            ControllerConfig::ProposedL1 {
                alpha,
                gamma,
                kappa0,
                kappa_max,
            } => StepSizeController::ProposedL1(Smoother::new(
                alpha,
                gamma,
                kappa0,
                kappa_max.unwrap_or(mu),
            )),
            ControllerConfig::ProposedNorm {
                alpha,
                gamma,
                w2_floor,
                kappa0,
                kappa_max,
            } => StepSizeController::ProposedNorm {
                smooth: Smoother::new(alpha, gamma, kappa0, kappa_max.unwrap_or(mu)),
                w2_floor,
            },
        })
    }
}

fn smoothed_params(alpha: f64, gamma: f64, kappa0: f64, kappa_max: Option<f64>) -> Result<()> {
    open_unit("alpha", alpha)?;
    positive("gamma", gamma)?;
    non_negative("kappa0", kappa0)?;
    if let Some(k) = kappa_max {
        positive("kappa_max", k)?;
    }
    Ok(())
}

/// Plateau detector on the exponentially smoothed squared error.
///
/// Fires when the smoothed MSE has changed by less than `tolerance`
/// (relative) over the last `window` samples, then stays quiet for
/// `cooldown` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceDetector {
    smoothed_mse: f64,
    beta: f64,
    window: usize,
    tolerance: f64,
    cooldown_len: usize,
    cooldown: usize,
    history: VecDeque<f64>,
}

impl ConvergenceDetector {
    pub fn new(cfg: DetectorConfig) -> Self {
        ConvergenceDetector {
            smoothed_mse: 0.0,
            beta: cfg.beta,
            window: cfg.window,
            tolerance: cfg.tolerance,
            cooldown_len: cfg.cooldown,
            cooldown: 0,
            history: VecDeque::with_capacity(cfg.window + 1),
        }
    }

    pub fn smoothed_mse(&self) -> f64 {
        self.smoothed_mse
    }

    /// Feeds one error sample; returns true on a convergence event.
    pub fn observe(&mut self, e: f64) -> bool {
        // seed with the first squared error so the start-up rise from zero
        // cannot masquerade as a plateau
        self.smoothed_mse = if self.history.is_empty() {
            e * e
        } else {
            smoothed_mse(self.smoothed_mse, e, self.beta)
        };
        if self.history.len() == self.window + 1 {
            self.history.pop_front();
        }
        self.history.push_back(self.smoothed_mse);
        if self.cooldown > 0 {
            self.cooldown -= 1;
            return false;
        }
        if self.history.len() < self.window + 1 {
            return false;
        }
        let past = self.history[0];
        let rel = if past > 0.0 {
            (self.smoothed_mse - past).abs() / past
        } else if self.smoothed_mse == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if rel < self.tolerance {
            self.cooldown = self.cooldown_len;
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct YouState {
    pub kappa: f64,
    pub eta: f64,
    pub kappa_min: f64,
    pub detector: ConvergenceDetector,
}

impl YouState {
    /// Applies one (possible) convergence event to κ.
    pub fn on_event(&mut self, converged: bool) -> f64 {
        if converged && self.kappa > self.kappa_min {
            self.kappa *= self.eta;
        }
        self.kappa
    }

    pub fn update(&mut self, e: f64) -> f64 {
        let converged = self.detector.observe(e);
        self.on_event(converged)
    }
}

/// `κ(n) = clamp((1 − α)κ(n−1) + αγδ(n), 0, κ_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoother {
    pub kappa: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub kappa_max: f64,
}

impl Smoother {
    pub fn new(alpha: f64, gamma: f64, kappa0: f64, kappa_max: f64) -> Self {
        Smoother {
            kappa: kappa0.min(kappa_max),
            alpha,
            gamma,
            kappa_max,
        }
    }

    pub fn push(&mut self, delta: f64) -> f64 {
        self.kappa = kappa_smooth(self.kappa, delta, self.alpha, self.gamma).min(self.kappa_max);
        self.kappa
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiuState {
    pub phi: f64,
    pub lambda: f64,
    pub measure: SparsenessMeasure,
    pub smooth: Smoother,
}

impl LiuState {
    /// One step of the sparseness-gradient controller.
    pub fn update(&mut self, w: &[f64]) -> f64 {
        let j = self.measure.evaluate(w);
        let delta = j - self.phi;
        self.phi = (1.0 - self.lambda) * self.phi + self.lambda * j;
        self.smooth.push(delta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepSizeController {
    Fixed { kappa0: f64 },
    You(YouState),
    Liu(LiuState),
    ProposedL1(Smoother),
    ProposedNorm { smooth: Smoother, w2_floor: f64 },
}

impl StepSizeController {
    /// κ(n) from the current error, regressor and pre-update weights.
    pub fn next_kappa(&mut self, e: f64, x: &[f64], w_prev: &[f64]) -> f64 {
        match self {
            StepSizeController::Fixed { kappa0 } => *kappa0,
            StepSizeController::You(s) => s.update(e),
            StepSizeController::Liu(s) => s.update(w_prev),
            StepSizeController::ProposedL1(s) => s.push(proposed_l1_delta(e, x, w_prev)),
            StepSizeController::ProposedNorm { smooth, w2_floor } => {
                smooth.push(proposed_norm_delta(e, x, w_prev, *w2_floor))
            }
        }
    }

    /// The most recent κ without advancing the controller.
    pub fn kappa(&self) -> f64 {
        match self {
            StepSizeController::Fixed { kappa0 } => *kappa0,
            StepSizeController::You(s) => s.kappa,
            StepSizeController::Liu(s) => s.smooth.kappa,
            StepSizeController::ProposedL1(s) => s.kappa,
            StepSizeController::ProposedNorm { smooth, .. } => smooth.kappa,
        }
    }
}

/// l1 sparseness-distance estimate `|e·xᵀsgn(w_prev)| / (xᵀx)`; 0 for a zero
/// regressor.
pub fn proposed_l1_delta(e: f64, x: &[f64], w_prev: &[f64]) -> f64 {
    assert_eq!(x.len(), w_prev.len(), "regressor/weight length mismatch");
    let (proj, energy) = x.iter().zip(w_prev).fold((0.0, 0.0), |(p, q), (&xi, &wi)| {
        (p + xi * sign(wi), q + xi * xi)
    });
    if energy == 0.0 {
        return 0.0;
    }
    (e * proj / energy).abs()
}

/// [`proposed_l1_delta`] divided by `(√L − 1)·max(‖w_prev‖₂, w2_floor)`.
pub fn proposed_norm_delta(e: f64, x: &[f64], w_prev: &[f64], w2_floor: f64) -> f64 {
    let len = w_prev.len() as f64;
    debug_assert!(len > 1.0);
    let l2 = norms(w_prev).1;
    proposed_l1_delta(e, x, w_prev) / ((len.sqrt() - 1.0) * l2.max(w2_floor))
}

pub fn kappa_smooth(kappa_prev: f64, delta: f64, alpha: f64, gamma: f64) -> f64 {
    ((1.0 - alpha) * kappa_prev + alpha * gamma * delta).max(0.0)
}
