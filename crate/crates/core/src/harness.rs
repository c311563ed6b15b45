//! Scenario runner: seeded signal generation, per-sample adaptation, metric
//! recording, multi-seed aggregation and tracking (recovery-time) analysis.

use std::collections::HashSet;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::channel::{generate_dispersive, generate_sparse, load_channel, Channel};
use crate::error::{Error, Result};
use crate::filter::{sign, FilterState};
use crate::metrics::{misalignment_db, sign_agreement, smoothed_mse, MetricSample, SignScope};
use crate::rng::{derive_seed, Stream};
use crate::signal::{
    dot, generate_input, synthesize_desired, ChannelSchedule, DesiredSignal, Regressors,
};
use crate::stepsize::ControllerConfig;

/// Forgetting factor of the smoothed squared error written to traces.
pub const TRACE_MSE_BETA: f64 = 0.01;
/// Recorded samples a recovery must hold for.
pub const RECOVERY_HOLD: usize = 100;
pub const DEFAULT_RECOVERY_MARGIN_DB: f64 = 3.0;

/// How to obtain one true channel.
///
/// Generated channels without an explicit seed draw one from the run seed, so
/// every Monte-Carlo run sees a fresh channel realization.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Sparse {
        active_count: usize,
        seed: Option<u64>,
    },
    Dispersive {
        decay: f64,
        seed: Option<u64>,
    },
    File(PathBuf),
}

impl ChannelSpec {
    pub fn realize(&self, len: usize, run_seed: u64, slot: Stream) -> Result<Channel> {
        let seed_for = |s: Option<u64>| s.unwrap_or_else(|| derive_seed(run_seed, slot));
        let ch = match self {
            ChannelSpec::Sparse { active_count, seed } => {
                generate_sparse(len, *active_count, seed_for(*seed))?
            }
            ChannelSpec::Dispersive { decay, seed } => {
                generate_dispersive(len, seed_for(*seed), *decay)?
            }
            ChannelSpec::File(path) => load_channel(path)?,
        };
        if ch.len() != len {
            return Err(Error::invalid(format!(
                "channel has {} taps but the scenario uses L={len}",
                ch.len()
            )));
        }
        Ok(ch)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub controller: ControllerConfig,
}

impl AlgorithmSpec {
    pub fn new(name: impl Into<String>, controller: ControllerConfig) -> Self {
        AlgorithmSpec {
            name: name.into(),
            controller,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub filter_len: usize,
    pub n_samples: usize,
    /// `f64::INFINITY` for a noise-free run.
    pub snr_db: f64,
    pub mu: f64,
    pub sigma_x: f64,
    pub change_at: Option<usize>,
    pub channel_before: ChannelSpec,
    pub channel_after: Option<ChannelSpec>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub seeds: Vec<u64>,
    pub record_every: usize,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.filter_len < 2 {
            return Err(Error::invalid(format!(
                "L must be > 1, got {}",
                self.filter_len
            )));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("N must be >= 1"));
        }
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::invalid(format!("mu must be > 0, got {}", self.mu)));
        }
        if !self.sigma_x.is_finite() || self.sigma_x <= 0.0 {
            return Err(Error::invalid(format!(
                "sigma_x must be > 0, got {}",
                self.sigma_x
            )));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::invalid(format!("invalid snr_db {}", self.snr_db)));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be >= 1"));
        }
        match (self.change_at, &self.channel_after) {
            (Some(c), Some(_)) => {
                if c == 0 || c >= self.n_samples {
                    return Err(Error::invalid(format!(
                        "change_at must be in (0, {}), got {c}",
                        self.n_samples
                    )));
                }
            }
            (Some(_), None) => {
                return Err(Error::invalid("change_at set but no [channel.after] given"))
            }
            (None, Some(_)) => {
                return Err(Error::invalid("[channel.after] given without change_at"))
            }
            (None, None) => {}
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("at least one algorithm is required"));
        }
        let mut names = HashSet::new();
        for alg in &self.algorithms {
            if !names.insert(alg.name.as_str()) {
                return Err(Error::invalid(format!(
                    "duplicate algorithm name `{}`",
                    alg.name
                )));
            }
            alg.controller
                .validate()
                .map_err(|e| Error::invalid(format!("algorithm `{}`: {e}", alg.name)))?;
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        Ok(())
    }

    pub fn algorithm(&self, name: &str) -> Result<&AlgorithmSpec> {
        self.algorithms
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm `{name}`")))
    }

    /// Number of recorded samples in a complete trace.
    pub fn trace_len(&self) -> usize {
        self.n_samples.div_ceil(self.record_every)
    }
}

/// Everything a run needs that depends only on (scenario, seed).
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub x: Vec<f64>,
    pub regressors: Regressors,
    pub schedule: ChannelSchedule,
    pub desired: DesiredSignal,
}

impl RunInputs {
    pub fn prepare(cfg: &ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let x = generate_input(cfg.n_samples, seed, cfg.sigma_x)?;
        let before = cfg
            .channel_before
            .realize(cfg.filter_len, seed, Stream::ChannelBefore)?;
        let mut segments = vec![(0, before)];
        if let (Some(at), Some(spec)) = (cfg.change_at, &cfg.channel_after) {
            segments.push((
                at,
                spec.realize(cfg.filter_len, seed, Stream::ChannelAfter)?,
            ));
        }
        let schedule = ChannelSchedule::new(segments)?;
        let desired =
            synthesize_desired(&x, &schedule, cfg.snr_db, derive_seed(seed, Stream::Noise))?;
        let regressors = Regressors::new(&x, cfg.filter_len);
        Ok(RunInputs {
            x,
            regressors,
            schedule,
            desired,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub seed: u64,
    pub samples: Vec<MetricSample>,
    /// Misalignment after the last update (NaN if the run diverged).
    pub final_misalignment_db: f64,
    pub diverged_at: Option<usize>,
    pub realized_snr_db: f64,
}

/// Per-sample view handed to observers, taken after κ(n) is known and before
/// the weights move.
#[derive(Debug)]
pub struct StepObservation<'a> {
    pub n: usize,
    pub x: &'a [f64],
    pub d: f64,
    pub w_prev: &'a [f64],
    pub e: f64,
    pub kappa: f64,
    pub channel: &'a Channel,
}

pub fn run_scenario(cfg: &ScenarioConfig, algorithm: &str, seed: u64) -> Result<RunTrace> {
    let inputs = RunInputs::prepare(cfg, seed)?;
    run_with_inputs(cfg, cfg.algorithm(algorithm)?, seed, &inputs, None)
}

/// Like [`run_scenario`], calling `observer` once per sample.
pub fn run_scenario_observed(
    cfg: &ScenarioConfig,
    algorithm: &str,
    seed: u64,
    observer: &mut dyn FnMut(&StepObservation<'_>),
) -> Result<RunTrace> {
    let inputs = RunInputs::prepare(cfg, seed)?;
    run_with_inputs(
        cfg,
        cfg.algorithm(algorithm)?,
        seed,
        &inputs,
        Some(observer),
    )
}

pub fn run_with_inputs(
    cfg: &ScenarioConfig,
    alg: &AlgorithmSpec,
    seed: u64,
    inputs: &RunInputs,
    mut observer: Option<&mut dyn FnMut(&StepObservation<'_>)>,
) -> Result<RunTrace> {
    let mut controller = alg.controller.build(cfg.mu)?;
    let mut state = FilterState::new(cfg.filter_len);
    let mut samples = Vec::with_capacity(cfg.trace_len());
    let mut mse = 0.0;
    let mut diverged_at = None;
    let mut final_misalignment_db = f64::NAN;
    let mut w_prev = Vec::new();

    for n in 0..cfg.n_samples {
        let x = inputs.regressors.at(n);
        let d = inputs.desired.d[n];
        let channel = inputs.schedule.active(n);

        if observer.is_some() {
            w_prev.clear();
            w_prev.extend_from_slice(state.weights());
        }
        let step = match state.step(x, d, cfg.mu, &mut controller) {
            Ok(s) => s,
            Err(Error::Diverged { sample, .. }) => {
                diverged_at = Some(sample);
                break;
            }
            Err(e) => return Err(e),
        };
        if let Some(obs) = observer.as_mut() {
            obs(&StepObservation {
                n,
                x,
                d,
                w_prev: &w_prev,
                e: step.e,
                kappa: step.kappa,
                channel,
            });
        }

        mse = smoothed_mse(mse, step.e, TRACE_MSE_BETA);
        let last = n + 1 == cfg.n_samples;
        if n % cfg.record_every == 0 || last {
            let mis = misalignment_db(channel.taps(), state.weights())?;
            if last {
                final_misalignment_db = mis;
            }
            if n % cfg.record_every == 0 {
                samples.push(MetricSample {
                    n,
                    misalignment_db: mis,
                    kappa: step.kappa,
                    error: step.e,
                    sign_agreement: sign_agreement(
                        channel.taps(),
                        state.weights(),
                        SignScope::ActiveTaps,
                    )?,
                    smoothed_mse: mse,
                });
            }
        }
    }

    Ok(RunTrace {
        algorithm: alg.name.clone(),
        seed,
        samples,
        final_misalignment_db,
        diverged_at,
        realized_snr_db: realized_snr(&inputs.desired),
    })
}

fn realized_snr(desired: &DesiredSignal) -> f64 {
    if desired.noise_variance == 0.0 {
        f64::INFINITY
    } else {
        desired.realized_snr_db()
    }
}

/// Residual (noise-free a-priori) error `(h − w)ᵀ x`.
pub fn residual_error(h: &Channel, w: &[f64], x: &[f64]) -> Result<f64> {
    if h.len() != w.len() || w.len() != x.len() {
        return Err(Error::invalid(format!(
            "residual error: lengths {} / {} / {} differ",
            h.len(),
            w.len(),
            x.len()
        )));
    }
    Ok(h.taps()
        .iter()
        .zip(w)
        .zip(x)
        .map(|((hi, wi), xi)| (hi - wi) * xi)
        .sum())
}

/// Sparseness-distance estimate computed from the true residual error,
/// `|ε·xᵀsgn(w)| / (xᵀx)`. Test oracle for the error-driven estimate.
pub fn oracle_delta_projected(h: &Channel, w: &[f64], x: &[f64]) -> Result<f64> {
    let eps = residual_error(h, w, x)?;
    let energy = dot(x, x);
    if energy == 0.0 {
        return Ok(0.0);
    }
    let proj: f64 = x.iter().zip(w).map(|(xi, wi)| xi * sign(*wi)).sum();
    Ok((eps * proj / energy).abs())
}

/// True l1 sparseness distance `| ‖w‖₁ − ‖h‖₁ | / L`.
pub fn oracle_delta_l1(h: &Channel, w: &[f64]) -> Result<f64> {
    if h.len() != w.len() {
        return Err(Error::invalid("oracle l1 distance: length mismatch"));
    }
    let hl1: f64 = h.taps().iter().map(|v| v.abs()).sum();
    let wl1: f64 = w.iter().map(|v| v.abs()).sum();
    Ok((wl1 - hl1).abs() / h.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recovery {
    /// Samples after the change until the misalignment re-entered (and stayed
    /// in) the band around the pre-change steady state.
    Recovered(usize),
    NotRecovered,
}

impl Recovery {
    pub fn samples(self) -> Option<usize> {
        match self {
            Recovery::Recovered(n) => Some(n),
            Recovery::NotRecovered => None,
        }
    }
}

/// Mean misalignment over the last 10% of recorded samples before `change_at`.
pub fn pre_change_steady_state(samples: &[MetricSample], change_at: usize) -> Result<f64> {
    let pre = samples.partition_point(|s| s.n < change_at);
    if pre == 0 {
        return Err(Error::invalid("no recorded samples before the change"));
    }
    let tail = pre.div_ceil(10);
    let window = &samples[pre - tail..pre];
    Ok(window.iter().map(|s| s.misalignment_db).sum::<f64>() / window.len() as f64)
}

pub fn recovery_time(
    trace: &RunTrace,
    change_at: Option<usize>,
    margin_db: f64,
) -> Result<Recovery> {
    recovery_time_with_hold(&trace.samples, change_at, margin_db, RECOVERY_HOLD)
}

pub fn recovery_time_with_hold(
    samples: &[MetricSample],
    change_at: Option<usize>,
    margin_db: f64,
    hold: usize,
) -> Result<Recovery> {
    let change_at = change_at.ok_or_else(|| Error::invalid("recovery time needs a change_at"))?;
    if margin_db.is_nan() || margin_db <= 0.0 {
        return Err(Error::invalid(format!(
            "margin must be > 0 dB, got {margin_db}"
        )));
    }
    let threshold = pre_change_steady_state(samples, change_at)? + margin_db;
    let start = samples.partition_point(|s| s.n < change_at);
    let post = &samples[start..];
    let hold = hold.max(1);
    let mut run = 0usize;
    for (i, s) in post.iter().enumerate() {
        if s.misalignment_db <= threshold {
            run += 1;
            if run == hold {
                return Ok(Recovery::Recovered(post[i + 1 - hold].n - change_at));
            }
        } else {
            run = 0;
        }
    }
    Ok(Recovery::NotRecovered)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub algorithm: String,
    /// `(n, mean misalignment dB)` over non-diverged seeds.
    pub curve: Vec<(usize, f64)>,
    pub runs: usize,
    pub diverged_seeds: Vec<u64>,
    /// Mean recovery time; unrecovered runs count as the full post-change
    /// horizon. `None` without a path change.
    pub mean_recovery_samples: Option<f64>,
    pub unrecovered_runs: usize,
    pub mean_final_misalignment_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scenario: String,
    pub aggregates: Vec<Aggregate>,
    pub traces: Vec<RunTrace>,
}

impl Comparison {
    pub fn aggregate(&self, algorithm: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.algorithm == algorithm)
    }

    pub fn any_diverged(&self) -> bool {
        self.traces.iter().any(|t| t.diverged_at.is_some())
    }
}

pub fn compare(cfg: &ScenarioConfig) -> Result<Comparison> {
    compare_with_threads(cfg, None)
}

/// Runs every (algorithm, seed) pair, optionally on a dedicated pool of
/// `threads` workers, and aggregates per algorithm.
pub fn compare_with_threads(cfg: &ScenarioConfig, threads: Option<usize>) -> Result<Comparison> {
    cfg.validate()?;
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            pool.install(|| compare_inner(cfg))
        }
        None => compare_inner(cfg),
    }
}

fn compare_inner(cfg: &ScenarioConfig) -> Result<Comparison> {
    let mut unique_seeds = cfg.seeds.clone();
    unique_seeds.sort_unstable();
    unique_seeds.dedup();
    let inputs: Vec<RunInputs> = unique_seeds
        .par_iter()
        .map(|&s| RunInputs::prepare(cfg, s))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, u64)> = (0..cfg.algorithms.len())
        .flat_map(|a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let traces: Vec<RunTrace> = pairs
        .par_iter()
        .map(|&(a, s)| {
            let idx = unique_seeds.binary_search(&s).expect("seed prepared");
            run_with_inputs(cfg, &cfg.algorithms[a], s, &inputs[idx], None)
        })
        .collect::<Result<_>>()?;

    let aggregates = cfg
        .algorithms
        .iter()
        .map(|alg| {
            let runs: Vec<&RunTrace> = traces.iter().filter(|t| t.algorithm == alg.name).collect();
            aggregate_runs(
                &alg.name,
                &runs,
                cfg.change_at,
                cfg.n_samples,
                DEFAULT_RECOVERY_MARGIN_DB,
            )
        })
        .collect::<Result<_>>()?;

    Ok(Comparison {
        scenario: cfg.name.clone(),
        aggregates,
        traces,
    })
}

/// Pointwise mean of dB curves (and recovery/final statistics) across the
/// non-diverged runs of one algorithm. Runs are reduced in seed order, so the
/// result does not depend on the order they are passed in.
pub fn aggregate_runs(
    algorithm: &str,
    runs: &[&RunTrace],
    change_at: Option<usize>,
    n_samples: usize,
    margin_db: f64,
) -> Result<Aggregate> {
    let mut ok: Vec<&RunTrace> = runs
        .iter()
        .copied()
        .filter(|t| t.diverged_at.is_none())
        .collect();
    ok.sort_by_key(|t| t.seed);
    let mut diverged_seeds: Vec<u64> = runs
        .iter()
        .filter(|t| t.diverged_at.is_some())
        .map(|t| t.seed)
        .collect();
    diverged_seeds.sort_unstable();

    let count = ok.len() as f64;
    let curve = match ok.first() {
        None => Vec::new(),
        Some(first) => {
            let mut sums: Vec<f64> = vec![0.0; first.samples.len()];
            for t in &ok {
                if t.samples.len() != sums.len() {
                    return Err(Error::invalid(
                        "cannot aggregate traces of different lengths",
                    ));
                }
                for (acc, s) in sums.iter_mut().zip(&t.samples) {
                    *acc += s.misalignment_db;
                }
            }
            first
                .samples
                .iter()
                .zip(sums)
                .map(|(s, sum)| (s.n, sum / count))
                .collect()
        }
    };

    let mut mean_recovery_samples = None;
    let mut unrecovered_runs = 0;
    if let (Some(at), false) = (change_at, ok.is_empty()) {
        let horizon = n_samples - at;
        let mut total = 0.0;
        for t in &ok {
            match recovery_time(t, Some(at), margin_db)? {
                Recovery::Recovered(k) => total += k as f64,
                Recovery::NotRecovered => {
                    unrecovered_runs += 1;
                    total += horizon as f64;
                }
            }
        }
        mean_recovery_samples = Some(total / count);
    }

    let mean_final_misalignment_db = if ok.is_empty() {
        f64::NAN
    } else {
        ok.iter().map(|t| t.final_misalignment_db).sum::<f64>() / count
    };

    Ok(Aggregate {
        algorithm: algorithm.to_string(),
        curve,
        runs: ok.len(),
        diverged_seeds,
        mean_recovery_samples,
        unrecovered_runs,
        mean_final_misalignment_db,
    })
}
