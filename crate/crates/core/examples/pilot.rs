//! Parameter pilot for the tracking scenarios.
//!
//! Prints, per algorithm, the pre-change steady state, mean recovery time and
//! final misalignment averaged over seeds. Usage:
//!
//! ```text
//! cargo run --release -p zapvss --example pilot -- <sparse|dispersive> [seeds] [key=value ...]
//! ```
//!
//! Recognized overrides: mu, fixed, you0, you_min, eta, liu_gamma, liu_alpha,
//! liu_lambda, l1_gamma, norm_gamma, alpha, floor, first_seed. The defaults are
//! the calibrated values shipped in `configs/`.

use std::collections::HashMap;

use zapvss::harness::{
    compare, pre_change_steady_state, AlgorithmSpec, ChannelSpec, ScenarioConfig,
};
use zapvss::stepsize::{ControllerConfig, DetectorConfig, SparsenessMeasure};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario = args.first().map(String::as_str).unwrap_or("sparse");
    let seeds: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let mut p: HashMap<&str, f64> = HashMap::from([
        ("mu", 0.003),
        ("fixed", 2e-5),
        ("you0", 3e-4),
        ("you_min", 2e-5),
        ("eta", 0.5),
        ("liu_gamma", 0.02),
        ("liu_alpha", 0.001),
        ("liu_lambda", 0.01),
        ("l1_gamma", 0.004),
        ("norm_gamma", 0.4),
        ("alpha", 0.01),
        ("floor", 1e-2),
        ("first_seed", 1.0),
    ]);
    for kv in args.iter().skip(2) {
        let (k, v) = kv.split_once('=').expect("key=value");
        let slot = p.get_mut(k).unwrap_or_else(|| panic!("unknown key {k}"));
        *slot = v.parse().expect("number");
    }
    let channel = match scenario {
        "sparse" => ChannelSpec::Sparse {
            active_count: 16,
            seed: None,
        },
        _ => ChannelSpec::Dispersive {
            decay: 0.0,
            seed: None,
        },
    };
    let cfg = ScenarioConfig {
        name: scenario.into(),
        filter_len: 512,
        n_samples: 10_000,
        snr_db: 30.0,
        mu: p["mu"],
        sigma_x: 1.0,
        change_at: Some(5000),
        channel_before: channel.clone(),
        channel_after: Some(channel),
        algorithms: vec![
            AlgorithmSpec::new("lms", ControllerConfig::Lms),
            AlgorithmSpec::new("fixed_zap", ControllerConfig::Fixed { kappa0: p["fixed"] }),
            AlgorithmSpec::new(
                "you",
                ControllerConfig::You {
                    kappa0: p["you0"],
                    eta: p["eta"],
                    kappa_min: p["you_min"],
                    detector: DetectorConfig::default(),
                },
            ),
            AlgorithmSpec::new(
                "liu",
                ControllerConfig::Liu {
                    lambda: p["liu_lambda"],
                    alpha: p["liu_alpha"],
                    gamma: p["liu_gamma"],
                    measure: SparsenessMeasure::Xi,
                    kappa0: 0.0,
                    kappa_max: None,
                },
            ),
            AlgorithmSpec::new(
                "proposed_l1",
                ControllerConfig::ProposedL1 {
                    alpha: p["alpha"],
                    gamma: p["l1_gamma"],
                    kappa0: 0.0,
                    kappa_max: None,
                },
            ),
            AlgorithmSpec::new(
                "proposed_norm",
                ControllerConfig::ProposedNorm {
                    alpha: p["alpha"],
                    gamma: p["norm_gamma"],
                    w2_floor: p["floor"],
                    kappa0: 0.0,
                    kappa_max: None,
                },
            ),
        ],
        seeds: (0..seeds).map(|i| p["first_seed"] as u64 + i).collect(),
        record_every: 1,
    };
    let mut cfg = cfg;
    if let Ok(keep) = std::env::var("PILOT_ALGS") {
        let keep: Vec<&str> = keep.split(',').collect();
        cfg.algorithms.retain(|a| keep.contains(&a.name.as_str()));
    }
    let cmp = compare(&cfg).expect("comparison");
    println!(
        "{:<14} {:>10} {:>10} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "algorithm",
        "steady_dB",
        "recovery",
        "unrec",
        "final_dB",
        "k@4999",
        "k@5100",
        "k@5500",
        "k@6500"
    );
    if std::env::var("PILOT_CURVES").is_ok() {
        for agg in &cmp.aggregates {
            let pts: Vec<String> = [
                0usize, 1000, 2000, 3000, 4999, 5100, 5250, 5500, 6000, 6500, 7000, 8000, 9999,
            ]
            .iter()
            .map(|&n| format!("{:.1}", agg.curve[n].1))
            .collect();
            println!("{:<14} {}", agg.algorithm, pts.join(" "));
        }
    }
    for agg in &cmp.aggregates {
        let traces: Vec<_> = cmp
            .traces
            .iter()
            .filter(|t| t.algorithm == agg.algorithm)
            .collect();
        let steady = traces
            .iter()
            .map(|t| pre_change_steady_state(&t.samples, 5000).unwrap())
            .sum::<f64>()
            / traces.len() as f64;
        let kappa_at =
            |n: usize| traces.iter().map(|t| t.samples[n].kappa).sum::<f64>() / traces.len() as f64;
        println!(
            "{:<14} {:>10.2} {:>10.0} {:>6} {:>10.2} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}",
            agg.algorithm,
            steady,
            agg.mean_recovery_samples.unwrap_or(f64::NAN),
            agg.unrecovered_runs,
            agg.mean_final_misalignment_db,
            kappa_at(4999),
            kappa_at(5100),
            kappa_at(5500),
            kappa_at(6500)
        );
    }
}
