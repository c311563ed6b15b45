//! Zero-attracting LMS (ZA-LMS) with interchangeable zero-attractor step-size
//! controllers, and a seeded harness for sparse/dispersive echo-path tracking
//! experiments.
//!
//! The per-sample recursion is
//!
//! ```text
//! e(n) = d(n) - x(n)ᵀ w(n-1)
//! w(n) = w(n-1) + μ x(n) e(n) - κ(n) sgn(w(n-1))
//! ```
//!
//! where κ(n) comes from a [`StepSizeController`].

pub mod channel;
pub mod config;
pub mod error;
pub mod filter;
pub mod harness;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod signal;
pub mod stepsize;

pub use channel::{
    generate_dispersive, generate_sparse, load_channel, save_channel, Channel, ChannelKind,
};
pub use config::{parse_config, parse_config_file, render_config};
pub use error::{Error, Result};
pub use filter::{apply_update, predict_error, sign_vec, FilterState, StepOutcome};
pub use harness::{
    compare, compare_with_threads, recovery_time, run_scenario, Aggregate, AlgorithmSpec,
    ChannelSpec, Comparison, Recovery, RunTrace, ScenarioConfig,
};
pub use metrics::{misalignment_db, norms, sign_agreement, sparsity_xi, MetricSample, SignScope};
pub use report::{emit_csv, emit_summary, emit_svg, write_csv};
pub use signal::{
    generate_input, regressor_at, synthesize_desired, ChannelSchedule, DesiredSignal,
};
pub use stepsize::{
    kappa_smooth, proposed_l1_delta, proposed_norm_delta, ControllerConfig, DetectorConfig,
    SparsenessMeasure, StepSizeController,
};
