use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zapvss::harness::{compare_with_threads, Comparison};
use zapvss::report::{emit_csv, emit_summary, emit_svg};
use zapvss::{
    generate_dispersive, generate_sparse, parse_config_file, save_channel, Error, ScenarioConfig,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "zapvss",
    version,
    about = "ZA-LMS echo-path tracking simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm and seed of a scenario; write trace CSV, summary CSV and SVG plot.
    Run(RunArgs),
    /// Like `run`, but prints the per-algorithm aggregates and only writes files with `--out`.
    Compare(CompareArgs),
    /// Generate a channel file.
    GenChannel(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelType {
    Sparse,
    Dispersive,
}

#[derive(Args)]
struct GenArgs {
    /// Number of taps.
    #[arg(long = "L", value_name = "L")]
    len: usize,
    #[arg(long = "type", value_enum)]
    kind: ChannelType,
    /// Nonzero taps (sparse only).
    #[arg(long)]
    active: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Exponential envelope rate (dispersive only).
    #[arg(long, default_value_t = 0.0)]
    decay: f64,
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }

    fn runtime(e: &Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_IO,
            Error::Parse { .. } => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    parse_config_file(path).map_err(|e| match e {
        Error::Io { .. } => Failure {
            code: EXIT_IO,
            message: e.to_string(),
        },
        other => Failure::config(other),
    })
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var("ZAPVSS_THREADS") {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::config(format!(
                "ZAPVSS_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn simulate(config: &Path) -> Result<(ScenarioConfig, Comparison), Failure> {
    let cfg = load(config)?;
    let cmp = compare_with_threads(&cfg, thread_cap()?).map_err(|e| Failure::runtime(&e))?;
    Ok((cfg, cmp))
}

fn write_outputs(cmp: &Comparison, out: &Path) -> Result<Vec<PathBuf>, Failure> {
    std::fs::create_dir_all(out).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot create {}: {e}", out.display()),
    })?;
    let name = &cmp.scenario;
    let trace = out.join(format!("{name}_trace.csv"));
    let summary = out.join(format!("{name}_summary.csv"));
    let plot = out.join(format!("{name}.svg"));
    emit_csv(name, &cmp.traces, &trace).map_err(|e| Failure::runtime(&e))?;
    emit_summary(name, &cmp.aggregates, &summary).map_err(|e| Failure::runtime(&e))?;
    emit_svg(
        &cmp.aggregates,
        &plot,
        &format!("{name}: normalized misalignment"),
    )
    .map_err(|e| Failure::runtime(&e))?;
    Ok(vec![trace, summary, plot])
}

fn aggregate_table(cmp: &Comparison) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>5} {:>9} {:>10} {:>12} {:>10}",
        "algorithm", "runs", "diverged", "recovery", "unrecovered", "final_dB"
    );
    for a in &cmp.aggregates {
        let recovery = a
            .mean_recovery_samples
            .map_or("-".to_string(), |r| format!("{r:.0}"));
        let _ = writeln!(
            s,
            "{:<16} {:>5} {:>9} {:>10} {:>12} {:>10.2}",
            a.algorithm,
            a.runs,
            a.diverged_seeds.len(),
            recovery,
            a.unrecovered_runs,
            a.mean_final_misalignment_db
        );
    }
    s
}

/// Divergence is reported after all outputs are written.
fn divergence(cmp: &Comparison) -> Result<(), Failure> {
    let diverged: Vec<String> = cmp
        .traces
        .iter()
        .filter_map(|t| {
            t.diverged_at
                .map(|n| format!("{} seed {} at sample {n}", t.algorithm, t.seed))
        })
        .collect();
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_RUNTIME,
            message: format!("diverged runs: {}", diverged.join("; ")),
        })
    }
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let (_, cmp) = simulate(&args.config)?;
    for path in write_outputs(&cmp, &args.out)? {
        println!("wrote {}", path.display());
    }
    print!("{}", aggregate_table(&cmp));
    divergence(&cmp)
}

fn compare(args: &CompareArgs) -> Result<(), Failure> {
    let (cfg, cmp) = simulate(&args.config)?;
    println!(
        "scenario {} (L={}, N={}, {} seeds)",
        cfg.name,
        cfg.filter_len,
        cfg.n_samples,
        cfg.seeds.len()
    );
    print!("{}", aggregate_table(&cmp));
    if let Some(out) = &args.out {
        for path in write_outputs(&cmp, out)? {
            println!("wrote {}", path.display());
        }
    }
    divergence(&cmp)
}

fn gen_channel(args: &GenArgs) -> Result<(), Failure> {
    let channel = match args.kind {
        ChannelType::Sparse => {
            let active = args
                .active
                .ok_or_else(|| Failure::config("--active is required for sparse channels"))?;
            generate_sparse(args.len, active, args.seed)
        }
        ChannelType::Dispersive => generate_dispersive(args.len, args.seed, args.decay),
    }
    .map_err(Failure::config)?;
    save_channel(&channel, &args.out).map_err(|e| Failure::runtime(&e))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::GenChannel(a) => gen_channel(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
