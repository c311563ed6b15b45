//! Scenario config files.
//!
//! Flat `key = value` lines grouped under bracketed sections:
//!
//! ```text
//! [scenario]
//! name = sparse_tracking
//! L = 512
//! N = 10000
//! snr_db = 30          # or `inf`
//! mu = 0.003
//! change_at = 5000
//! seeds = 1,2,3
//!
//! [channel.before]
//! kind = sparse
//! active_count = 16
//!
//! [channel.after]
//! file = h_after.txt   # relative to the config file
//!
//! [algorithm]
//! name = proposed
//! kind = proposed_norm
//! gamma = 0.4
//! ```
//!
//! `#` and `;` start comment lines. Unknown sections and keys are rejected.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{AlgorithmSpec, ChannelSpec, ScenarioConfig};
use crate::stepsize::{ControllerConfig, DetectorConfig, SparsenessMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionKind {
    Scenario,
    ChannelBefore,
    ChannelAfter,
    Algorithm,
}

#[derive(Debug)]
struct Section {
    kind: SectionKind,
    line: usize,
    entries: HashMap<String, (String, usize)>,
}

struct Reader<'a> {
    source: &'a str,
    section: Section,
    used: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(source: &'a str, section: Section) -> Self {
        Reader {
            source,
            section,
            used: Vec::new(),
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.source, line, msg)
    }

    fn line_of(&self, key: &str) -> usize {
        self.section
            .entries
            .get(key)
            .map_or(self.section.line, |e| e.1)
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.used.push(key.to_string());
        self.section.entries.get(key).cloned()
    }

    fn opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(line, format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn req<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.opt(key)?
            .ok_or_else(|| self.err(self.section.line, format!("missing required key `{key}`")))
    }

    fn or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    fn string(&mut self, key: &str) -> Option<(String, usize)> {
        self.raw(key)
    }

    /// Rejects every key the section builder did not ask for.
    fn finish(self) -> Result<()> {
        let mut extra: Vec<(&String, usize)> = self
            .section
            .entries
            .iter()
            .filter(|(k, _)| !self.used.contains(k))
            .map(|(k, (_, line))| (k, *line))
            .collect();
        extra.sort_by_key(|e| e.1);
        match extra.first() {
            Some((k, line)) => Err(self.err(*line, format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }

    /// Re-anchors a validation error on the line of the key it names.
    fn range_err(&self, e: Error) -> Error {
        let msg = e.to_string();
        let msg = msg
            .strip_prefix("invalid argument: ")
            .unwrap_or(&msg)
            .to_string();
        let key = msg.split_whitespace().next().unwrap_or("");
        self.err(self.line_of(key), msg)
    }
}

fn split_sections(text: &str, source: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
            continue;
        }
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let kind = match name.trim() {
                "scenario" => SectionKind::Scenario,
                "channel.before" => SectionKind::ChannelBefore,
                "channel.after" => SectionKind::ChannelAfter,
                "algorithm" => SectionKind::Algorithm,
                other => {
                    return Err(Error::parse(
                        source,
                        line,
                        format!("unknown section `[{other}]`"),
                    ))
                }
            };
            if kind != SectionKind::Algorithm && sections.iter().any(|s| s.kind == kind) {
                return Err(Error::parse(
                    source,
                    line,
                    format!("duplicate section `[{}]`", name.trim()),
                ));
            }
            sections.push(Section {
                kind,
                line,
                entries: HashMap::new(),
            });
            continue;
        }
        let Some((k, v)) = t.split_once('=') else {
            return Err(Error::parse(
                source,
                line,
                format!("expected `key = value`, got `{t}`"),
            ));
        };
        let Some(section) = sections.last_mut() else {
            return Err(Error::parse(source, line, "key outside of any section"));
        };
        let key = k.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(Error::parse(source, line, format!("duplicate key `{key}`")));
        }
        section.entries.insert(key, (v.trim().to_string(), line));
    }
    Ok(sections)
}

fn parse_snr(v: &str) -> Option<f64> {
    match v.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        s => s.parse().ok().filter(|x: &f64| x.is_finite()),
    }
}

fn parse_channel(mut r: Reader<'_>, base_dir: &Path) -> Result<ChannelSpec> {
    let spec = if let Some((file, _)) = r.string("file") {
        ChannelSpec::File(base_dir.join(file))
    } else {
        let (kind, line) = r
            .string("kind")
            .ok_or_else(|| r.err(r.section.line, "missing required key `kind` (or `file`)"))?;
        let seed: Option<u64> = r.opt("seed")?;
        match kind.as_str() {
            "sparse" => ChannelSpec::Sparse {
                active_count: r.req("active_count")?,
                seed,
            },
            "dispersive" => {
                let decay: f64 = r.or("decay", 0.0)?;
                if decay.is_nan() || decay < 0.0 {
                    return Err(r.err(
                        r.line_of("decay"),
                        format!("decay must be >= 0, got {decay}"),
                    ));
                }
                ChannelSpec::Dispersive { decay, seed }
            }
            other => {
                return Err(r.err(
                    line,
                    format!("`kind`: expected sparse or dispersive, got `{other}`"),
                ));
            }
        }
    };
    r.finish()?;
    Ok(spec)
}

fn parse_algorithm(mut r: Reader<'_>) -> Result<AlgorithmSpec> {
    let (name, _) = r
        .string("name")
        .ok_or_else(|| r.err(r.section.line, "missing required key `name`"))?;
    let (kind, kind_line) = r
        .string("kind")
        .ok_or_else(|| r.err(r.section.line, "missing required key `kind`"))?;
    let controller = match kind.as_str() {
        "lms" => ControllerConfig::Lms,
        "fixed_zap" => ControllerConfig::Fixed { kappa0: r.req("kappa")? },
        "you" => {
            let window: usize = r.or("window", DetectorConfig::default().window)?;
            ControllerConfig::You {
                kappa0: r.req("kappa0")?,
                eta: r.or("eta", 0.5)?,
                kappa_min: r.req("kappa_min")?,
                detector: DetectorConfig {
                    beta: r.or("beta", DetectorConfig::default().beta)?,
                    window,
                    tolerance: r.or("tolerance", DetectorConfig::default().tolerance)?,
                    cooldown: r.or("cooldown", window)?,
                },
            }
        }
        "liu" => {
            let measure = match r.string("measure") {
                None => SparsenessMeasure::default(),
                Some((m, line)) => match m.as_str() {
                    "xi" => SparsenessMeasure::Xi,
                    "l1" => SparsenessMeasure::L1,
                    other => return Err(r.err(line, format!("`measure`: expected xi or l1, got `{other}`"))),
                },
            };
            ControllerConfig::Liu {
                lambda: r.or("lambda", 0.01)?,
                alpha: r.or("alpha", 0.01)?,
                gamma: r.req("gamma")?,
                measure,
                kappa0: r.or("kappa0", 0.0)?,
                kappa_max: r.opt("kappa_max")?,
            }
        }
        "proposed_l1" => ControllerConfig::ProposedL1 {
            alpha: r.or("alpha", 0.01)?,
            gamma: r.req("gamma")?,
            kappa0: r.or("kappa0", 0.0)?,
            kappa_max: r.opt("kappa_max")?,
        },
        "proposed_norm" => ControllerConfig::ProposedNorm {
            alpha: r.or("alpha", 0.01)?,
            gamma: r.req("gamma")?,
            w2_floor: r.or("w2_floor", 1e-2)?,
            kappa0: r.or("kappa0", 0.0)?,
            kappa_max: r.opt("kappa_max")?,
        },
        other => {
            return Err(r.err(
                kind_line,
                format!("`kind`: expected one of lms, fixed_zap, you, liu, proposed_l1, proposed_norm; got `{other}`"),
            ))
        }
    };
    controller.validate().map_err(|e| r.range_err(e))?;
    r.finish()?;
    Ok(AlgorithmSpec { name, controller })
}

/// Parses and validates a scenario. Relative channel file paths resolve
/// against `base_dir`.
pub fn parse_config(text: &str, source: &str, base_dir: &Path) -> Result<ScenarioConfig> {
    let sections = split_sections(text, source)?;
    let mut scenario = None;
    let mut before = None;
    let mut after = None;
    let mut algorithms: Vec<(AlgorithmSpec, usize)> = Vec::new();

    for section in sections {
        let kind = section.kind;
        let line = section.line;
        let r = Reader::new(source, section);
        match kind {
            SectionKind::Scenario => scenario = Some(r),
            SectionKind::ChannelBefore => before = Some(parse_channel(r, base_dir)?),
            SectionKind::ChannelAfter => after = Some((parse_channel(r, base_dir)?, line)),
            SectionKind::Algorithm => {
                let alg = parse_algorithm(r)?;
                if algorithms.iter().any(|(a, _)| a.name == alg.name) {
                    return Err(Error::parse(
                        source,
                        line,
                        format!("duplicate algorithm name `{}`", alg.name),
                    ));
                }
                algorithms.push((alg, line));
            }
        }
    }

    let mut r = scenario.ok_or_else(|| Error::parse(source, 1, "missing [scenario] section"))?;
    let channel_before =
        before.ok_or_else(|| Error::parse(source, 1, "missing [channel.before] section"))?;
    if algorithms.is_empty() {
        return Err(Error::parse(
            source,
            1,
            "at least one [algorithm] section is required",
        ));
    }

    let name = r
        .string("name")
        .map_or_else(|| "scenario".to_string(), |v| v.0);
    let filter_len: usize = r.req("L")?;
    let n_samples: usize = r.req("N")?;
    let (snr_raw, snr_line) = r
        .string("snr_db")
        .ok_or_else(|| r.err(r.section.line, "missing required key `snr_db`"))?;
    let snr_db = parse_snr(&snr_raw)
        .ok_or_else(|| r.err(snr_line, format!("`snr_db`: cannot parse `{snr_raw}`")))?;
    let mu: f64 = r.req("mu")?;
    let sigma_x: f64 = r.or("sigma_x", 1.0)?;
    let change_at: Option<usize> = r.opt("change_at")?;
    let record_every: usize = r.or("record_every", 1)?;
    let (seeds_raw, seeds_line) = r
        .string("seeds")
        .ok_or_else(|| r.err(r.section.line, "missing required key `seeds`"))?;
    let seeds = seeds_raw
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| {
            r.err(
                seeds_line,
                format!("`seeds`: expected comma-separated integers, got `{seeds_raw}`"),
            )
        })?;

    let cfg = ScenarioConfig {
        name,
        filter_len,
        n_samples,
        snr_db,
        mu,
        sigma_x,
        change_at,
        channel_before,
        channel_after: after.map(|a| a.0),
        algorithms: algorithms.into_iter().map(|a| a.0).collect(),
        seeds,
        record_every,
    };
    cfg.validate().map_err(|e| {
        let msg = e.to_string();
        let key = [
            "L",
            "N",
            "mu",
            "sigma_x",
            "snr_db",
            "record_every",
            "change_at",
        ]
        .into_iter()
        .find(|k| msg.contains(&format!("{k} ")));
        let line = key.map_or(r.section.line, |k| r.line_of(k));
        Error::parse(
            source,
            line,
            msg.strip_prefix("invalid argument: ")
                .unwrap_or(&msg)
                .to_string(),
        )
    })?;
    r.finish()?;
    Ok(cfg)
}

pub fn parse_config_file(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    parse_config(&text, &path.display().to_string(), &base)
}

fn render_channel(out: &mut String, header: &str, spec: &ChannelSpec) {
    let _ = writeln!(out, "\n[{header}]");
    match spec {
        ChannelSpec::Sparse { active_count, seed } => {
            let _ = writeln!(out, "kind = sparse\nactive_count = {active_count}");
            if let Some(s) = seed {
                let _ = writeln!(out, "seed = {s}");
            }
        }
        ChannelSpec::Dispersive { decay, seed } => {
            let _ = writeln!(out, "kind = dispersive\ndecay = {decay}");
            if let Some(s) = seed {
                let _ = writeln!(out, "seed = {s}");
            }
        }
        ChannelSpec::File(path) => {
            let _ = writeln!(out, "file = {}", path.display());
        }
    }
}

/// Canonical text form; `parse_config` of the result reproduces `cfg`
/// (absolute channel paths, or relative ones re-read from the same base).
pub fn render_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[scenario]");
    let _ = writeln!(out, "name = {}", cfg.name);
    let _ = writeln!(out, "L = {}", cfg.filter_len);
    let _ = writeln!(out, "N = {}", cfg.n_samples);
    if cfg.snr_db.is_infinite() {
        let _ = writeln!(out, "snr_db = inf");
    } else {
        let _ = writeln!(out, "snr_db = {}", cfg.snr_db);
    }
    let _ = writeln!(out, "mu = {}", cfg.mu);
    let _ = writeln!(out, "sigma_x = {}", cfg.sigma_x);
    if let Some(c) = cfg.change_at {
        let _ = writeln!(out, "change_at = {c}");
    }
    let _ = writeln!(out, "record_every = {}", cfg.record_every);
    let seeds: Vec<String> = cfg.seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(out, "seeds = {}", seeds.join(","));

    render_channel(&mut out, "channel.before", &cfg.channel_before);
    if let Some(after) = &cfg.channel_after {
        render_channel(&mut out, "channel.after", after);
    }

    for alg in &cfg.algorithms {
        let _ = writeln!(
            out,
            "\n[algorithm]\nname = {}\nkind = {}",
            alg.name,
            alg.controller.kind_name()
        );
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &alg.controller {
            ControllerConfig::Lms => {}
            ControllerConfig::Fixed { kappa0 } => kv("kappa", kappa0.to_string()),
            ControllerConfig::You {
                kappa0,
                eta,
                kappa_min,
                detector,
            } => {
                kv("kappa0", kappa0.to_string());
                kv("eta", eta.to_string());
                kv("kappa_min", kappa_min.to_string());
                kv("beta", detector.beta.to_string());
                kv("window", detector.window.to_string());
                kv("tolerance", detector.tolerance.to_string());
                kv("cooldown", detector.cooldown.to_string());
            }
            ControllerConfig::Liu {
                lambda,
                alpha,
                gamma,
                measure,
                kappa0,
                kappa_max,
            } => {
                kv("lambda", lambda.to_string());
                kv("alpha", alpha.to_string());
                kv("gamma", gamma.to_string());
                kv("measure", measure.as_str().to_string());
                kv("kappa0", kappa0.to_string());
                if let Some(k) = kappa_max {
                    kv("kappa_max", k.to_string());
                }
            }
            ControllerConfig::ProposedL1 {
                alpha,
                gamma,
                kappa0,
                kappa_max,
            } => {
                kv("alpha", alpha.to_string());
                kv("gamma", gamma.to_string());
                kv("kappa0", kappa0.to_string());
                if let Some(k) = kappa_max {
                    kv("kappa_max", k.to_string());
                }
            }
            ControllerConfig::ProposedNorm {
                alpha,
                gamma,
                w2_floor,
                kappa0,
                kappa_max,
            } => {
                kv("alpha", alpha.to_string());
                kv("gamma", gamma.to_string());
                kv("w2_floor", w2_floor.to_string());
                kv("kappa0", kappa0.to_string());
                if let Some(k) = kappa_max {
                    kv("kappa_max", k.to_string());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "\
[scenario]
L = 64
N = 1000
snr_db = 30
mu = 0.01
seeds = 1

[channel.before]
kind = sparse
active_count = 4

[algorithm]
name = zap
kind = fixed_zap
kappa = 1e-4
";

    fn parse(text: &str) -> Result<ScenarioConfig> {
        parse_config(text, "test.conf", Path::new("/cfg"))
    }

    fn parse_err(text: &str) -> (usize, String) {
        match parse(text) {
            Err(Error::Parse { line, message, .. }) => (line, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.filter_len, 64);
        assert_eq!(cfg.record_every, 1);
        assert_eq!(cfg.sigma_x, 1.0);
        assert_eq!(cfg.change_at, None);
        assert_eq!(cfg.name, "scenario");
        assert_eq!(
            cfg.channel_before,
            ChannelSpec::Sparse {
                active_count: 4,
                seed: None
            }
        );
        assert_eq!(
            cfg.algorithms[0].controller,
            ControllerConfig::Fixed { kappa0: 1e-4 }
        );
    }

    #[test]
    fn dispersive_decay_defaults_to_zero() {
        let text = MINIMAL.replace(
            "kind = sparse\nactive_count = 4",
            "kind = dispersive\nseed = 3",
        );
        let cfg = parse(&text).unwrap();
        assert_eq!(
            cfg.channel_before,
            ChannelSpec::Dispersive {
                decay: 0.0,
                seed: Some(3)
            }
        );
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("mu = 0.01", "mu = 0.01\nunknown_key=3");
        let (line, msg) = parse_err(&text);
        assert_eq!(line, 6);
        assert!(msg.contains("unknown_key"), "{msg}");
    }

    #[test]
    fn alpha_out_of_range_in_liu() {
        let text =
            format!("{MINIMAL}\n[algorithm]\nname = liu\nkind = liu\ngamma = 0.1\nalpha = 1.5\n");
        let (line, msg) = parse_err(&text);
        assert!(msg.contains("alpha") && msg.contains("(0,1)"), "{msg}");
        assert_eq!(line, 21);
    }

    #[test]
    fn structural_errors() {
        let (_, msg) = parse_err(&MINIMAL.replace("mu = 0.01\n", ""));
        assert!(msg.contains("`mu`"), "{msg}");
        let dup = format!("{MINIMAL}\n[algorithm]\nname = zap\nkind = lms\n");
        assert!(parse_err(&dup).1.contains("duplicate algorithm"));
        assert!(parse_err(&format!("{MINIMAL}\n[bogus]\n"))
            .1
            .contains("unknown section"));
        assert!(
            parse_err(&MINIMAL.replace("kind = fixed_zap", "kind = rls"))
                .1
                .contains("rls")
        );
        assert!(parse_err(&MINIMAL.replace("seeds = 1", "seeds = 1,x"))
            .1
            .contains("seeds"));
        let (line, msg) = parse_err(&MINIMAL.replace("L = 64", "L = 1"));
        assert_eq!(line, 2, "{msg}");
        let change = MINIMAL.replace("seeds = 1", "seeds = 1\nchange_at = 500");
        assert!(parse_err(&change).1.contains("channel.after"));
    }

    #[test]
    fn snr_accepts_inf() {
        let cfg = parse(&MINIMAL.replace("snr_db = 30", "snr_db = inf")).unwrap();
        assert_eq!(cfg.snr_db, f64::INFINITY);
    }

    #[test]
    fn channel_file_resolves_relative_to_config() {
        let text = MINIMAL.replace("kind = sparse\nactive_count = 4", "file = h.txt");
        let cfg = parse(&text).unwrap();
        assert_eq!(
            cfg.channel_before,
            ChannelSpec::File(PathBuf::from("/cfg/h.txt"))
        );
    }

    fn arb_controller() -> impl Strategy<Value = ControllerConfig> {
        let unit = 0.001f64..0.999;
        prop_oneof![
            Just(ControllerConfig::Lms),
            (0.0f64..1.0).prop_map(|k| ControllerConfig::Fixed { kappa0: k }),
            (
                0.0f64..1.0,
                unit.clone(),
                1e-6f64..1.0,
                unit.clone(),
                1usize..500,
                1e-3f64..1.0,
                0usize..500
            )
                .prop_map(
                    |(kappa0, eta, kappa_min, beta, window, tolerance, cooldown)| {
                        ControllerConfig::You {
                            kappa0,
                            eta,
                            kappa_min,
                            detector: DetectorConfig {
                                beta,
                                window,
                                tolerance,
                                cooldown,
                            },
                        }
                    }
                ),
            (
                unit.clone(),
                unit.clone(),
                1e-4f64..10.0,
                any::<bool>(),
                0.0f64..1.0,
                prop::option::of(1e-5f64..1.0)
            )
                .prop_map(|(lambda, alpha, gamma, l1, kappa0, kappa_max)| {
                    ControllerConfig::Liu {
                        lambda,
                        alpha,
                        gamma,
                        measure: if l1 {
                            SparsenessMeasure::L1
                        } else {
                            SparsenessMeasure::Xi
                        },
                        kappa0,
                        kappa_max,
                    }
                }),
            (
                unit.clone(),
                1e-4f64..10.0,
                0.0f64..1.0,
                prop::option::of(1e-5f64..1.0)
            )
                .prop_map(|(alpha, gamma, kappa0, kappa_max)| {
                    ControllerConfig::ProposedL1 {
                        alpha,
                        gamma,
                        kappa0,
                        kappa_max,
                    }
                }),
            (
                unit,
                1e-4f64..10.0,
                1e-6f64..1.0,
                0.0f64..1.0,
                prop::option::of(1e-5f64..1.0)
            )
                .prop_map(|(alpha, gamma, w2_floor, kappa0, kappa_max)| {
                    ControllerConfig::ProposedNorm {
                        alpha,
                        gamma,
                        w2_floor,
                        kappa0,
                        kappa_max,
                    }
                }),
        ]
    }

    fn arb_channel() -> impl Strategy<Value = ChannelSpec> {
        prop_oneof![
            (1usize..8, prop::option::of(any::<u64>()))
                .prop_map(|(active_count, seed)| ChannelSpec::Sparse { active_count, seed }),
            (0.0f64..5.0, prop::option::of(any::<u64>()))
                .prop_map(|(decay, seed)| ChannelSpec::Dispersive { decay, seed }),
            "[a-z]{1,8}\\.txt".prop_map(|f| ChannelSpec::File(PathBuf::from("/cfg").join(f))),
        ]
    }

    prop_compose! {
        fn arb_config()(
            name in "[a-z_]{1,12}",
            n_samples in 2usize..100_000,
            snr in prop_oneof![Just(f64::INFINITY), -10.0f64..60.0],
            mu in 1e-5f64..1.0,
            sigma_x in 0.01f64..10.0,
            change_frac in prop::option::of(0.01f64..0.99),
            before in arb_channel(),
            after in arb_channel(),
            controllers in prop::collection::vec(arb_controller(), 1..5),
            seeds in prop::collection::vec(any::<u64>(), 1..6),
            record_every in 1usize..20,
        ) -> ScenarioConfig {
            let change_at = change_frac.map(|f| ((n_samples as f64 * f) as usize).clamp(1, n_samples - 1));
            ScenarioConfig {
                name,
                filter_len: 8,
                n_samples,
                snr_db: snr,
                mu,
                sigma_x,
                change_at,
                channel_before: before,
                channel_after: change_at.map(|_| after),
                algorithms: controllers
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| AlgorithmSpec::new(format!("alg{i}"), c))
                    .collect(),
                seeds,
                record_every,
            }
        }
    }

    proptest! {
        #[test]
        fn canonical_form_round_trips(cfg in arb_config()) {
            let text = render_config(&cfg);
            let back = parse(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
