//! CSV traces and SVG convergence plots.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{Aggregate, RunTrace};

pub const CSV_HEADER: &str =
    "scenario,algorithm,seed,n,e,kappa,misalignment_db,sign_agreement,smoothed_mse";
pub const SUMMARY_HEADER: &str =
    "scenario,algorithm,runs,diverged_seeds,mean_recovery_samples,unrecovered_runs,mean_final_misalignment_db";

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const TICKS: usize = 10;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Shortest decimal text that parses back to exactly `v`. Infinities are
/// written `inf`/`-inf`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Writes one row per recorded sample, sorted by (algorithm, seed, n).
pub fn write_csv<W: Write>(
    scenario: &str,
    traces: &[RunTrace],
    out: &mut W,
) -> std::io::Result<()> {
    let mut order: Vec<&RunTrace> = traces.iter().collect();
    order.sort_by(|a, b| (a.algorithm.as_str(), a.seed).cmp(&(b.algorithm.as_str(), b.seed)));
    writeln!(out, "{CSV_HEADER}")?;
    for t in order {
        let mut samples: Vec<_> = t.samples.iter().collect();
        samples.sort_by_key(|s| s.n);
        for s in samples {
            writeln!(
                out,
                "{scenario},{},{},{},{},{},{},{},{}",
                t.algorithm,
                t.seed,
                s.n,
                format_float(s.error),
                format_float(s.kappa),
                format_float(s.misalignment_db),
                format_float(s.sign_agreement),
                format_float(s.smoothed_mse),
            )?;
        }
    }
    Ok(())
}

pub fn emit_csv(scenario: &str, traces: &[RunTrace], path: &Path) -> Result<()> {
    write_file(path, |w| write_csv(scenario, traces, w))
}

pub fn write_summary<W: Write>(
    scenario: &str,
    aggregates: &[Aggregate],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for a in aggregates {
        let diverged: Vec<String> = a.diverged_seeds.iter().map(u64::to_string).collect();
        writeln!(
            out,
            "{scenario},{},{},{},{},{},{}",
            a.algorithm,
            a.runs,
            diverged.join(" "),
            a.mean_recovery_samples
                .map(format_float)
                .unwrap_or_default(),
            a.unrecovered_runs,
            format_float(a.mean_final_misalignment_db),
        )?;
    }
    Ok(())
}

pub fn emit_summary(scenario: &str, aggregates: &[Aggregate], path: &Path) -> Result<()> {
    write_file(path, |w| write_summary(scenario, aggregates, w))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// Misalignment-vs-sample plot of the aggregate curves. Non-finite points
/// are left out of the polylines.
pub fn render_svg(aggregates: &[Aggregate], title: &str) -> Result<String> {
    if aggregates.is_empty() {
        return Err(Error::invalid("nothing to plot: no curves"));
    }
    let finite = || {
        aggregates
            .iter()
            .flat_map(|a| a.curve.iter())
            .filter(|p| p.1.is_finite())
    };
    let (x_lo, x_hi) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.0 as f64), hi.max(p.0 as f64))
    });
    let (y_lo, y_hi) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.1), hi.max(p.1))
    });
    let (x_lo, x_hi) = if x_lo.is_finite() {
        span(x_lo, x_hi)
    } else {
        (0.0, 1.0)
    };
    let (y_lo, y_hi) = if y_lo.is_finite() {
        span(y_lo, y_hi)
    } else {
        (-1.0, 0.0)
    };

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
        LEFT + pw / 2.0,
        escape_xml(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let (gx, gy) = (px(xv), py(yv));
        let _ = writeln!(
            s,
            r##"<line x1="{gx:.2}" y1="{:.2}" x2="{gx:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            TOP,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{:.0}</text>"#,
            TOP + ph + 18.0,
            xv
        );
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{gy:.2}" x2="{:.2}" y2="{gy:.2}" stroke="#ddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.1}</text>"#,
            LEFT - 6.0,
            gy + 4.0,
            yv
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">samples</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">misalignment (dB)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, a) in aggregates.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = a
            .curve
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(n, y)| format!("{:.2},{:.2}", px(n as f64), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 25.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            escape_xml(&a.algorithm)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(aggregates: &[Aggregate], path: &Path, title: &str) -> Result<()> {
    let doc = render_svg(aggregates, title)?;
    std::fs::write(path, doc).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricSample;
    use proptest::prelude::*;

    fn trace(alg: &str, seed: u64, n: usize) -> RunTrace {
        RunTrace {
            algorithm: alg.into(),
            seed,
            samples: (0..n)
                .map(|i| MetricSample {
                    n: i,
                    misalignment_db: if i == 1 {
                        f64::NEG_INFINITY
                    } else {
                        -(i as f64) / 3.0
                    },
                    kappa: 1e-7 * i as f64,
                    error: 0.1 + i as f64,
                    sign_agreement: 0.5,
                    smoothed_mse: 2.0f64.powi(-(i as i32)),
                })
                .collect(),
            final_misalignment_db: -1.0,
            diverged_at: None,
            realized_snr_db: 30.0,
        }
    }

    fn agg(name: &str, curve: Vec<(usize, f64)>) -> Aggregate {
        Aggregate {
            algorithm: name.into(),
            curve,
            runs: 1,
            diverged_seeds: vec![],
            mean_recovery_samples: None,
            unrecovered_runs: 0,
            mean_final_misalignment_db: -20.0,
        }
    }

    fn csv(traces: &[RunTrace]) -> String {
        let mut buf = Vec::new();
        write_csv("s", traces, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_results_give_header_only() {
        assert_eq!(csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_run_of_three_samples() {
        let text = csv(&[trace("zap", 1, 3)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "s,zap,1,1,1.1,1e-7,-inf,0.5,0.5");
    }

    #[test]
    fn rows_sorted_by_algorithm_then_seed() {
        let text = csv(&[
            trace("b", 2, 1),
            trace("a", 9, 1),
            trace("b", 1, 1),
            trace("a", 3, 1),
        ]);
        let keys: Vec<String> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').skip(1).take(2).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(keys, ["a,3", "a,9", "b,1", "b,2"]);
    }

    #[test]
    fn files_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let traces = [trace("zap", 1, 5), trace("lms", 1, 5)];
        let (p, q) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_csv("s", &traces, &p).unwrap();
        emit_csv("s", &traces, &q).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
    }

    #[test]
    fn unwritable_destination_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_csv("s", &[], &dir.path().join("missing/x.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn summary_rows() {
        let mut a = agg("zap", vec![(0, -1.0)]);
        a.mean_recovery_samples = Some(1500.5);
        a.diverged_seeds = vec![3, 7];
        let mut buf = Vec::new();
        write_summary("s", &[a], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "s,zap,1,3 7,1500.5,0,-20");
    }

    #[test]
    fn svg_has_one_polyline_per_algorithm() {
        let aggs: Vec<Aggregate> = ["a", "b", "c"]
            .iter()
            .enumerate()
            .map(|(i, n)| {
                agg(
                    n,
                    (0..50)
                        .map(|k| (k * 10, -(k as f64) * (i + 1) as f64))
                        .collect(),
                )
            })
            .collect();
        let doc = render_svg(&aggs, "t").unwrap();
        let tree = roxmltree::Document::parse(&doc).unwrap();
        let polylines = tree
            .descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count();
        assert_eq!(polylines, 3);
        assert_eq!(doc, render_svg(&aggs, "t").unwrap());
    }

    #[test]
    fn svg_degenerate_inputs_stay_well_formed() {
        let single = [agg("only <one> & \"quoted\"", vec![(5, -3.0)])];
        roxmltree::Document::parse(&render_svg(&single, "a<b").unwrap()).unwrap();
        let inf = [agg(
            "x",
            vec![(0, f64::NEG_INFINITY), (1, f64::NEG_INFINITY)],
        )];
        roxmltree::Document::parse(&render_svg(&inf, "t").unwrap()).unwrap();
        assert!(render_svg(&[], "t").is_err());
    }

    #[test]
    fn svg_file_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let aggs = [agg("a", vec![(0, 0.0), (1, -10.0)])];
        let (p, q) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        emit_svg(&aggs, &p, "t").unwrap();
        emit_svg(&aggs, &q, "t").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
    }

    proptest! {
        #[test]
        fn floats_round_trip_through_text(v in prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            Just(f64::NEG_INFINITY),
            Just(f64::INFINITY),
            Just(0.0),
        ]) {
            let back: f64 = format_float(v).parse().unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn csv_values_parse_back_exactly(e in -1e6f64..1e6, k in 0.0f64..1.0, m in -100.0f64..10.0) {
            let mut t = trace("a", 1, 1);
            t.samples[0].error = e;
            t.samples[0].kappa = k;
            t.samples[0].misalignment_db = m;
            let text = csv(&[t]);
            let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
            prop_assert_eq!(row[4].parse::<f64>().unwrap(), e);
            prop_assert_eq!(row[5].parse::<f64>().unwrap(), k);
            prop_assert_eq!(row[6].parse::<f64>().unwrap(), m);
        }
    }
}
