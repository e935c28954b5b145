//! Batch front end: sweeps, Monte Carlo runs, limit reports and single-point
//! allocations, rendered as CSV or plain text.

pub mod config;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::allocation::{allocate_closed_form, allocate_oracle, energy_of, weighted_data, Scheme};
use crate::error::{Error, Result};
use crate::geometry::segment_plan;
use crate::limits::{finite_energy_sum, limit_energy, limit_energy_as_printed, limit_energy_exact};
use crate::link::SnrModel;
use crate::montecarlo::{run_montecarlo, SchemeConfig, Stats, VelocityErrorModel};
use crate::schemes::OperatingContext;
use crate::units::Dbm;

pub use config::{Provenance, Resolved, RunConfig, SigmaV, Sweep, SweepVar};

pub const SWEEP_HEADER: [&str; 11] = [
    "sweep_var",
    "value",
    "scheme",
    "mode",
    "N",
    "P_ref_dbm",
    "energy",
    "data",
    "energy_efficiency",
    "warnings_count",
    "error",
];

pub const MONTECARLO_HEADER: [&str; 24] = [
    "sweep_var",
    "value",
    "scheme",
    "mode",
    "N",
    "P_ref_dbm",
    "sigma_v",
    "seed",
    "trials",
    "successes",
    "failures",
    "energy_mean",
    "energy_std",
    "energy_ci95_lo",
    "energy_ci95_hi",
    "data_mean",
    "data_std",
    "data_ci95_lo",
    "data_ci95_hi",
    "energy_efficiency_mean",
    "energy_efficiency_std",
    "energy_efficiency_ci95_lo",
    "energy_efficiency_ci95_hi",
    "error",
];

/// Rendered command output and the number of rows that carry an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub error_rows: usize,
}

/// One operating point of a run: the sweep coordinate (if any) and the
/// configuration evaluated there.
#[derive(Debug, Clone)]
pub struct Point {
    pub coordinate: Option<(SweepVar, f64)>,
    pub config: RunConfig,
}

impl Point {
    fn label(&self) -> (String, String) {
        match self.coordinate {
            Some((var, value)) => (var.as_str().to_string(), value.to_string()),
            None => ("none".to_string(), String::new()),
        }
    }
}

/// Sweep points in ascending order, or the single configured point.
pub fn points(config: &RunConfig) -> Vec<Result<Point>> {
    match config.sweep {
        None => vec![Ok(Point {
            coordinate: None,
            config: config.clone(),
        })],
        Some(s) => s
            .values()
            .into_iter()
            .map(|value| {
                config.at(s.var, value).map(|c| Point {
                    coordinate: Some((s.var, value)),
                    config: c,
                })
            })
            .collect(),
    }
}

fn n_label(scheme: Scheme, n: usize) -> String {
    if scheme == Scheme::OtpaInf {
        "inf".to_string()
    } else {
        n.to_string()
    }
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn context(point: &Point, p_ref: Dbm) -> Result<OperatingContext> {
    let c = &point.config;
    OperatingContext::new(c.geometry()?, c.budget()?, c.mode, p_ref)
}

/// Deterministic scheme comparison; rows are ordered by sweep value, then
/// reference power, then scheme.
pub fn run_sweep(config: &RunConfig) -> Output {
    let pts = points(config);
    let jobs: Vec<(&Result<Point>, Dbm)> = pts
        .iter()
        .flat_map(|p| config.p_ref.iter().map(move |&pr| (p, pr)))
        .collect();
    let blocks: Vec<Vec<(Vec<String>, bool)>> = jobs
        .par_iter()
        .map(|&(point, p_ref)| sweep_rows(config, point, p_ref))
        .collect();
    let rows: Vec<(Vec<String>, bool)> = blocks.into_iter().flatten().collect();
    let error_rows = rows.iter().filter(|(_, failed)| *failed).count();
    Output {
        text: csv_text(&SWEEP_HEADER, rows.into_iter().map(|(r, _)| r).collect()),
        error_rows,
    }
}

fn sweep_rows(config: &RunConfig, point: &Result<Point>, p_ref: Dbm) -> Vec<(Vec<String>, bool)> {
    let (var, value, n) = match point {
        Ok(p) => {
            let (var, value) = p.label();
            (var, value, p.config.n_segments)
        }
        Err(_) => (String::new(), String::new(), config.n_segments),
    };
    let ctx = point
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|p| context(p, p_ref));
    config
        .schemes
        .iter()
        .map(|&scheme| {
            let outcome = ctx
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|c| c.evaluate(scheme));
            let mut row = vec![
                var.clone(),
                value.clone(),
                scheme.as_str().to_string(),
                config.mode.as_str().to_string(),
                n_label(scheme, n),
                p_ref.0.to_string(),
            ];
            match &outcome {
                Ok(r) => row.extend([
                    r.energy.to_string(),
                    r.data.to_string(),
                    r.energy_efficiency.to_string(),
                    r.warnings.to_string(),
                    String::new(),
                ]),
                Err(e) => row.extend([
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.to_string(),
                ]),
            }
            (row, outcome.is_err())
        })
        .collect()
}

/// Monte Carlo aggregates per sweep point, reference power and scheme.
/// Points run one after another; trials inside a point run in parallel.
pub fn run_montecarlo_cmd(config: &RunConfig) -> Output {
    let mut rows = Vec::new();
    let mut error_rows = 0;
    for point in points(config) {
        for &p_ref in &config.p_ref {
            let block = montecarlo_rows(config, &point, p_ref);
            error_rows += block.iter().filter(|(_, failed)| *failed).count();
            rows.extend(block.into_iter().map(|(r, _)| r));
        }
    }
    Output {
        text: csv_text(&MONTECARLO_HEADER, rows),
        error_rows,
    }
}

fn stats_fields(s: &Stats) -> [String; 4] {
    [
        s.mean.to_string(),
        s.std.to_string(),
        s.ci95_lo.to_string(),
        s.ci95_hi.to_string(),
    ]
}

fn montecarlo_rows(
    config: &RunConfig,
    point: &Result<Point>,
    p_ref: Dbm,
) -> Vec<(Vec<String>, bool)> {
    let prepared = point.as_ref().map_err(Clone::clone).and_then(|p| {
        let c = &p.config;
        let model = VelocityErrorModel::new(c.sigma_v.resolve(c.v), c.seed, c.trials)?;
        Ok((p, c.geometry()?, c.budget()?, model))
    });
    let (var, value, n, sigma) = match &prepared {
        Ok((p, _, _, m)) => {
            let (var, value) = p.label();
            (var, value, p.config.n_segments, m.sigma_v().to_string())
        }
        Err(_) => (
            String::new(),
            String::new(),
            config.n_segments,
            String::new(),
        ),
    };
    let prefix = |scheme: Scheme| {
        vec![
            var.clone(),
            value.clone(),
            scheme.as_str().to_string(),
            config.mode.as_str().to_string(),
            n_label(scheme, n),
            p_ref.0.to_string(),
            sigma.clone(),
            config.seed.to_string(),
            config.trials.to_string(),
        ]
    };
    match prepared {
        Err(e) => config
            .schemes
            .iter()
            .map(|&scheme| {
                let mut row = prefix(scheme);
                row.extend(["0".to_string(), config.trials.to_string()]);
                row.extend(std::iter::repeat_n(String::new(), 12));
                row.push(e.to_string());
                (row, true)
            })
            .collect(),
        Ok((_, geometry, budget, model)) => {
            let schemes = SchemeConfig {
                schemes: config.schemes.clone(),
                p_ref,
            };
            let summary = run_montecarlo(&geometry, &budget, config.mode, &model, &schemes);
            summary
                .aggregates
                .iter()
                .map(|agg| {
                    let mut row = prefix(agg.scheme);
                    row.extend([agg.successes.to_string(), agg.failures.to_string()]);
                    row.extend(stats_fields(&agg.energy));
                    row.extend(stats_fields(&agg.data));
                    row.extend(stats_fields(&agg.energy_efficiency));
                    row.push(agg.first_error.clone().unwrap_or_default());
                    (row, agg.failures > 0)
                })
                .collect()
        }
    }
}

/// Segment counts of the convergence table.
pub const LIMIT_LADDER: [usize; 11] = [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048];

/// Infinite-segment energy report for every point and reference power.
pub fn run_limit_cmd(config: &RunConfig) -> Result<String> {
    config.mode.require(SnrModel::PaperLiteral)?;
    let mut out = String::new();
    for point in points(config) {
        let point = point?;
        for &p_ref in &config.p_ref {
            let ctx = context(&point, p_ref)?;
            let (g, b, req) = (&ctx.geometry, &ctx.budget, &ctx.d_fixed);
            let exact = limit_energy_exact(g, b, req)?;
            let derived = limit_energy(g, b, req)?;
            let unit = config.mode.energy_unit();
            let _ = writeln!(
                out,
                "point d0={} m dl={} m v={} m/s P_ref={} dBm mode={}",
                g.d0(),
                g.dl(),
                g.v(),
                p_ref.0,
                config.mode
            );
            let _ = writeln!(out, "D_fixed = {} bit/Hz", req.value());
            let _ = writeln!(out, "E_inf exact = {exact} {unit}");
            let _ = writeln!(out, "E_inf closed form (derived) = {derived} {unit}");
            if config.eq40_as_printed {
                let printed = limit_energy_as_printed(g, b, req)?;
                let _ = writeln!(out, "E_inf closed form (printed) = {printed} {unit}");
                let _ = writeln!(
                    out,
                    "derived vs printed: {derived} vs {printed}, ratio {}",
                    printed / derived
                );
            }
            let _ = writeln!(out, "N,E(N),rel_gap_exact,rel_gap_closed_form");
            for &n in &LIMIT_LADDER {
                let e = finite_energy_sum(&g.with_segments(n)?, b, req)?;
                let _ = writeln!(
                    out,
                    "{n},{e},{},{}",
                    (e - exact) / exact,
                    (e - derived) / derived
                );
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Per-segment powers and constraint residual of the optimized allocation
/// at every point and reference power. The physical model adds the
/// water-filling optimum.
pub fn run_allocate_cmd(config: &RunConfig) -> Result<String> {
    let mut out = String::new();
    for point in points(config) {
        let point = point?;
        for &p_ref in &config.p_ref {
            let ctx = context(&point, p_ref)?;
            let plan = segment_plan(&ctx.geometry)?;
            let g = &ctx.geometry;
            let _ = writeln!(
                out,
                "point d0={} m dl={} m v={} m/s N={} P_ref={} dBm mode={}",
                g.d0(),
                g.dl(),
                g.v(),
                g.n_segments(),
                p_ref.0,
                config.mode
            );
            let _ = writeln!(out, "D_fixed = {} bit/Hz", ctx.d_fixed.value());
            let mut allocations = vec![allocate_closed_form(&plan, &ctx.budget, &ctx.d_fixed)?];
            if config.mode == SnrModel::Physical {
                allocations.push(allocate_oracle(&plan, &ctx.budget, &ctx.d_fixed)?);
            }
            for alloc in &allocations {
                let delivered = weighted_data(&plan, &ctx.budget, alloc)?;
                let residual = if ctx.d_fixed.value() == 0.0 {
                    delivered
                } else {
                    (delivered - ctx.d_fixed.value()) / ctx.d_fixed.value()
                };
                let _ = writeln!(out, "allocation {}", alloc.scheme());
                let _ = writeln!(out, "segment,width_m,midpoint_distance_m,dwell_s,power_dbm");
                for (i, p) in alloc.powers().iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        i + 1,
                        plan.widths()[i],
                        plan.midpoint_distances()[i],
                        plan.dwell_times()[i],
                        p.0
                    );
                }
                let _ = writeln!(
                    out,
                    "energy = {} {}",
                    energy_of(&plan, alloc)?,
                    config.mode.energy_unit()
                );
                let _ = writeln!(out, "constraint residual = {residual}");
                if alloc.negative_powers() > 0 {
                    let _ = writeln!(out, "warning: {} negative powers", alloc.negative_powers());
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parses a whole configuration from file text and flag pairs, in that
/// order of precedence.
pub fn resolve(file_text: Option<&str>, flags: &[(&str, String)]) -> Result<Resolved> {
    let mut r = Resolved::default();
    if let Some(text) = file_text {
        r.apply_file_text(text)?;
    }
    for (key, raw) in flags {
        r.apply(key, raw, Provenance::Flag)
            .map_err(|e| Error::Config(format!("--{}: {e}", key.replace('_', "-"))))?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lines: &str) -> RunConfig {
        let mut r = Resolved::default();
        r.apply_file_text(lines).unwrap();
        r.config
    }

    fn column(csv: &str, name: &str) -> Vec<String> {
        let mut rd = csv::Reader::from_reader(csv.as_bytes());
        let idx = rd
            .headers()
            .unwrap()
            .iter()
            .position(|h| h == name)
            .unwrap();
        rd.records().map(|r| r.unwrap()[idx].to_string()).collect()
    }

    #[test]
    fn sweep_cardinality_and_order() {
        let c = cfg("sweep = dl:60m:200m:20m\np_ref = 40 dBm\nschemes = all\n");
        let out = run_sweep(&c);
        assert_eq!(out.text.lines().count(), 41);
        let schemes = column(&out.text, "scheme");
        assert_eq!(
            &schemes[..5],
            &["MCTP", "OTPA", "MTPA", "OTPA_INF", "ORACLE"]
        );
        let values = column(&out.text, "value");
        assert_eq!(values[0], "60");
        assert_eq!(values[39], "200");
        // ORACLE refuses the dB-ratio SNR.
        assert_eq!(out.error_rows, 8);
    }

    #[test]
    fn rows_satisfy_efficiency_identity() {
        for text in [
            "sweep = dl:60m:200m:70m\nmode = physical\nschemes = MCTP,OTPA,MTPA,ORACLE\n",
            "sweep = dl:60m:200m:70m\nmode = paper-literal\nschemes = MCTP,OTPA,MTPA,OTPA_INF\n",
        ] {
            let out = run_sweep(&cfg(text));
            assert_eq!(out.error_rows, 0);
            check_efficiency(&out.text);
        }
    }

    fn check_efficiency(text: &str) {
        let e = column(text, "energy");
        let d = column(text, "data");
        let ee = column(text, "energy_efficiency");
        for i in 0..e.len() {
            let (e, d, ee): (f64, f64, f64) = (
                e[i].parse().unwrap(),
                d[i].parse().unwrap(),
                ee[i].parse().unwrap(),
            );
            assert!((ee * e - d).abs() <= 1e-9 * d.abs(), "row {i}");
        }
    }

    #[test]
    fn invalid_point_becomes_error_rows() {
        let c = cfg("theta_3db = 200 deg\np_ref = 40 dBm\n");
        let out = run_sweep(&c);
        assert_eq!(out.error_rows, 4);
        assert!(column(&out.text, "error")[0].contains("theta_3db"));
    }

    #[test]
    fn montecarlo_collapses_to_sweep() {
        let c = cfg("sweep = dl:100m:140m:20m\np_ref = 40 dBm\ntrials = 1\nsigma_v = 0 m/s\n");
        let det = run_sweep(&c);
        let mc = run_montecarlo_cmd(&c);
        assert_eq!(column(&det.text, "energy"), column(&mc.text, "energy_mean"));
        assert_eq!(column(&det.text, "data"), column(&mc.text, "data_mean"));
        assert_eq!(
            column(&det.text, "energy_efficiency"),
            column(&mc.text, "energy_efficiency_mean")
        );
        assert!(column(&mc.text, "energy_std").iter().all(|s| s == "0"));
    }

    #[test]
    fn montecarlo_bytes_do_not_depend_on_threads() {
        let c = cfg("dl = 120 m\np_ref = 40 dBm\ntrials = 40\nsigma_v = 5 %\nseed = 3\n");
        let run = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| run_montecarlo_cmd(&c))
        };
        assert_eq!(run(1), run(8));
    }

    #[test]
    fn limit_report_rejects_physical_mode() {
        assert!(run_limit_cmd(&cfg("mode = physical\n")).is_err());
    }

    #[test]
    fn limit_report_labels_printed_form() {
        let plain = run_limit_cmd(&cfg("p_ref = 40 dBm\n")).unwrap();
        assert!(!plain.contains("printed"));
        assert!(plain.contains("\n2048,"));
        let flagged = run_limit_cmd(&cfg("p_ref = 40 dBm\neq40_as_printed = true\n")).unwrap();
        assert!(flagged.contains("derived vs printed"));
    }

    #[test]
    fn allocate_report_has_one_line_per_segment() {
        let text =
            run_allocate_cmd(&cfg("n_segments = 5\np_ref = 40 dBm\nmode = physical\n")).unwrap();
        assert!(text.contains("allocation OTPA") && text.contains("allocation ORACLE"));
        assert_eq!(text.lines().filter(|l| l.starts_with("5,")).count(), 2);
    }

    #[test]
    fn flags_beat_file() {
        let r = resolve(Some("dl = 80 m\n"), &[("dl", "90 m".to_string())]).unwrap();
        assert_eq!(r.config.dl, 90.0);
        assert!(resolve(None, &[("bandwidth", "2.16".to_string())]).is_err());
    }
}
