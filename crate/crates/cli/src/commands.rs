use std::path::PathBuf;

use clap::Args;
use qreading::analysis::{compare_printed, gain, GainReport, TableAgreement, REFERENCE_GAIN_TABLE};
use qreading::certify::{certify_sweep, CellReport};
use qreading::critical::{asymptote_high_energy, critical_curve, critical_m_worst_case, HighEnergyAsymptote, PointStatus, RootPath};
use qreading::{MemoryModel, QreadError, SignalProfile};
use serde::Serialize;
use serde_json::json;

use crate::config::{parse_grid, parse_sweep, Config};
use crate::error::CliError;
use crate::output::{fmt17, fmt_opt, write_csv, write_json, Meta};
use crate::plot::{render, Figure, Series};

/// What a successful run concluded; errors are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    CheckFailed,
}

const GAIN_HEADER: [&str; 10] = ["M", "N_S", "r0", "r1", "N_B", "C", "Q", "J_class", "J_quant", "G"];

fn gain_row(r: &GainReport) -> Vec<String> {
    vec![
        r.sig.m.to_string(),
        fmt17(r.sig.n_s),
        fmt17(r.mem.r0),
        fmt17(r.mem.r1),
        fmt17(r.mem.n_b),
        fmt17(r.c_bound),
        fmt17(r.q_bound),
        fmt17(r.j_class),
        fmt17(r.j_quant),
        fmt17(r.gain),
    ]
}

fn parse_point(spec: &str) -> Result<(MemoryModel, SignalProfile), CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [m, n_s, r0, r1, n_b] = parts[..] else {
        return Err(CliError::Usage(format!("row `{spec}`: expected M,N_S,r0,r1,N_B")));
    };
    let m: u64 = m.parse().map_err(|_| CliError::Usage(format!("row `{spec}`: M must be a positive integer")))?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::Usage(format!("row `{spec}`: bad number `{s}`")));
    Ok((MemoryModel::new(num(r0)?, num(r1)?, num(n_b)?)?, SignalProfile::new(m, num(n_s)?)?))
}

#[derive(Debug, Args)]
pub struct GainTableArgs {
    /// Compare against the printed two-figure gains; exit 1 on a mismatch.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra row `M,N_S,r0,r1,N_B` (repeatable).
    #[arg(long = "row", value_name = "M,N_S,r0,r1,N_B")]
    rows: Vec<String>,
}

pub fn gain_table(args: &GainTableArgs, config: &Config) -> Result<Outcome, CliError> {
    let meta = Meta::start();
    let mut points = Vec::new();
    for row in &REFERENCE_GAIN_TABLE {
        points.push((row.memory()?, row.signal()?, Some(row.printed_gain)));
    }
    for spec in &args.rows {
        let (mem, sig) = parse_point(spec)?;
        points.push((mem, sig, None));
    }
    let reports = points.iter().map(|(mem, sig, _)| gain(mem, sig)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = reports.iter().map(gain_row).collect();
    write_csv(args.out.as_deref(), &GAIN_HEADER, &rows)?;

    let mut outcome = Outcome::Ok;
    let mut verdicts = Vec::new();
    if args.check {
        for (i, ((_, _, printed), report)) in points.iter().zip(&reports).enumerate() {
            let Some(printed) = printed else { continue };
            let verdict = compare_printed(report.gain, *printed);
            eprintln!("row {}: G = {:.5e}, printed {printed}: {verdict:?}", i + 1, report.gain);
            if verdict == TableAgreement::Mismatch {
                outcome = Outcome::CheckFailed;
            }
            verdicts.push(json!({ "row": i + 1, "computed": report.gain, "printed": printed, "verdict": verdict }));
        }
    }
    if let Some(out) = &args.out {
        meta.write(out, "gain-table", config, json!({ "check": verdicts }))?;
    }
    Ok(outcome)
}

#[derive(Debug, Args)]
pub struct GainPointArgs {
    #[arg(long)]
    m: u64,
    #[arg(long)]
    ns: f64,
    #[arg(long)]
    r0: f64,
    #[arg(long)]
    r1: f64,
    #[arg(long)]
    nb: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn gain_point(args: &GainPointArgs, config: &Config) -> Result<Outcome, CliError> {
    let meta = Meta::start();
    let report = gain(&MemoryModel::new(args.r0, args.r1, args.nb)?, &SignalProfile::new(args.m, args.ns)?)?;
    write_csv(args.out.as_deref(), &GAIN_HEADER, &[gain_row(&report)])?;
    if let Some(out) = &args.out {
        meta.write(out, "gain-point", config, json!({ "s_star": report.s_star }))?;
    }
    Ok(Outcome::Ok)
}

#[derive(Debug, Args)]
pub struct CriticalCurveArgs {
    /// Signal energies, comma separated.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<f64>,
    /// Pit reflectivities: `start:stop:count` or a comma list.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the curves, with solver settings, as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// SVG of M against r0 on a log scale.
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn path_name(p: Option<RootPath>) -> &'static str {
    match p {
        Some(RootPath::Bisection) => "bisection",
        Some(RootPath::Asymptotic) => "asymptotic",
        None => "",
    }
}

pub fn critical_curves(args: &CriticalCurveArgs, config: &Config) -> Result<Outcome, CliError> {
    let meta = Meta::start();
    let ns = if args.ns.is_empty() { config.grids.critical_ns.clone() } else { args.ns.clone() };
    let grid = parse_grid(args.grid.as_deref().unwrap_or(&config.grids.r0_grid))?;
    let curves = ns.iter().map(|&n_s| critical_curve(n_s, &grid, &config.solver)).collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for curve in &curves {
        for p in &curve.points {
            rows.push(vec![
                fmt17(curve.n_s),
                fmt17(p.r0),
                match p.status {
                    PointStatus::Ok => "ok".into(),
                    PointStatus::NoAdvantage => "no-advantage".into(),
                },
                fmt_opt(p.m_real),
                p.m_int.map(|m| m.to_string()).unwrap_or_default(),
                fmt_opt(p.n_b_worst),
                path_name(p.path).into(),
            ]);
        }
    }
    write_csv(args.out.as_deref(), &["N_S", "r0", "status", "M_real", "M_int", "N_B_worst", "path"], &rows)?;
    if let Some(path) = &args.json {
        write_json(Some(path), &curves)?;
    }
    if let Some(path) = &args.plot {
        let fig = Figure {
            title: "Critical number of signals".into(),
            x_label: "pit reflectivity r0".into(),
            y_label: "M (log scale)".into(),
            log_y: true,
            series: curves
                .iter()
                .map(|c| Series {
                    label: format!("N_S = {}", c.n_s),
                    points: c.points.iter().map(|p| (p.r0, p.m_int.map_or(f64::NAN, |m| m as f64))).collect(),
                    dashed: false,
                })
                .collect(),
        };
        std::fs::write(path, render(&fig))?;
    }
    if let Some(out) = &args.out {
        let flagged: Vec<_> = curves
            .iter()
            .flat_map(|c| c.points.iter().filter(|p| p.status == PointStatus::NoAdvantage).map(move |p| json!([c.n_s, p.r0])))
            .collect();
        meta.write(out, "critical-curve", config, json!({ "no_advantage": flagged }))?;
    }
    Ok(Outcome::Ok)
}

#[derive(Debug, Args)]
pub struct AsymptoteArgs {
    /// Signal energies in [1, 2.5): `start:stop:count` or a comma list.
    #[arg(long = "ns-range")]
    ns_range: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
}

pub fn asymptote_compare(args: &AsymptoteArgs, config: &Config) -> Result<Outcome, CliError> {
    let meta = Meta::start();
    let ns = parse_grid(args.ns_range.as_deref().unwrap_or(&config.grids.ns_range))?;
    let mut approx = Vec::with_capacity(ns.len());
    for &n_s in &ns {
        match asymptote_high_energy(n_s)? {
            HighEnergyAsymptote::Finite(m) => approx.push(m),
            HighEnergyAsymptote::Divergent => {
                return Err(CliError::Usage(format!("N_S = {n_s}: the high-energy approximation diverges (needs N_S below about 2.51)")))
            }
        }
    }
    let mut rows = Vec::new();
    let mut solver = Vec::new();
    for (&n_s, &m_tilde) in ns.iter().zip(&approx) {
        let root = match critical_m_worst_case(0.0, n_s, &config.solver) {
            Ok(p) => Some(p.m_real),
            Err(QreadError::NoAdvantage { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let rel = root.map(|m| (m - m_tilde).abs() / m);
        rows.push(vec![fmt17(n_s), fmt_opt(root), fmt17(m_tilde), fmt_opt(rel)]);
        solver.push(root);
    }
    write_csv(args.out.as_deref(), &["N_S", "M_solver", "M_tilde", "rel_diff"], &rows)?;
    if let Some(path) = &args.plot {
        let fig = Figure {
            title: "Critical number at r0 = 0, high energy".into(),
            x_label: "N_S".into(),
            y_label: "M".into(),
            log_y: false,
            series: vec![
                Series { label: "solver".into(), points: ns.iter().zip(&solver).map(|(&n, m)| (n, m.unwrap_or(f64::NAN))).collect(), dashed: false },
                Series { label: "approximation".into(), points: ns.iter().copied().zip(approx.iter().copied()).collect(), dashed: true },
            ],
        };
        std::fs::write(path, render(&fig))?;
    }
    if let Some(out) = &args.out {
        meta.write(out, "asymptote-compare", config, json!({}))?;
    }
    Ok(Outcome::Ok)
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    /// `ns=LIST;r=LIST;nb=LIST`, each list a grid spec. Missing keys use the config.
    #[arg(long)]
    sweep: Option<String>,
    /// Fixed base cutoff per mode (the check also runs at twice this).
    #[arg(long)]
    dim: Option<usize>,
    /// JSON report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    perturb_lambda: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MaxDeviation {
    fidelity: f64,
    chernoff: f64,
    convergence: f64,
    /// Largest amount by which a single-copy bound crosses its Helstrom error.
    sandwich_excess: f64,
}

#[derive(Debug, Serialize)]
struct FailingCell {
    r0: f64,
    r1: f64,
    n_b: f64,
    n_s: f64,
    dim: usize,
    worst_abs_error: f64,
    worst_convergence: f64,
    sandwich_holds: bool,
}

#[derive(Debug, Serialize)]
struct OracleReport<'a> {
    cells: usize,
    passed: usize,
    tolerances: qreading::certify::Tolerances,
    max_deviation: MaxDeviation,
    failing: Vec<FailingCell>,
    results: &'a [CellReport],
}

pub fn oracle_check(args: &OracleCheckArgs, config: &Config) -> Result<Outcome, CliError> {
    let meta = Meta::start();
    let spec = match &args.sweep {
        Some(s) => parse_sweep(s, &config.sweep)?,
        None => config.sweep.clone(),
    };
    let mut settings = config.oracle.clone();
    if args.dim.is_some() {
        settings.dim = args.dim;
    }
    if let Some(scale) = args.perturb_lambda {
        settings.lambda_scale = scale;
    }
    let tol = config.tolerances;
    let results = certify_sweep(&spec, &settings)?;

    let max_dev = MaxDeviation {
        fidelity: results.iter().map(|c| c.fidelity.abs_error()).fold(0.0, f64::max),
        chernoff: results.iter().flat_map(|c| c.chernoff.iter().map(|q| q.value.abs_error())).fold(0.0, f64::max),
        convergence: results.iter().map(CellReport::worst_convergence).fold(0.0, f64::max),
        sandwich_excess: results
            .iter()
            .map(|c| (c.c_bound - c.helstrom_coherent).max(c.helstrom_epr - c.q_bound))
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0),
    };
    let failing: Vec<FailingCell> = results
        .iter()
        .filter(|c| !c.passes_within(&tol))
        .map(|c| FailingCell {
            r0: c.r0,
            r1: c.r1,
            n_b: c.n_b,
            n_s: c.n_s,
            dim: c.dim,
            worst_abs_error: c.worst_abs_error(),
            worst_convergence: c.worst_convergence(),
            sandwich_holds: c.sandwich_holds_within(tol.sandwich_slack),
        })
        .collect();
    for f in &failing {
        eprintln!(
            "FAIL r0={} r1={} N_B={} N_S={} dim={}: |gaussian - fock| = {:.3e}, |d - 2d| = {:.3e}, sandwich {}",
            f.r0,
            f.r1,
            f.n_b,
            f.n_s,
            f.dim,
            f.worst_abs_error,
            f.worst_convergence,
            if f.sandwich_holds { "ok" } else { "violated" }
        );
    }
    let report = OracleReport {
        cells: results.len(),
        passed: results.len() - failing.len(),
        tolerances: tol,
        max_deviation: max_dev,
        failing,
        results: &results,
    };
    write_json(args.out.as_deref(), &report)?;
    eprintln!("{} of {} cells within tolerance", report.passed, report.cells);
    if let Some(out) = &args.out {
        meta.write(out, "oracle-check", config, json!({ "sweep": spec, "lambda_scale": settings.lambda_scale }))?;
    }
    Ok(if report.failing.is_empty() { Outcome::Ok } else { Outcome::CheckFailed })
}
