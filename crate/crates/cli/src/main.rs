//! Command-line frontend: run catalog cases, convergence studies and the
//! property suites, and write their outputs.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use activeflux::cases::{catalog, find, Case};
use activeflux::march::StepReport;
use activeflux::runner::{
    compute_reference, convergence, run_with, Hooks, Reference, RunFailure, RunOutcome, RunSpec, Snapshot,
    REFERENCE_FORMAT,
};
use activeflux::scheme::{LimiterMode, SchemeConfig};
use activeflux::splitting::PointUpdate;
use activeflux::verify;

#[derive(Parser)]
#[command(name = "activeflux", version, about = "Bound-preserving Active Flux solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write its fields, step history and report.
    Run(RunArgs),
    /// Run a case on a sequence of meshes and tabulate l1 errors and orders.
    Convergence(ConvergenceArgs),
    /// List the available cases.
    Cases {
        #[arg(long)]
        json: bool,
    },
    /// Run the randomized property suites.
    Verify {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone, Default)]
struct SchemeArgs {
    /// Point update: js, llf-fvs, sw-fvs or vh-fvs.
    #[arg(long, value_parser = parse_point_update)]
    scheme: Option<PointUpdate>,
    /// Cell-average limiting: off, global or local.
    #[arg(long, value_parser = parse_limiter)]
    avg_limiter: Option<LimiterMode>,
    /// Point-value limiting: off, global or local.
    #[arg(long, value_parser = parse_limiter)]
    point_limiter: Option<LimiterMode>,
    /// Turn both limiters off.
    #[arg(long, conflicts_with_all = ["avg_limiter", "point_limiter"])]
    no_limiting: bool,
    /// Shock-sensor strength (0 disables the sensor).
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Maximum time-step halvings per step.
    #[arg(long)]
    max_retries: Option<usize>,
    /// End time.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Publication-scale mesh and end time.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Case name (see `activeflux cases`).
    #[arg(required_unless_present = "config")]
    case: Option<String>,
    /// Resolved configuration written by an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mesh: `N` or `NXxNY`.
    #[arg(long, value_parser = parse_cells)]
    cells: Option<[usize; 2]>,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Output directory (default `out/<case>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a snapshot every N steps (0: final state only).
    #[arg(long)]
    every: Option<usize>,
    /// Also write legacy VTK files (2D cases).
    #[arg(long)]
    vtk: bool,
}

#[derive(Args)]
struct ConvergenceArgs {
    case: String,
    /// Comma-separated cell counts along x.
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Reference solution file for cases without an exact solution.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Refinement of a computed reference relative to the finest mesh.
    #[arg(long, default_value_t = 4)]
    reference_factor: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides ACTIVEFLUX_THREADS.
    #[arg(long, env = "ACTIVEFLUX_THREADS")]
    threads: Option<usize>,
}

/// Fully resolved run configuration, echoed next to the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RunConfig {
    case: String,
    full: bool,
    spec: RunSpec,
    out: PathBuf,
    every: usize,
    vtk: bool,
}

#[derive(Serialize)]
struct RunReport<'a> {
    case: &'a str,
    status: &'a str,
    error: Option<String>,
    t: f64,
    steps: usize,
    total_halvings: usize,
    wall_seconds: f64,
    initial: Option<&'a activeflux::march::FieldSummary>,
    last_step: Option<&'a StepReport>,
    errors: Option<&'a activeflux::runner::ErrorNorms>,
    notes: &'a [String],
}

fn parse_point_update(s: &str) -> Result<PointUpdate, String> {
    PointUpdate::parse(s).map_err(|e| e.to_string())
}

fn parse_limiter(s: &str) -> Result<LimiterMode, String> {
    LimiterMode::parse(s).map_err(|e| e.to_string())
}

fn parse_cells(s: &str) -> Result<[usize; 2], String> {
    let bad = || format!("mesh must be N or NXxNY, got '{s}'");
    let mut it = s.split(['x', 'X']);
    let nx = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
    let ny = match it.next() {
        Some(v) => v.parse().map_err(|_| bad())?,
        None => 0,
    };
    if it.next().is_some() {
        return Err(bad());
    }
    Ok([nx, ny])
}

fn note(what: &str, from: impl std::fmt::Display, to: impl std::fmt::Display) {
    eprintln!("override: {what} {from} -> {to}");
}

/// Applies command-line overrides to `base`, logging each change.
fn apply_scheme(case: &Case, base: RunSpec, a: &SchemeArgs) -> Result<RunSpec> {
    let mut s = base;
    if a.full {
        let full = RunSpec::defaults(case, true);
        s.cells = full.cells;
        s.t_end = full.t_end;
    }
    let mut sc: SchemeConfig = s.scheme;
    if let Some(pu) = a.scheme {
        if pu != sc.point_update {
            note("scheme", sc.point_update.label(), pu.label());
            sc.point_update = pu;
            if a.cfl.is_none() {
                let c = case.cfl_for(pu);
                if c != sc.cfl {
                    note("cfl (scheme default)", sc.cfl, c);
                    sc.cfl = c;
                }
            }
        }
    }
    if a.no_limiting {
        sc.average_limiter = LimiterMode::Off;
        sc.point_limiter = LimiterMode::Off;
        eprintln!("override: limiters off");
    }
    if let Some(m) = a.avg_limiter {
        note("average limiter", sc.average_limiter.label(), m.label());
        sc.average_limiter = m;
    }
    if let Some(m) = a.point_limiter {
        note("point limiter", sc.point_limiter.label(), m.label());
        sc.point_limiter = m;
    }
    if let Some(k) = a.kappa {
        note("kappa", sc.kappa, k);
        sc.kappa = k;
    }
    if let Some(c) = a.cfl {
        note("cfl", sc.cfl, c);
        sc.cfl = c;
    }
    if let Some(r) = a.max_retries {
        sc.max_retries = r;
    }
    if let Some(t) = a.t_end {
        note("t_end", s.t_end, t);
        s.t_end = t;
    }
    if a.max_steps.is_some() {
        s.max_steps = a.max_steps;
    }
    sc.validate(case.model.kind()).map_err(|e| anyhow::anyhow!("{}: {e}", case.name))?;
    s.scheme = sc;
    Ok(s)
}

fn resolve_cells(case: &Case, cells: [usize; 2]) -> Result<[usize; 2]> {
    match (case.dim, cells) {
        (1, [n, 0 | 1]) => Ok([n, 1]),
        (1, _) => bail!("{} is one-dimensional; give a single cell count", case.name),
        (_, [n, 0]) => Ok(RunSpec::defaults(case, false).with_mesh(case, n).cells),
        (_, c) => Ok(c),
    }
}

fn resolve_run(a: &RunArgs) -> Result<(Case, RunConfig)> {
    let from_file: Option<RunConfig> = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            Some(serde_json::from_str(&text).with_context(|| format!("invalid configuration {}", p.display()))?)
        }
        None => None,
    };
    let name = match (&a.case, &from_file) {
        (Some(n), _) => n.clone(),
        (None, Some(c)) => c.case.clone(),
        (None, None) => bail!("a case name is required"),
    };
    let case = find(&name)?;
    let base = match &from_file {
        Some(c) if c.case == name => c.spec.clone(),
        _ => RunSpec::defaults(&case, a.scheme.full),
    };
    let mut spec = apply_scheme(&case, base, &a.scheme)?;
    if let Some(c) = a.cells {
        let c = resolve_cells(&case, c)?;
        note("cells", format!("{:?}", spec.cells), format!("{c:?}"));
        spec.cells = c;
    }
    let file = from_file.as_ref();
    let cfg = RunConfig {
        case: name.clone(),
        full: a.scheme.full || file.is_some_and(|c| c.full),
        spec,
        out: a
            .out
            .clone()
            .or_else(|| file.map(|c| c.out.clone()))
            .unwrap_or_else(|| Path::new("out").join(&name)),
        every: a.every.or_else(|| file.map(|c| c.every)).unwrap_or(0),
        vtk: a.vtk || file.is_some_and(|c| c.vtk),
    };
    Ok((case, cfg))
}

fn write_fields(case: &Case, cfg: &RunConfig, s: &Snapshot, stem: &str) -> Result<()> {
    output::write_snapshot_csv(&cfg.out.join(format!("{stem}.csv")), s, case.model)?;
    if cfg.vtk && case.dim == 2 {
        output::write_snapshot_vtk(&cfg.out.join(format!("{stem}.vtk")), s, case.model, case.x.0, case.y.0)?;
    }
    Ok(())
}

fn components(case: &Case) -> Vec<String> {
    case.component_names().iter().map(|s| s.to_string()).collect()
}

fn cmd_run(a: &RunArgs) -> Result<ExitCode> {
    let (case, cfg) = resolve_run(a)?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
    output::write_json(&cfg.out.join("config.json"), &cfg)?;
    let mut io_error = None;
    let mut on_step = |rep: &StepReport, snap: Option<Snapshot>| {
        if rep.step % 500 == 0 {
            eprintln!("step {} t = {:.6e} dt = {:.3e}", rep.step, rep.t, rep.dt);
        }
        if let Some(s) = snap {
            if let Err(e) = write_fields(&case, &cfg, &s, &format!("snapshot_{:06}", rep.step)) {
                io_error.get_or_insert(e);
            }
        }
    };
    let result = run_with(&case, &cfg.spec, Some(Hooks { every: cfg.every, on_step: &mut on_step }));
    if let Some(e) = io_error {
        return Err(e);
    }
    let comps = components(&case);
    match result {
        Ok(o) => {
            write_fields(&case, &cfg, &o.snapshot, "solution")?;
            output::write_steps_csv(&cfg.out.join("steps.csv"), &o.steps, &comps)?;
            output::write_json(&cfg.out.join("report.json"), &report(&case, Ok(&o)))?;
            print_summary(&case, &cfg, &o);
            Ok(ExitCode::SUCCESS)
        }
        Err(f) => {
            output::write_steps_csv(&cfg.out.join("steps.csv"), &f.steps, &comps)?;
            output::write_json(&cfg.out.join("report.json"), &report(&case, Err(&f)))?;
            eprintln!("error: {} failed after {} steps: {}", case.name, f.steps.len(), f.error);
            Ok(ExitCode::from(2))
        }
    }
}

fn report<'a>(case: &'a Case, r: Result<&'a RunOutcome, &'a RunFailure>) -> RunReport<'a> {
    match r {
        Ok(o) => RunReport {
            case: case.name,
            status: "completed",
            error: None,
            t: o.t,
            steps: o.steps.len(),
            total_halvings: o.total_halvings(),
            wall_seconds: o.wall_seconds,
            initial: Some(&o.initial),
            last_step: o.steps.last(),
            errors: o.errors.as_ref(),
            notes: &o.notes,
        },
        Err(f) => RunReport {
            case: case.name,
            status: "failed",
            error: Some(f.error.to_string()),
            t: f.steps.last().map_or(0.0, |s| s.t),
            steps: f.steps.len(),
            total_halvings: f.steps.iter().map(|s| s.halvings).sum(),
            wall_seconds: 0.0,
            initial: None,
            last_step: f.steps.last(),
            errors: None,
            notes: &[],
        },
    }
}

fn print_summary(case: &Case, cfg: &RunConfig, o: &RunOutcome) {
    let s = &cfg.spec;
    let mesh = if case.dim == 1 { s.cells[0].to_string() } else { format!("{}x{}", s.cells[0], s.cells[1]) };
    println!(
        "{} on {mesh}: {} steps to t = {} ({} halvings) in {:.2} s",
        case.name,
        o.steps.len(),
        o.t,
        o.total_halvings(),
        o.wall_seconds
    );
    println!(
        "scheme {} cfl {} limiters {}/{} kappa {}",
        s.scheme.point_update.label(),
        s.scheme.cfl,
        s.scheme.average_limiter.label(),
        s.scheme.point_limiter.label(),
        s.scheme.kappa
    );
    let lo = o.steps.iter().map(|r| r.summary.min_value).fold(o.initial.min_value, f64::min);
    let hi = o.steps.iter().map(|r| r.summary.max_value).fold(o.initial.max_value, f64::max);
    println!("range of {} over all steps: [{lo:.6e}, {hi:.6e}]", case.component_names()[0]);
    if let Some(p) = o.steps.iter().filter_map(|r| r.summary.min_pressure).reduce(f64::min) {
        println!("minimum pressure over all steps: {p:.6e}");
    }
    if let Some(e) = &o.errors {
        for (c, name) in case.component_names().iter().enumerate() {
            println!("l1 error {name}: {:.6e}", e.l1[c]);
        }
    }
    for n in &o.notes {
        println!("note: {n}");
    }
    println!("outputs in {}", cfg.out.display());
}

fn threads(requested: Option<usize>) -> usize {
    requested
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn load_or_build_reference(case: &Case, spec: &RunSpec, meshes: &[usize], a: &ConvergenceArgs, out: &Path) -> Result<Reference> {
    if let Some(p) = &a.reference {
        let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
        let r: Reference = serde_json::from_str(&text).with_context(|| format!("invalid reference {}", p.display()))?;
        if r.format != REFERENCE_FORMAT || r.case != case.name {
            bail!("{} is not a format-{REFERENCE_FORMAT} reference for {}", p.display(), case.name);
        }
        return Ok(r);
    }
    let finest = *meshes.iter().max().expect("at least two meshes");
    let fine = spec.with_mesh(case, finest);
    let path = out.join(format!("reference_{}_{}x{}.json", case.name, fine.cells[0] * a.reference_factor, fine.cells[1] * a.reference_factor));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(r) = serde_json::from_str::<Reference>(&text) {
            if r.format == REFERENCE_FORMAT && r.case == case.name && r.spec.t_end == spec.t_end {
                eprintln!("using cached reference {}", path.display());
                return Ok(r);
            }
        }
    }
    eprintln!("computing reference solution ({}x refinement of {finest} cells)", a.reference_factor);
    let r = compute_reference(case, &fine, a.reference_factor).map_err(|f| anyhow::anyhow!("reference run failed: {f}"))?;
    output::write_json(&path, &r)?;
    Ok(r)
}

fn cmd_convergence(a: &ConvergenceArgs) -> Result<ExitCode> {
    let case = find(&a.case)?;
    let meshes = a.meshes.clone().unwrap_or_else(|| case.convergence.clone());
    if meshes.len() < 2 {
        bail!("{} has no default mesh sequence; pass --meshes", case.name);
    }
    let spec = apply_scheme(&case, RunSpec::defaults(&case, false), &a.scheme)?;
    let out = a.out.clone().unwrap_or_else(|| Path::new("out").join(format!("{}_convergence", case.name)));
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let reference = if case.exact.is_none() {
        Some(load_or_build_reference(&case, &spec, &meshes, a, &out)?)
    } else {
        None
    };
    let n = threads(a.threads);
    output::write_json(&out.join("config.json"), &serde_json::json!({ "case": case.name, "meshes": meshes, "spec": spec, "threads": n }))?;
    match convergence(&case, &spec, &meshes, n, reference.as_ref()) {
        Ok(rows) => {
            let comps = components(&case);
            output::write_convergence_csv(&out.join("convergence.csv"), &rows, &comps)?;
            print!("{}", output::format_convergence(&rows, &comps));
            println!("table written to {}", out.join("convergence.csv").display());
            Ok(ExitCode::SUCCESS)
        }
        Err(f) => {
            eprintln!("error: convergence study of {} failed: {}", case.name, f.error);
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_cases(json: bool) -> Result<ExitCode> {
    let cases = catalog();
    if json {
        let list: Vec<_> = cases
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "summary": c.summary,
                    "dim": c.dim,
                    "model": c.model.label(),
                    "cells": c.cells,
                    "t_end": c.t_end,
                    "full_cells": c.full_cells,
                    "full_t_end": c.full_t_end,
                    "scheme": c.scheme,
                    "exact": c.exact.is_some(),
                    "boundaries": c.bc.iter().map(|b| b.label()).collect::<Vec<_>>(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&list)?);
    } else {
        for c in &cases {
            let mesh = if c.dim == 1 { c.cells[0].to_string() } else { format!("{}x{}", c.cells[0], c.cells[1]) };
            println!("{:<20} {}D {:<10} T={:<8} {}", c.name, c.dim, mesh, c.t_end, c.summary);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(samples: usize, seed: u64, json: bool) -> Result<ExitCode> {
    let reports = verify::run_all(samples, seed);
    if json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for r in &reports {
            println!(
                "{} {:<28} samples {:>7} worst {:.3e} tolerance {:.1e} {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.samples,
                r.worst,
                r.tolerance,
                r.detail
            );
        }
    }
    Ok(if reports.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::Cases { json } => cmd_cases(*json),
        Command::Verify { samples, seed, json } => cmd_verify(*samples, *seed, *json),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
