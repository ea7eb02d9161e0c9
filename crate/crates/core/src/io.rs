//! Text outputs. Floats are written with 17 significant digits so that
//! every value round-trips and identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::InvariantReport;
use crate::error::{Error, Result};
use crate::grid::Trajectory;
use crate::harness::StudyReport;

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

pub fn solution_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x_center,u\n");
    for s in &traj.states {
        let t = fmt17(s.time);
        for (j, &u) in s.values.iter().enumerate() {
            let _ = writeln!(out, "{t},{},{}", fmt17(s.center(j)), fmt17(u));
        }
    }
    out
}

/// One row per stored state and cell, header `t,x_center,u`.
pub fn write_solution_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    write(path, &solution_csv(traj))
}

pub fn study_csv(report: &StudyReport) -> String {
    let mut out = String::from("level,dx,delta,dt,r,n_cells,n_steps,error,eoc,origin_value,invariants_passed\n");
    for (i, l) in report.levels.iter().enumerate() {
        let passed = l.invariants.iter().all(|r| r.passed);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            l.level,
            fmt17(l.dx),
            fmt17(l.delta),
            fmt17(l.dt),
            l.r,
            l.n_cells,
            l.n_steps,
            fmt_opt(l.error),
            fmt_opt(report.eoc.get(i).copied()),
            fmt17(l.origin_value),
            passed
        );
    }
    out
}

/// Study table, one row per level.
pub fn write_study_csv(report: &StudyReport, path: &Path) -> Result<()> {
    write(path, &study_csv(report))
}

#[derive(Serialize)]
struct StudyDocument<'a, C: Serialize> {
    config: &'a C,
    report: &'a StudyReport,
}

/// Study JSON with the configuration echoed alongside the report.
pub fn write_study(report: &StudyReport, config: &impl Serialize, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&StudyDocument { config, report })
        .map_err(|e| Error::Config(format!("serializing study: {e}")))?;
    write(path, &(text + "\n"))
}

/// Two columns `dx error` for every level with an error value.
pub fn emit_plot_data(report: &StudyReport, path: &Path) -> Result<()> {
    let mut out = String::from("# dx error\n");
    for l in &report.levels {
        if let Some(e) = l.error {
            let _ = writeln!(out, "{} {}", fmt17(l.dx), fmt17(e));
        }
    }
    write(path, &out)
}

#[derive(Serialize)]
struct RunSummary<'a, C: Serialize> {
    config: &'a C,
    final_time: f64,
    n_steps: usize,
    invariants: &'a [InvariantReport],
}

/// JSON summary of a single run and its invariant reports.
pub fn write_run_summary(
    config: &impl Serialize,
    final_time: f64,
    n_steps: usize,
    invariants: &[InvariantReport],
    path: &Path,
) -> Result<()> {
    let text = serde_json::to_string_pretty(&RunSummary { config, final_time, n_steps, invariants })
        .map_err(|e| Error::Config(format!("serializing summary: {e}")))?;
    write(path, &(text + "\n"))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}
