//! Writes command results to CSV and JSON files.

use std::path::{Path, PathBuf};

use simvar_core::analysis::ConvergenceReport;

use crate::config::Run;
use crate::csv_io::{partial_path, write_json};
use crate::error::{AppError, Result};
use crate::experiments::{
    convergence_table, figure_tables, run_integrator, summarize, trajectory_table, ConvergenceSummary,
    SimulationSummary, ValidationSummary,
};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

/// Runs `run` and writes the figure tables plus `summary.json` into its
/// output directory. A failed run leaves `trajectory.csv.partial` behind.
pub fn simulate(run: &Run) -> Result<SimulationSummary> {
    ensure_dir(&run.output)?;
    let x0 = run.preset.initial_point()?;
    let out = match run_integrator(&run.preset.system, &x0, run.integrator, run.h, run.t_end, &run.step) {
        Ok(out) => out,
        Err(f) => {
            let path = partial_path(&run.output.join("trajectory.csv"));
            trajectory_table(&run.preset, &f.points)?.write(&path)?;
            return Err(AppError::Integration {
                step: f.step,
                cause: f.cause,
                partial: Some(path),
            });
        }
    };
    for (stem, table) in figure_tables(&run.preset, &out.points)? {
        table.write(&run.output.join(format!("{stem}.csv")))?;
    }
    let summary = summarize(&run.preset, run.integrator, run.h, run.t_end, run.period, &out)?;
    write_json(&run.output.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Writes `<stem>.csv` and `<stem>.json`; returns the CSV path.
pub fn write_convergence(dir: &Path, stem: &str, preset: &str, t_end: f64, r: &ConvergenceReport) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    convergence_table(r).write(&csv)?;
    write_json(&dir.join(format!("{stem}.json")), &ConvergenceSummary::new(preset, t_end, r))?;
    Ok(csv)
}

pub fn write_validation(dir: &Path, preset: &str, v: &ValidationSummary) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(format!("validate-{preset}.json"));
    write_json(&path, v)?;
    Ok(path)
}
