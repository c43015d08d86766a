//! Experiment specs, scenario presets, Monte Carlo orchestration and file
//! emission.
//!
//! Output schema: `summary.csv` has the columns in [`SUMMARY_COLUMNS`], each
//! trajectory table the columns in [`TRAJECTORY_COLUMNS`], and `checks.csv`
//! the columns in [`CHECK_COLUMNS`]. `summary.json` mirrors the summary rows
//! and checks.

mod experiment;
mod output;
mod presets;
mod spec;

use std::path::{Path, PathBuf};

pub use experiment::{run_trials, Execution, ExperimentOutcome, SummaryRow, SUMMARY_COLUMNS, TRAJECTORY_COLUMNS};
pub use output::{slug, Check, OutputDir, SummaryJson, CHECK_COLUMNS};
pub use presets::{
    emit_scenario, find_preset, run_scenario, run_scenario_with, scenario_presets, within_midpoint, ScenarioOutcome,
    ScenarioParams, ScenarioPreset,
};
pub use spec::{split_assignment, ExperimentSpec, InitialInformed, KEYS};

use crate::error::Result;

/// Runs `spec` and, when `out` is given, writes `summary.csv`,
/// `trajectory.csv` and `summary.json` there.
pub fn run_experiment(spec: &ExperimentSpec, out: Option<&Path>) -> Result<ExperimentOutcome> {
    let outcome = run_trials(spec, Execution::Pool)?;
    if let Some(dir) = out {
        emit_experiment(&outcome, dir)?;
    }
    Ok(outcome)
}

pub fn emit_experiment(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = OutputDir::create(dir)?;
    let rows = [outcome.summary.clone()];
    out.write_summary(&rows)?;
    out.write_trajectory("trajectory.csv", &outcome.aggregate.trajectory)?;
    out.write_json(
        "summary.json",
        &SummaryJson {
            scenario: outcome.spec.scenario_name(),
            seed: outcome.spec.seed,
            all_passed: true,
            rows: &rows,
            checks: &[],
        },
    )?;
    Ok(out.commit())
}

/// Runs one experiment per value of `param`, each on a copy of `base`.
pub fn run_sweep<S: AsRef<str>>(base: &ExperimentSpec, param: &str, values: &[S]) -> Result<Vec<ExperimentOutcome>> {
    let specs = values
        .iter()
        .map(|v| {
            let mut spec = base.clone();
            spec.set(param, v.as_ref())?;
            spec.validate()?;
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;
    specs.iter().map(|s| run_experiment(s, None)).collect()
}

/// Writes a sweep as one summary row and one trajectory file per value.
pub fn emit_sweep(runs: &[ExperimentOutcome], param: &str, values: &[String], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = OutputDir::create(dir)?;
    let rows: Vec<SummaryRow> = runs.iter().map(|r| r.summary.clone()).collect();
    out.write_summary(&rows)?;
    for (run, value) in runs.iter().zip(values) {
        out.write_trajectory(&format!("trajectory-{}-{}.csv", slug(param), slug(value)), &run.aggregate.trajectory)?;
    }
    let scenario = runs.first().map_or("custom", |r| r.spec.scenario_name());
    let seed = runs.first().map_or(0, |r| r.spec.seed);
    out.write_json("summary.json", &SummaryJson { scenario, seed, all_passed: true, rows: &rows, checks: &[] })?;
    Ok(out.commit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_files() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec { n: 100, trials: 5, seed: 11, ..Default::default() };
        let files = run_experiment(&spec, Some(dir.path())).map(|_| std::fs::read_dir(dir.path()).unwrap().count());
        assert_eq!(files.unwrap(), 3);
        let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        assert!(traj.starts_with("round,u_mean,u_p10,u_p90\n0,99.0,99,99\n"));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(json["rows"][0]["seed"], 11);
        assert_eq!(json["rows"][0]["msgs_mean"], 99.0);
    }

    #[test]
    fn failing_spec_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out");
        let spec = ExperimentSpec { n: 100, origin: 500, ..Default::default() };
        assert!(run_experiment(&spec, Some(&target)).is_err());
        assert!(!target.exists());
    }

    #[test]
    fn sweep_over_n() {
        let dir = tempfile::tempdir().unwrap();
        let base = ExperimentSpec { trials: 4, ..Default::default() };
        let values = vec!["64".to_string(), "128".to_string()];
        let runs = run_sweep(&base, "n", &values).unwrap();
        assert_eq!(runs[1].summary.n, 128);
        let files = emit_sweep(&runs, "n", &values, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        assert!(run_sweep(&base, "n", &["1"]).is_err());
    }
}
