//! Monte Carlo orchestration of a single experiment spec.

use serde::Serialize;

use crate::error::Result;
use crate::metrics::{aggregate, AggregateReport, TrialReport};
use crate::multirumor::{run_multirumor_trial, MultiRumorReport};
use crate::network::trial_seed;
use crate::parallel::{map_trials, map_trials_sequential, resolve_workers, with_workers};
use crate::protocols::run_trial;

use super::spec::ExperimentSpec;

/// How trials are dispatched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// The crate default: a rayon pool when the `parallel` feature is on.
    #[default]
    Pool,
    Sequential,
}

/// One row of `summary.csv`. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub protocol: String,
    pub n: usize,
    pub f_in: usize,
    pub f_out: usize,
    pub sampling: String,
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    pub trials: u64,
    pub success_rate: f64,
    pub rounds_mean: f64,
    pub rounds_median: u64,
    pub rounds_p99: u64,
    pub msgs_mean: f64,
    pub msgs_median: u64,
    pub bits_mean: f64,
    pub seed: u64,
}

pub const SUMMARY_COLUMNS: [&str; 18] = [
    "scenario",
    "protocol",
    "n",
    "f_in",
    "f_out",
    "sampling",
    "eps",
    "delta",
    "gamma",
    "trials",
    "success_rate",
    "rounds_mean",
    "rounds_median",
    "rounds_p99",
    "msgs_mean",
    "msgs_median",
    "bits_mean",
    "seed",
];

pub const TRAJECTORY_COLUMNS: [&str; 4] = ["round", "u_mean", "u_p10", "u_p90"];

impl SummaryRow {
    pub fn new(spec: &ExperimentSpec, agg: &AggregateReport) -> Self {
        SummaryRow {
            scenario: spec.scenario_name().to_string(),
            protocol: spec.protocol.to_string(),
            n: spec.n,
            f_in: spec.f_in,
            f_out: spec.f_out,
            sampling: spec.sampling.to_string(),
            eps: spec.epsilon,
            delta: spec.delta,
            gamma: spec.gamma,
            trials: spec.trials,
            success_rate: agg.success_rate,
            rounds_mean: agg.rounds.mean,
            rounds_median: agg.rounds.median,
            rounds_p99: agg.rounds.p99,
            msgs_mean: agg.rumor_messages.mean,
            msgs_median: agg.rumor_messages.median,
            bits_mean: agg.bits_mean,
            seed: spec.seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub spec: ExperimentSpec,
    /// Trial reports in trial-index order. Multi-rumor trials are collapsed.
    pub reports: Vec<TrialReport>,
    /// Full multi-rumor reports when the spec has a rumor schedule.
    pub multi: Vec<MultiRumorReport>,
    pub aggregate: AggregateReport,
    pub summary: SummaryRow,
}

/// Runs every trial of `spec` and aggregates. Trial `i` uses
/// `trial_seed(spec.seed, i)`; the failure plan is drawn once.
pub fn run_trials(spec: &ExperimentSpec, exec: Execution) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let cfg = spec.protocol_config()?;
    let plan = spec.failure_plan()?;
    let schedule = spec.rumor_schedule(&cfg)?;
    let count = spec.trials;
    let seed = spec.seed;

    let (reports, multi) = match &schedule {
        None => {
            let one = |i: u64| run_trial(&cfg, &plan, spec.stop, trial_seed(seed, i));
            let results = dispatch(exec, spec.workers, count, one);
            (results.into_iter().collect::<Result<Vec<_>>>()?, Vec::new())
        }
        Some(schedule) => {
            let one = |i: u64| run_multirumor_trial(schedule, &cfg, &plan, trial_seed(seed, i));
            let multi = dispatch(exec, spec.workers, count, one).into_iter().collect::<Result<Vec<_>>>()?;
            (multi.iter().map(MultiRumorReport::to_trial_report).collect(), multi)
        }
    };
    let aggregate = aggregate(&reports)?;
    let summary = SummaryRow::new(spec, &aggregate);
    Ok(ExperimentOutcome { spec: spec.clone(), reports, multi, aggregate, summary })
}

fn dispatch<T, F>(exec: Execution, workers: Option<usize>, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => map_trials_sequential(count, f),
        Execution::Pool => with_workers(resolve_workers(workers), || map_trials(count, f)),
    }
}
