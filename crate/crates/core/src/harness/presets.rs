//! Named scenarios: sweeps of experiment specs plus the assertions that
//! judge them.
//!
//! Overrides given to a scenario are `key=value` assignments applied to every
//! spec the preset builds. Two keys steer the sweep itself: `ns` (or `n`)
//! replaces the list of network sizes and `fins` the list of pull fanouts
//! where the preset sweeps them.

use std::path::{Path, PathBuf};

use crate::analytics::{
    check_growth_bound, check_pull_le_push, expected_uninformed_pull_wr, expected_uninformed_push, Verdict,
    CHECK_RTOL,
};
use crate::error::{Error, Result};
use crate::metrics::{overhead, TrajectoryPoint};
use crate::multirumor::{per_rumor_bit_report, ScheduleEntry};
use crate::network::Protocol;

use super::experiment::{run_trials, Execution, ExperimentOutcome, SummaryRow};
use super::output::{slug, Check, OutputDir, SummaryJson};
use super::spec::{split_assignment, ExperimentSpec, InitialInformed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub about: &'static str,
}

const PRESETS: [ScenarioPreset; 9] = [
    ScenarioPreset {
        name: "pull-rounds-scaling",
        about: "regular pull rounds against log_{f_in+1} n for f_in in {1, 3}",
    },
    ScenarioPreset { name: "message-optimality", about: "regular pull with f_in = 1 sends exactly n - 1 messages" },
    ScenarioPreset { name: "endgame", about: "regular pull from ceil(n / ln n) informed processes" },
    ScenarioPreset {
        name: "failure-robustness",
        about: "regular pull with half the processes crashed and half the calls failing",
    },
    ScenarioPreset { name: "pushpull-overhead", about: "push-then-pull overhead with the overhead-bounded switch point" },
    ScenarioPreset { name: "baseline-blowup", about: "polite push-pull overhead growth against zero-overhead pull" },
    ScenarioPreset { name: "push-messages", about: "regular push message count against n ln n" },
    ScenarioPreset { name: "multirumor-bits", about: "three concurrent rumors: messages and bits per rumor" },
    ScenarioPreset { name: "lemma-sweeps", about: "exhaustive checks of the one-round expectation inequalities" },
];

pub fn scenario_presets() -> &'static [ScenarioPreset] {
    &PRESETS
}

pub fn find_preset(name: &str) -> Result<ScenarioPreset> {
    PRESETS.iter().copied().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::Usage(format!("unknown scenario `{name}`; available: {}", names.join(", ")))
    })
}

/// Overrides split into sweep lists and per-spec assignments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioParams {
    pub ns: Option<Vec<usize>>,
    pub fins: Option<Vec<usize>>,
    pub assignments: Vec<(String, String)>,
    pub execution: Execution,
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|v| v.trim().parse().map_err(|e| Error::Config(format!("{key}: cannot parse `{v}`: {e}"))))
        .collect()
}

impl ScenarioParams {
    pub fn from_overrides<S: AsRef<str>>(overrides: &[S]) -> Result<Self> {
        let mut params = ScenarioParams::default();
        for raw in overrides {
            let (k, v) = split_assignment(raw.as_ref())?;
            match k.as_str() {
                "n" | "ns" => params.ns = Some(parse_list(&k, &v)?),
                "fins" => params.fins = Some(parse_list(&k, &v)?),
                _ => {
                    // Reject bad keys and values before any trial runs.
                    ExperimentSpec::default().set(&k, &v)?;
                    params.assignments.push((k, v));
                }
            }
        }
        Ok(params)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub name: String,
    pub seed: u64,
    pub runs: Vec<ExperimentOutcome>,
    /// File-name label per run, parallel to `runs`.
    pub labels: Vec<String>,
    pub checks: Vec<Check>,
}

impl ScenarioOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn rows(&self) -> Vec<SummaryRow> {
        self.runs.iter().map(|r| r.summary.clone()).collect()
    }

    pub fn trajectories(&self) -> impl Iterator<Item = (&str, &[TrajectoryPoint])> {
        self.labels.iter().zip(&self.runs).map(|(l, r)| (l.as_str(), r.aggregate.trajectory.as_slice()))
    }

    pub fn run(&self, label: &str) -> Option<&ExperimentOutcome> {
        self.labels.iter().position(|l| l == label).map(|i| &self.runs[i])
    }
}

struct Ctx<'a> {
    name: &'static str,
    params: &'a ScenarioParams,
    runs: Vec<ExperimentOutcome>,
    labels: Vec<String>,
    checks: Vec<Check>,
    seed: u64,
}

impl Ctx<'_> {
    fn ns(&self, default: &[usize]) -> Vec<usize> {
        self.params.ns.clone().unwrap_or_else(|| default.to_vec())
    }

    fn fins(&self, default: &[usize]) -> Vec<usize> {
        self.params.fins.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Finalizes `spec` with the overrides, runs it and returns its index.
    fn run(&mut self, label: String, mut spec: ExperimentSpec) -> Result<usize> {
        spec.scenario = Some(self.name.to_string());
        let n = spec.n;
        let f_in = spec.f_in;
        for (k, v) in &self.params.assignments {
            spec.set(k, v)?;
        }
        spec.n = n;
        if self.params.fins.is_some() {
            spec.f_in = f_in;
        }
        let outcome = run_trials(&spec, self.params.execution)?;
        self.runs.push(outcome);
        self.labels.push(label);
        Ok(self.runs.len() - 1)
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }
}

fn pull(n: usize, trials: u64) -> ExperimentSpec {
    ExperimentSpec { protocol: Protocol::RegularPull, n, trials, ..Default::default() }
}

fn log_base(x: f64, base: f64) -> f64 {
    x.ln() / base.ln()
}

/// True when every value lies within `tol` (relative) of the midpoint of
/// the range.
pub fn within_midpoint(values: &[f64], tol: f64) -> bool {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = (lo + hi) / 2.0;
    values.iter().all(|v| (v - mid).abs() <= tol * mid)
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" ")
}

fn mean_overhead(run: &ExperimentOutcome) -> Option<f64> {
    let n = run.spec.n;
    let values: Option<Vec<i64>> = run.reports.iter().map(|r| overhead(r, n).ok()).collect();
    values.map(|v| v.iter().sum::<i64>() as f64 / v.len() as f64)
}

pub fn run_scenario<S: AsRef<str>>(name: &str, overrides: &[S]) -> Result<ScenarioOutcome> {
    run_scenario_with(name, &ScenarioParams::from_overrides(overrides)?)
}

pub fn run_scenario_with(name: &str, params: &ScenarioParams) -> Result<ScenarioOutcome> {
    let preset = find_preset(name)?;
    let mut probe = ExperimentSpec::default();
    for (k, v) in &params.assignments {
        probe.set(k, v)?;
    }
    let mut ctx = Ctx { name: preset.name, params, runs: Vec::new(), labels: Vec::new(), checks: Vec::new(), seed: probe.seed };
    match preset.name {
        "pull-rounds-scaling" => pull_rounds_scaling(&mut ctx)?,
        "message-optimality" => message_optimality(&mut ctx)?,
        "endgame" => endgame(&mut ctx)?,
        "failure-robustness" => failure_robustness(&mut ctx)?,
        "pushpull-overhead" => pushpull_overhead(&mut ctx)?,
        "baseline-blowup" => baseline_blowup(&mut ctx)?,
        "push-messages" => push_messages(&mut ctx)?,
        "multirumor-bits" => multirumor_bits(&mut ctx)?,
        "lemma-sweeps" => lemma_sweeps(&mut ctx)?,
        _ => unreachable!("preset table and dispatch disagree"),
    }
    Ok(ScenarioOutcome { name: preset.name.to_string(), seed: ctx.seed, runs: ctx.runs, labels: ctx.labels, checks: ctx.checks })
}

fn pull_rounds_scaling(ctx: &mut Ctx) -> Result<()> {
    let ns = ctx.ns(&[1 << 8, 1 << 10, 1 << 12, 1 << 14, 1 << 16]);
    for f in ctx.fins(&[1, 3]) {
        let mut ratios = Vec::new();
        for &n in &ns {
            let spec = ExperimentSpec { f_in: f, ..pull(n, 200) };
            let i = ctx.run(format!("regular-pull-n{n}-fin{f}"), spec)?;
            ratios.push(ctx.runs[i].summary.rounds_median as f64 / log_base(n as f64, (f + 1) as f64));
        }
        let in_band = ratios.iter().all(|r| (1.0..=8.0).contains(r));
        ctx.check(format!("f_in={f} median rounds / log_(f_in+1) n in [1, 8]"), in_band, fmt_list(&ratios));
        let stable = within_midpoint(&ratios, 0.5);
        ctx.check(format!("f_in={f} ratio within 50% of its midpoint"), stable, fmt_list(&ratios));
    }
    Ok(())
}

fn message_optimality(ctx: &mut Ctx) -> Result<()> {
    for n in ctx.ns(&[1000, 10_000]) {
        let i = ctx.run(format!("regular-pull-n{n}"), pull(n, 100))?;
        let run = &ctx.runs[i];
        let exact = run.reports.iter().filter(|r| r.completed).all(|r| r.rumor_messages == n as u64 - 1);
        let detail = format!("msgs_mean {} success_rate {}", run.summary.msgs_mean, run.summary.success_rate);
        let success = run.summary.success_rate == 1.0;
        ctx.check(format!("n={n} completed trials send n-1 messages"), exact, detail.clone());
        ctx.check(format!("n={n} success rate 1"), success, detail);
    }
    Ok(())
}

fn endgame(ctx: &mut Ctx) -> Result<()> {
    for n in ctx.ns(&[1 << 12, 1 << 16]) {
        let start = ExperimentSpec { initial_informed: InitialInformed::NOverLnN, ..pull(n, 200) };
        let e = ctx.run(format!("endgame-n{n}"), start)?;
        let f = ctx.run(format!("full-n{n}"), pull(n, 200))?;
        let end_median = ctx.runs[e].summary.rounds_median as f64;
        let full_median = ctx.runs[f].summary.rounds_median as f64;
        let limit = 8.0 * (n as f64).ln().log2() + 10.0;
        ctx.check(
            format!("n={n} endgame median <= 8 log2 ln n + 10"),
            end_median <= limit,
            format!("median {end_median} limit {limit:.3}"),
        );
        ctx.check(
            format!("n={n} endgame median <= half the full-run median"),
            end_median <= full_median / 2.0,
            format!("endgame {end_median} full {full_median}"),
        );
    }
    Ok(())
}

fn failure_robustness(ctx: &mut Ctx) -> Result<()> {
    for n in ctx.ns(&[10_000]) {
        let budget = (8.0 * (n as f64).log2() + 40.0).ceil() as u32;
        let spec = ExperimentSpec { epsilon: 0.5, delta: 0.5, round_budget: Some(budget), ..pull(n, 200) };
        let i = ctx.run(format!("regular-pull-n{n}"), spec)?;
        let run = &ctx.runs[i];
        let max_msgs = run.aggregate.rumor_messages.max;
        let rate = run.summary.success_rate;
        let budget = run.spec.protocol_config()?.round_budget;
        ctx.check(
            format!("n={n} good processes informed within {budget} rounds in >= 99% of trials"),
            rate >= 0.99,
            format!("success_rate {rate}"),
        );
        ctx.check(format!("n={n} messages <= n on every trial"), max_msgs <= n as u64, format!("max {max_msgs}"));
    }
    Ok(())
}

fn pushpull_overhead(ctx: &mut Ctx) -> Result<()> {
    for n in ctx.ns(&[1 << 12, 1 << 16]) {
        let spec = ExperimentSpec { protocol: Protocol::RegularPushThenPull, ..pull(n, 100) };
        let i = ctx.run(format!("push-then-pull-n{n}"), spec)?;
        let run = &ctx.runs[i];
        let nf = n as f64;
        let limit = 10.0 * nf / (nf.ln() * nf.ln());
        let mean = mean_overhead(run);
        let max_msgs = run.aggregate.rumor_messages.max;
        let switch = run.spec.resolved_switch_round()?;
        ctx.check(
            format!("n={n} mean overhead <= 10 n / (ln n)^2"),
            mean.is_some_and(|m| m <= limit),
            format!("switch_round {switch} mean {} limit {limit:.3}", mean.map_or("incomplete".into(), |m| m.to_string())),
        );
        ctx.check(
            format!("n={n} messages <= 1.2 n on every trial"),
            max_msgs as f64 <= 1.2 * nf,
            format!("max {max_msgs}"),
        );
    }
    Ok(())
}

fn baseline_blowup(ctx: &mut Ctx) -> Result<()> {
    let ns = ctx.ns(&[1 << 10, 1 << 12, 1 << 14]);
    let mut per_n = Vec::new();
    let mut pull_zero = true;
    for &n in &ns {
        let spec = ExperimentSpec { protocol: Protocol::PolitePushPull, ..pull(n, 100) };
        let i = ctx.run(format!("polite-push-pull-n{n}"), spec)?;
        per_n.push(mean_overhead(&ctx.runs[i]).map(|m| m / n as f64));
        let j = ctx.run(format!("regular-pull-n{n}"), pull(n, 100))?;
        pull_zero &= ctx.runs[j].reports.iter().all(|r| overhead(r, n).is_ok_and(|o| o == 0));
    }
    let values: Vec<f64> = per_n.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let increasing = per_n.iter().all(Option::is_some) && values.windows(2).all(|w| w[0] < w[1]);
    ctx.check("polite overhead / n strictly increases with n", increasing, fmt_list(&values));
    ctx.check("regular pull overhead is 0 at every n", pull_zero, "");
    Ok(())
}

fn push_messages(ctx: &mut Ctx) -> Result<()> {
    let mut ratios = Vec::new();
    for n in ctx.ns(&[1 << 10, 1 << 12, 1 << 14]) {
        let spec = ExperimentSpec { protocol: Protocol::RegularPush, ..pull(n, 100) };
        let i = ctx.run(format!("regular-push-n{n}"), spec)?;
        let nf = n as f64;
        ratios.push(ctx.runs[i].summary.msgs_mean / (nf * nf.ln()));
    }
    let band = ratios.iter().all(|r| (0.2..=3.0).contains(r));
    ctx.check("push messages / (n ln n) in [0.2, 3]", band, fmt_list(&ratios));
    ctx.check("push messages / (n ln n) within 50% of its midpoint", within_midpoint(&ratios, 0.5), fmt_list(&ratios));
    Ok(())
}

fn multirumor_bits(ctx: &mut Ctx) -> Result<()> {
    for n in ctx.ns(&[10_000]) {
        let rumors = (0..3).map(|k| ScheduleEntry { origin: k, creation_round: k as u32, size_b: 512 }).collect();
        let spec = ExperimentSpec {
            protocol: Protocol::RegularPushThenPull,
            payload_bits: 512,
            rumors: Some(rumors),
            ..pull(n, 50)
        };
        let i = ctx.run(format!("multirumor-n{n}"), spec)?;
        let run = &ctx.runs[i];
        let nf = n as f64;
        let mut max_msgs = 0;
        let mut max_bits_ratio: f64 = 0.0;
        let mut duplicates = 0;
        for report in &run.multi {
            for (id, bits) in per_rumor_bit_report(report) {
                let size = report.rumors.iter().find(|r| r.rumor.id == id).map_or(1, |r| r.rumor.size_b);
                max_msgs = max_msgs.max(bits.messages);
                max_bits_ratio = max_bits_ratio.max(bits.total_bits() as f64 / (nf * size as f64));
            }
            duplicates += report.rumors.iter().map(|r| r.ledger.duplicate_pull_receipts).sum::<u64>();
        }
        let success = run.summary.success_rate;
        ctx.check(format!("n={n} every rumor reaches every process"), success == 1.0, format!("success_rate {success}"));
        ctx.check(
            format!("n={n} per-rumor messages <= 1.1 n"),
            max_msgs as f64 <= 1.1 * nf,
            format!("max {max_msgs} limit {}", 1.1 * nf),
        );
        ctx.check(
            format!("n={n} per-rumor bits <= 1.2 n b"),
            max_bits_ratio <= 1.2,
            format!("max bits / (n b) {max_bits_ratio:.4}"),
        );
        ctx.check(format!("n={n} no rumor received twice via pull"), duplicates == 0, format!("{duplicates}"));
    }
    Ok(())
}

fn lemma_sweeps(ctx: &mut Ctx) -> Result<()> {
    let mut first_pull: Option<String> = None;
    let mut first_growth: Option<String> = None;
    let mut worst_equality: f64 = 0.0;
    for n in 2..=200 {
        for f in 1..=5 {
            if let Verdict::Violation { at, lhs, rhs } = check_pull_le_push(n, f) {
                first_pull.get_or_insert(format!("n={n} f={f} u={at}: {lhs} > {rhs}"));
            }
            if f < n {
                if let Verdict::Violation { at, lhs, rhs } = check_growth_bound(n, f)? {
                    first_growth.get_or_insert(format!("n={n} f={f} i={at}: {lhs} > {rhs}"));
                }
            }
        }
        let (pull, push) = (expected_uninformed_pull_wr(n - 1, n, 1), expected_uninformed_push(n - 1, n, 1));
        worst_equality = worst_equality.max((pull - push).abs() / push.abs().max(f64::MIN_POSITIVE));
    }
    ctx.check("pull leaves no more uninformed than push (n <= 200, f <= 5)", first_pull.is_none(), first_pull.unwrap_or_default());
    ctx.check(
        "pull equals push at u = n-1 with f = 1",
        worst_equality <= CHECK_RTOL,
        format!("max relative gap {worst_equality:e}"),
    );
    ctx.check("informed growth at most i (f_in + 1) (n <= 200, f_in <= 5)", first_growth.is_none(), first_growth.unwrap_or_default());
    Ok(())
}

/// Writes `summary.csv`, one `trajectory-<label>.csv` per run, `checks.csv`
/// and `summary.json`.
pub fn emit_scenario(outcome: &ScenarioOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = OutputDir::create(dir)?;
    let rows = outcome.rows();
    out.write_summary(&rows)?;
    for (label, points) in outcome.trajectories() {
        out.write_trajectory(&format!("trajectory-{}.csv", slug(label)), points)?;
    }
    out.write_checks(&outcome.checks)?;
    out.write_json(
        "summary.json",
        &SummaryJson {
            scenario: &outcome.name,
            seed: outcome.seed,
            all_passed: outcome.all_passed(),
            rows: &rows,
            checks: &outcome.checks,
        },
    )?;
    Ok(out.commit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::StopRule;

    #[test]
    fn unknown_preset_lists_the_others() {
        let err = run_scenario::<&str>("nope", &[]).unwrap_err();
        let text = err.to_string();
        assert!(matches!(err, Error::Usage(_)));
        for p in scenario_presets() {
            assert!(text.contains(p.name));
        }
    }

    #[test]
    fn bad_overrides_fail_before_running() {
        assert!(ScenarioParams::from_overrides(&["bogus=1"]).is_err());
        assert!(ScenarioParams::from_overrides(&["ns=10,x"]).is_err());
        let p = ScenarioParams::from_overrides(&["ns=64,128", "trials=5", "seed=4"]).unwrap();
        assert_eq!(p.ns, Some(vec![64, 128]));
        assert_eq!(p.assignments.len(), 2);
    }

    #[test]
    fn lemma_sweeps_pass() {
        let out = run_scenario::<&str>("lemma-sweeps", &[]).unwrap();
        assert_eq!(out.checks.len(), 3);
        assert!(out.all_passed(), "{:?}", out.checks);
        assert!(out.runs.is_empty());
    }

    #[test]
    fn small_message_optimality() {
        let out = run_scenario("message-optimality", &["ns=200,300", "trials=10", "seed=5"]).unwrap();
        assert_eq!(out.runs.len(), 2);
        assert!(out.all_passed());
        assert_eq!(out.seed, 5);
        assert!(out.rows().iter().all(|r| r.scenario == "message-optimality" && r.trials == 10));
    }

    #[test]
    fn endgame_starts_from_n_over_ln_n() {
        let out = run_scenario("endgame", &["ns=1000", "trials=3"]).unwrap();
        let run = out.run("endgame-n1000").unwrap();
        assert_eq!(run.reports[0].trajectory[0], 1000 - 145);
        assert_eq!(run.spec.protocol_config().unwrap().initial_informed, 145);
    }

    #[test]
    fn failure_robustness_defaults() {
        let out = run_scenario("failure-robustness", &["ns=500", "trials=2"]).unwrap();
        let spec = &out.runs[0].spec;
        assert_eq!((spec.epsilon, spec.delta), (0.5, 0.5));
        assert_eq!(out.rows()[0].eps, 0.5);
    }

    #[test]
    fn overrides_reach_each_spec() {
        let out = run_scenario("push-messages", &["ns=100", "trials=4", "f_out=2"]).unwrap();
        assert_eq!(out.runs[0].spec.f_out, 2);
        assert_eq!(out.runs[0].spec.stop, StopRule::UntilComplete);
    }

    #[test]
    fn emitted_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_scenario("baseline-blowup", &["ns=64,128", "trials=3"]).unwrap();
        let files = emit_scenario(&out, dir.path()).unwrap();
        assert_eq!(files.len(), 1 + 4 + 2);
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 5);
        assert!(dir.path().join("trajectory-polite-push-pull-n64.csv").exists());
    }

    #[test]
    fn midpoint_tolerance() {
        assert!(within_midpoint(&[1.0, 2.0, 3.0], 0.5));
        assert!(!within_midpoint(&[1.0, 3.1], 0.5));
        assert!(within_midpoint(&[2.0], 0.0));
    }
}
