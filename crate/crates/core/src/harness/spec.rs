//! Experiment specifications: a flat `key=value` file plus command-line
//! overrides, later assignments winning.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::failures::{make_adversarial_plan, parse_crash_schedule, AdversaryMode, FailurePlan};
use crate::multirumor::{parse_rumor_schedule, RumorSchedule, ScheduleEntry};
use crate::network::{ProcessId, Protocol, ProtocolConfig, Round, SamplingMode, TrialRng, DEFAULT_PAYLOAD_BITS};
use crate::protocols::{switch_round_for_overhead, StopRule};

/// How many processes start informed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialInformed {
    Count(usize),
    /// `ceil(n / ln n)`, the endgame starting point.
    NOverLnN,
}

impl InitialInformed {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            InitialInformed::Count(c) => c,
            InitialInformed::NOverLnN => (n as f64 / (n as f64).ln()).ceil() as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub protocol: Protocol,
    pub n: usize,
    pub f_in: usize,
    pub f_out: usize,
    pub sampling: SamplingMode,
    /// `None` selects the protocol's default budget.
    pub round_budget: Option<Round>,
    /// `None` selects the overhead-bounded switch point for push-then-pull.
    pub switch_round: Option<Round>,
    /// Master seed; trial `i` runs with `seed ^ mix(i)`.
    pub seed: u64,
    pub origin: ProcessId,
    pub initial_informed: InitialInformed,
    pub payload_bits: u64,
    pub epsilon: f64,
    pub crash_file: Option<PathBuf>,
    pub delta: f64,
    pub gamma: f64,
    pub trials: u64,
    pub stop: StopRule,
    pub scenario: Option<String>,
    /// When set, trials run the multi-rumor engine on this schedule file.
    pub rumor_schedule: Option<PathBuf>,
    /// Inline schedule, `origin:creation_round:size_b` comma-separated.
    /// Takes precedence over `rumor_schedule`.
    pub rumors: Option<Vec<ScheduleEntry>>,
    pub push_phase_len: Option<Round>,
    pub lifetime: Option<Round>,
    pub workers: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            protocol: Protocol::RegularPull,
            n: 1000,
            f_in: 1,
            f_out: 1,
            sampling: SamplingMode::WithReplacement,
            round_budget: None,
            switch_round: None,
            seed: 0,
            origin: 0,
            initial_informed: InitialInformed::Count(1),
            payload_bits: DEFAULT_PAYLOAD_BITS,
            epsilon: 0.0,
            crash_file: None,
            delta: 0.0,
            gamma: 0.0,
            trials: 100,
            stop: StopRule::UntilComplete,
            scenario: None,
            rumor_schedule: None,
            rumors: None,
            push_phase_len: None,
            lifetime: None,
            workers: None,
        }
    }
}

/// Keys accepted in config files and `--set`.
pub const KEYS: &[&str] = &[
    "protocol",
    "n",
    "f_in",
    "f_out",
    "sampling",
    "round_budget",
    "switch_round",
    "seed",
    "origin",
    "initial_informed",
    "payload_bits",
    "eps",
    "crash_file",
    "delta",
    "gamma",
    "trials",
    "stop",
    "scenario",
    "rumor_schedule",
    "rumors",
    "push_phase_len",
    "lifetime",
    "workers",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Config(format!("{key}: cannot parse `{value}`: {e}")))
}

fn parse_optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if value == "auto" || value == "default" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn parse_inline_rumors(value: &str) -> Result<Vec<ScheduleEntry>> {
    let lines: Vec<String> = value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.replace(':', " "))
        .collect();
    parse_rumor_schedule(&lines.join("\n")).map_err(|e| Error::Config(format!("rumors: {e}")))
}

/// Splits `key=value`, trimming both sides.
pub fn split_assignment(raw: &str) -> Result<(String, String)> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("expected key=value, got `{raw}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl ExperimentSpec {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "protocol" => self.protocol = value.parse()?,
            "n" => self.n = parse_num(key, value)?,
            "f_in" | "fin" => self.f_in = parse_num(key, value)?,
            "f_out" | "fout" => self.f_out = parse_num(key, value)?,
            "sampling" => self.sampling = value.parse()?,
            "round_budget" => self.round_budget = parse_optional(key, value)?,
            "switch_round" => self.switch_round = parse_optional(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "origin" => self.origin = parse_num(key, value)?,
            "initial_informed" => {
                self.initial_informed = if value == "n/ln n" || value == "n/ln(n)" {
                    InitialInformed::NOverLnN
                } else {
                    InitialInformed::Count(parse_num(key, value)?)
                }
            }
            "payload_bits" | "b" => self.payload_bits = parse_num(key, value)?,
            "eps" | "epsilon" => self.epsilon = parse_num(key, value)?,
            "crash_file" => self.crash_file = Some(PathBuf::from(value)),
            "delta" => self.delta = parse_num(key, value)?,
            "gamma" => self.gamma = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "stop" => self.stop = value.parse()?,
            "scenario" => self.scenario = Some(value.to_string()),
            "rumor_schedule" => self.rumor_schedule = Some(PathBuf::from(value)),
            "rumors" => self.rumors = Some(parse_inline_rumors(value)?),
            "push_phase_len" => self.push_phase_len = parse_optional(key, value)?,
            "lifetime" => self.lifetime = parse_optional(key, value)?,
            "workers" => self.workers = parse_optional(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown key `{other}`; known keys: {}", KEYS.join(", "))))
            }
        }
        Ok(())
    }

    /// Applies a `key=value` file: one assignment per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_assignment(line).map_err(|e| Error::Parse { line: i + 1, reason: e.to_string() })?;
            self.set(&k, &v).map_err(|e| Error::Parse { line: i + 1, reason: e.to_string() })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        spec.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(spec)
    }

    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for raw in overrides {
            let (k, v) = split_assignment(raw.as_ref())?;
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn resolved_switch_round(&self) -> Result<Round> {
        match (self.protocol, self.switch_round) {
            (_, Some(s)) => Ok(s),
            (Protocol::RegularPushThenPull, None) => switch_round_for_overhead(self.n, self.f_out),
            (_, None) => Ok(0),
        }
    }

    pub fn protocol_config(&self) -> Result<ProtocolConfig> {
        let mut cfg = ProtocolConfig::new(self.protocol, self.n)
            .with_fanouts(self.f_in, self.f_out)
            .with_sampling(self.sampling)
            .with_seed(self.seed)
            .with_switch_round(self.resolved_switch_round()?);
        if let Some(budget) = self.round_budget {
            cfg.round_budget = budget;
        }
        cfg.origin = self.origin;
        cfg.initial_informed = self.initial_informed.resolve(self.n);
        cfg.payload_bits = self.payload_bits;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The failure plan shared by every trial; the adversary's choices come
    /// from the master seed's setup stream.
    pub fn failure_plan(&self) -> Result<FailurePlan> {
        let mode = match &self.crash_file {
            Some(path) => AdversaryMode::Explicit(parse_crash_schedule(&std::fs::read_to_string(path)?)?),
            None => AdversaryMode::WorstCaseRoundZero,
        };
        let mut rng = TrialRng::new(self.seed).setup_stream();
        make_adversarial_plan(self.n, self.epsilon, self.origin, mode, &mut rng)?.with_stochastic(self.delta, self.gamma)
    }

    pub fn rumor_schedule(&self, cfg: &ProtocolConfig) -> Result<Option<RumorSchedule>> {
        let entries = match (&self.rumors, &self.rumor_schedule) {
            (Some(inline), _) => inline.clone(),
            (None, Some(path)) => parse_rumor_schedule(&std::fs::read_to_string(path)?)?,
            (None, None) => return Ok(None),
        };
        RumorSchedule::new(&entries, cfg, self.push_phase_len, self.lifetime).map(Some)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return config("trials must be at least 1");
        }
        self.protocol_config()?;
        self.failure_plan()?;
        Ok(())
    }

    pub fn scenario_name(&self) -> &str {
        self.scenario.as_deref().unwrap_or("custom")
    }
}
