//! Adversarial crash schedules and stochastic call/message failures.
//!
//! The adversary is oblivious: its schedule is fixed before round 0. Call
//! failures (`delta`) are flipped once per call and message drops (`gamma`)
//! once per rumor-bearing message, each from the trial's own stream.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::network::{ProcessId, Round};

/// True with probability `1 - delta`. Draws nothing when `delta == 0`, so a
/// failure-free plan consumes exactly the randomness of a plain run.
#[inline]
pub fn call_succeeds<R: Rng + ?Sized>(rng: &mut R, delta: f64) -> bool {
    delta <= 0.0 || !rng.gen_bool(delta)
}

/// True with probability `1 - gamma`.
#[inline]
pub fn message_delivered<R: Rng + ?Sized>(rng: &mut R, gamma: f64) -> bool {
    gamma <= 0.0 || !rng.gen_bool(gamma)
}

/// Number of processes an adversary with budget `epsilon` may crash.
pub fn adversary_budget(n: usize, epsilon: f64) -> usize {
    // The nudge keeps products such as 0.29 * 100 from flooring to 28.
    (epsilon * n as f64 + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryMode {
    /// Crash `floor(epsilon * n)` uniformly chosen non-origin processes at
    /// round 0.
    WorstCaseRoundZero,
    /// A user-supplied `process -> fail round` schedule.
    Explicit(BTreeMap<ProcessId, Round>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailurePlan {
    epsilon: f64,
    crash_schedule: BTreeMap<ProcessId, Round>,
    delta: f64,
    gamma: f64,
    /// `crash_schedule` ordered by fail round.
    by_round: Vec<(Round, ProcessId)>,
}

impl Default for FailurePlan {
    fn default() -> Self {
        FailurePlan::none()
    }
}

impl FailurePlan {
    pub fn none() -> Self {
        FailurePlan {
            epsilon: 0.0,
            crash_schedule: BTreeMap::new(),
            delta: 0.0,
            gamma: 0.0,
            by_round: Vec::new(),
        }
    }

    /// Only stochastic failures: calls fail with `delta`, messages drop with
    /// `gamma`.
    pub fn stochastic(delta: f64, gamma: f64) -> Result<Self> {
        FailurePlan::none().with_stochastic(delta, gamma)
    }

    pub fn with_stochastic(mut self, delta: f64, gamma: f64) -> Result<Self> {
        check_probability("delta", delta)?;
        check_probability("gamma", gamma)?;
        self.delta = delta;
        self.gamma = gamma;
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn crash_schedule(&self) -> &BTreeMap<ProcessId, Round> {
        &self.crash_schedule
    }

    /// Whether `p` is never crashed by the adversary.
    pub fn is_good(&self, p: ProcessId) -> bool {
        !self.crash_schedule.contains_key(&p)
    }

    pub fn good_count(&self, n: usize) -> usize {
        n - self.crash_schedule.len()
    }

    /// Processes whose fail round is at or before `round`.
    pub fn crashed_by(&self, round: Round) -> impl Iterator<Item = ProcessId> + '_ {
        let end = self.by_round.partition_point(|&(r, _)| r <= round);
        self.by_round[..end].iter().map(|&(_, p)| p)
    }

    pub(crate) fn apply_crashes(&self, failed: &mut [bool], round: Round) {
        for p in self.crashed_by(round) {
            failed[p] = true;
        }
    }

    fn from_schedule(epsilon: f64, crash_schedule: BTreeMap<ProcessId, Round>) -> Self {
        let mut by_round: Vec<(Round, ProcessId)> =
            crash_schedule.iter().map(|(&p, &r)| (r, p)).collect();
        by_round.sort_unstable();
        FailurePlan {
            epsilon,
            crash_schedule,
            delta: 0.0,
            gamma: 0.0,
            by_round,
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Plan(format!("{name} must lie in [0, 1), got {p}")));
    }
    Ok(())
}

/// Builds the adversary's crash schedule. Stochastic rates start at zero; add
/// them with [`FailurePlan::with_stochastic`].
pub fn make_adversarial_plan<R: Rng + ?Sized>(
    n: usize,
    epsilon: f64,
    origin: ProcessId,
    mode: AdversaryMode,
    rng: &mut R,
) -> Result<FailurePlan> {
    check_probability("epsilon", epsilon)?;
    if origin >= n {
        return Err(Error::Plan(format!("origin {origin} out of range for n = {n}")));
    }
    let budget = adversary_budget(n, epsilon);
    let schedule = match mode {
        AdversaryMode::WorstCaseRoundZero => {
            if budget > n - 1 {
                return Err(Error::Plan(format!("cannot crash {budget} of {} non-origin processes", n - 1)));
            }
            index::sample(rng, n - 1, budget)
                .into_iter()
                .map(|i| (if i >= origin { i + 1 } else { i }, 0))
                .collect()
        }
        AdversaryMode::Explicit(schedule) => {
            if schedule.len() > budget {
                return Err(Error::Plan(format!(
                    "schedule crashes {} processes but floor(epsilon * n) = {budget}",
                    schedule.len()
                )));
            }
            if schedule.contains_key(&origin) {
                return Err(Error::Plan(format!("schedule crashes the origin {origin}")));
            }
            if let Some((&p, _)) = schedule.iter().find(|(&p, _)| p >= n) {
                return Err(Error::Plan(format!("process {p} out of range for n = {n}")));
            }
            schedule
        }
    };
    Ok(FailurePlan::from_schedule(epsilon, schedule))
}

/// Parses a crash schedule: one `process_id fail_round` pair per line. Blank
/// lines and `#` comments are skipped.
pub fn parse_crash_schedule(text: &str) -> Result<BTreeMap<ProcessId, Round>> {
    let mut schedule = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse { line: i + 1, reason };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [pid, round] = fields[..] else {
            return Err(parse_err(format!("expected `process_id fail_round`, got `{line}`")));
        };
        let pid: ProcessId = pid.parse().map_err(|e| parse_err(format!("process id: {e}")))?;
        let round: Round = round.parse().map_err(|e| parse_err(format!("fail round: {e}")))?;
        if schedule.insert(pid, round).is_some() {
            return Err(parse_err(format!("process {pid} listed twice")));
        }
    }
    Ok(schedule)
}
