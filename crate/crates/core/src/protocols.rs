//! Round engines for regular pull, regular push, regular push-then-pull and
//! the polite push-pull baseline, plus the single-trial driver.
//!
//! Every engine reads the round-start snapshot of [`NetworkState`] and applies
//! all state changes at round end: a process informed in round `r` neither
//! replies nor pushes before round `r + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::failures::FailurePlan;
use crate::metrics::TrialReport;
use crate::network::{init_state_with, NetworkState, ProcessId, Protocol, ProtocolConfig, Randomness, Round, TrialRng};

/// Counts produced by one round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub new_informed: u64,
    /// Rumor-bearing transmissions, including duplicates and dropped messages.
    pub rumor_messages: u64,
    /// Pull requests issued (calls placed, for the polite baseline).
    pub requests_sent: u64,
}

impl std::ops::AddAssign for RoundOutcome {
    fn add_assign(&mut self, rhs: Self) {
        self.new_informed += rhs.new_informed;
        self.rumor_messages += rhs.rumor_messages;
        self.requests_sent += rhs.requests_sent;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopRule {
    /// Run exactly `round_budget` rounds.
    FixedBudget,
    /// Stop once every good process is informed, or at `round_budget`.
    UntilComplete,
}

impl StopRule {
    pub fn as_str(self) -> &'static str {
        match self {
            StopRule::FixedBudget => "fixed-budget",
            StopRule::UntilComplete => "until-complete",
        }
    }
}

impl std::str::FromStr for StopRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-budget" => Ok(StopRule::FixedBudget),
            "until-complete" => Ok(StopRule::UntilComplete),
            other => config(format!("unknown stop rule `{other}`")),
        }
    }
}

fn begin_round(state: &mut NetworkState, plan: &FailurePlan) {
    for p in plan.crashed_by(state.round()) {
        state.fail(p);
    }
}

fn finish_round(state: &mut NetworkState, newly: &[ProcessId], mut outcome: RoundOutcome) -> RoundOutcome {
    for &p in newly {
        outcome.new_informed += state.inform_live(p) as u64;
    }
    state.advance_round();
    outcome
}

/// One round of regular pull: every live uninformed process sends exactly
/// `f_in` requests; live processes informed at round start reply.
pub fn pull_round<D: Randomness + ?Sized>(
    state: &mut NetworkState,
    cfg: &ProtocolConfig,
    plan: &FailurePlan,
    rng: &mut D,
) -> RoundOutcome {
    begin_round(state, plan);
    let n = state.n();
    let mut outcome = RoundOutcome::default();
    let mut peers = Vec::with_capacity(cfg.f_in);
    let mut newly = Vec::new();
    let (delta, gamma) = (plan.delta(), plan.gamma());
    for p in 0..n {
        if state.is_informed(p) || state.is_failed(p) {
            continue;
        }
        rng.peers(n, cfg.f_in, cfg.sampling, p, &mut peers);
        outcome.requests_sent += cfg.f_in as u64;
        let mut received = false;
        for &target in &peers {
            if !rng.call_succeeds(delta) {
                continue;
            }
            let replies = state.is_informed(target) & !state.is_failed(target);
            outcome.rumor_messages += replies as u64;
            received |= if gamma > 0.0 { replies && rng.message_delivered(gamma) } else { replies };
        }
        if received {
            newly.push(p);
        }
    }
    finish_round(state, &newly, outcome)
}

/// One round of regular push: every live process informed at round start
/// sends the rumor to exactly `f_out` peers.
pub fn push_round<D: Randomness + ?Sized>(
    state: &mut NetworkState,
    cfg: &ProtocolConfig,
    plan: &FailurePlan,
    rng: &mut D,
) -> RoundOutcome {
    begin_round(state, plan);
    let n = state.n();
    let mut outcome = RoundOutcome::default();
    let mut peers = Vec::with_capacity(cfg.f_out);
    let mut newly = Vec::new();
    let (delta, gamma) = (plan.delta(), plan.gamma());
    for p in 0..n {
        if !state.is_informed(p) || state.is_failed(p) {
            continue;
        }
        rng.peers(n, cfg.f_out, cfg.sampling, p, &mut peers);
        outcome.rumor_messages += peers.len() as u64;
        for &target in &peers {
            if rng.call_succeeds(delta) && rng.message_delivered(gamma) {
                newly.push(target);
            }
        }
    }
    finish_round(state, &newly, outcome)
}

/// One round of the polite model: every live process places one call, and on
/// each established call both parties transmit the rumor whenever they hold
/// it.
pub fn polite_pushpull_round<D: Randomness + ?Sized>(
    state: &mut NetworkState,
    cfg: &ProtocolConfig,
    plan: &FailurePlan,
    rng: &mut D,
) -> RoundOutcome {
    begin_round(state, plan);
    let n = state.n();
    let mut outcome = RoundOutcome::default();
    let mut peers = Vec::with_capacity(1);
    let mut newly = Vec::new();
    for caller in 0..n {
        if state.is_failed(caller) {
            continue;
        }
        rng.peers(n, 1, cfg.sampling, caller, &mut peers);
        let callee = peers[0];
        outcome.requests_sent += 1;
        if !rng.call_succeeds(plan.delta()) {
            continue;
        }
        let callee_live = !state.is_failed(callee);
        if state.is_informed(caller) {
            outcome.rumor_messages += 1;
            if rng.message_delivered(plan.gamma()) && callee_live && !state.is_informed(callee) {
                newly.push(callee);
            }
        }
        if callee_live && state.is_informed(callee) {
            outcome.rumor_messages += 1;
            if rng.message_delivered(plan.gamma()) && !state.is_informed(caller) {
                newly.push(caller);
            }
        }
    }
    finish_round(state, &newly, outcome)
}

/// Runs one round of `cfg.protocol`; push-then-pull pushes while
/// `state.round() < cfg.switch_round`.
pub fn step<D: Randomness + ?Sized>(
    state: &mut NetworkState,
    cfg: &ProtocolConfig,
    plan: &FailurePlan,
    rng: &mut D,
) -> RoundOutcome {
    match cfg.protocol {
        Protocol::RegularPull => pull_round(state, cfg, plan, rng),
        Protocol::RegularPush => push_round(state, cfg, plan, rng),
        Protocol::RegularPushThenPull if state.round() < cfg.switch_round => push_round(state, cfg, plan, rng),
        Protocol::RegularPushThenPull => pull_round(state, cfg, plan, rng),
        Protocol::PolitePushPull => polite_pushpull_round(state, cfg, plan, rng),
    }
}

/// Runs a whole trial from the configured initial population.
///
/// Completion means every good process (one the adversary never crashes) is
/// informed. Running out of budget is reported, not an error.
pub fn run_trial(cfg: &ProtocolConfig, plan: &FailurePlan, stop: StopRule, seed: u64) -> Result<TrialReport> {
    cfg.validate()?;
    if !plan.is_good(cfg.origin) {
        return Err(Error::Plan(format!("origin {} is scheduled to crash", cfg.origin)));
    }
    if let Some((&p, _)) = plan.crash_schedule().iter().next_back().filter(|(&p, _)| p >= cfg.n) {
        return Err(Error::Plan(format!("crash schedule names process {p} but n = {}", cfg.n)));
    }
    let state = init_state_with(cfg.n, cfg.origin, cfg.initial_informed)?;
    Ok(drive(state, cfg, plan, stop, seed))
}

fn drive(mut state: NetworkState, cfg: &ProtocolConfig, plan: &FailurePlan, stop: StopRule, seed: u64) -> TrialReport {
    let rng = TrialRng::new(seed);
    let good: Option<Vec<bool>> = if plan.crash_schedule().is_empty() {
        None
    } else {
        Some((0..cfg.n).map(|p| plan.is_good(p)).collect())
    };
    let good_uninformed = |state: &NetworkState| match &good {
        None => state.uninformed_count(),
        Some(mask) => (0..state.n()).filter(|&p| mask[p] && !state.is_informed(p)).count(),
    };

    let mut totals = RoundOutcome::default();
    let mut trajectory = vec![state.uninformed_count() as u64];
    let mut remaining = good_uninformed(&state);
    loop {
        let rounds = state.round();
        let done = match stop {
            StopRule::FixedBudget => rounds >= cfg.round_budget,
            StopRule::UntilComplete => remaining == 0 || rounds >= cfg.round_budget,
        };
        if done {
            break;
        }
        let mut stream = rng.round_stream(rounds);
        totals += step(&mut state, cfg, plan, &mut stream);
        trajectory.push(state.uninformed_count() as u64);
        remaining = good_uninformed(&state);
    }
    TrialReport {
        completed: remaining == 0,
        rounds: state.round(),
        rumor_messages: totals.rumor_messages,
        rumor_bits: totals.rumor_messages * cfg.payload_bits,
        control_bits: 0,
        requests_sent: totals.requests_sent,
        trajectory,
        seed,
    }
}

/// Like [`run_trial`] but starting from an explicit state, e.g. a preset
/// population. The state's round counter is kept.
pub fn run_trial_from(
    state: NetworkState,
    cfg: &ProtocolConfig,
    plan: &FailurePlan,
    stop: StopRule,
    seed: u64,
) -> Result<TrialReport> {
    cfg.validate()?;
    if state.n() != cfg.n {
        return config(format!("state has {} processes but n = {}", state.n(), cfg.n));
    }
    Ok(drive(state, cfg, plan, stop, seed))
}

/// Push-phase length keeping push-then-pull overhead at `O(n / (ln n)^2)`:
/// `floor(log_{f_out+1} n - log_{f_out+1} ln n)`, clamped at 0.
pub fn switch_round_for_overhead(n: usize, f_out: usize) -> Result<Round> {
    if n < 3 {
        return config(format!("switch point needs n >= 3, got {n}"));
    }
    if f_out < 1 {
        return config("f_out must be at least 1");
    }
    let n = n as f64;
    let base = ((f_out + 1) as f64).ln();
    let rounds = (n.ln() / base - n.ln().ln() / base).floor();
    Ok(rounds.max(0.0) as Round)
}
