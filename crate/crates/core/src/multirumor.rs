//! Concurrent dissemination of several rumors with age-stamped messages and
//! known-rumor lists attached to pull requests.
//!
//! Each rumor follows push-then-pull on its own clock: it is pushed while its
//! age is below `push_phase_len` and retires once its age reaches `lifetime`.
//! A process pulls while some rumor in its pull phase is missing; this uses
//! the global schedule as a stand-in for the activity a real process would
//! infer from the ages it has seen.
//!
//! Bit accounting per rumor-bearing message is `size_b + ceil(log2 n)` for the
//! origin id plus `ceil(log2 lifetime)` for the age. A pull request charges the
//! id and age bits of every active rumor it lists.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::failures::FailurePlan;
use crate::metrics::TrialReport;
use crate::network::{ProcessId, ProtocolConfig, Randomness, Round, RumorId, TrialRng};
use crate::protocols::{switch_round_for_overhead, RoundOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rumor {
    pub id: RumorId,
    pub size_b: u64,
    pub push_phase_len: Round,
    pub lifetime: Round,
}

impl Rumor {
    pub fn age(&self, round: Round) -> Option<Round> {
        round.checked_sub(self.id.creation_round)
    }

    pub fn is_active(&self, round: Round) -> bool {
        self.age(round).is_some_and(|a| a < self.lifetime)
    }

    pub fn in_push_phase(&self, round: Round) -> bool {
        self.age(round).is_some_and(|a| a < self.push_phase_len && a < self.lifetime)
    }

    pub fn in_pull_phase(&self, round: Round) -> bool {
        self.age(round).is_some_and(|a| a >= self.push_phase_len && a < self.lifetime)
    }

    /// Bits of the `(origin id, age)` header.
    pub fn header_bits(&self, n: usize) -> u64 {
        ceil_log2(n as u64) + ceil_log2(self.lifetime as u64)
    }

    pub fn message_bits(&self, n: usize) -> u64 {
        self.size_b + self.header_bits(n)
    }
}

pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        (64 - (x - 1).leading_zeros()) as u64
    }
}

/// One line of a rumor schedule file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub origin: ProcessId,
    pub creation_round: Round,
    pub size_b: u64,
}

/// Parses `origin creation_round size_b` triples, one per line. Blank lines
/// and `#` comments are skipped.
pub fn parse_rumor_schedule(text: &str) -> Result<Vec<ScheduleEntry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse { line: i + 1, reason };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [origin, round, size] = fields[..] else {
            return Err(err(format!("expected `origin creation_round size_b`, got `{line}`")));
        };
        entries.push(ScheduleEntry {
            origin: origin.parse().map_err(|e| err(format!("origin: {e}")))?,
            creation_round: round.parse().map_err(|e| err(format!("creation round: {e}")))?,
            size_b: size.parse().map_err(|e| err(format!("size: {e}")))?,
        });
    }
    Ok(entries)
}

/// Default lifetime: the push phase plus the pull round budget.
pub fn default_lifetime(n: usize, f_in: usize, push_phase_len: Round) -> Round {
    let pull = (8.0 * (n as f64).ln() / ((f_in + 1) as f64).ln()).ceil() as Round + 20;
    push_phase_len + pull
}

/// Validated, creation-ordered rumors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RumorSchedule {
    rumors: Vec<Rumor>,
}

impl RumorSchedule {
    /// Builds rumors with the given phase lengths; `None` selects the
    /// overhead-bounded switch point and the default lifetime.
    pub fn new(
        entries: &[ScheduleEntry],
        cfg: &ProtocolConfig,
        push_phase_len: Option<Round>,
        lifetime: Option<Round>,
    ) -> Result<Self> {
        let push = match push_phase_len {
            Some(p) => p,
            None => switch_round_for_overhead(cfg.n, cfg.f_out)?,
        };
        let lifetime = lifetime.unwrap_or_else(|| default_lifetime(cfg.n, cfg.f_in, push));
        let rumors = entries
            .iter()
            .map(|e| Rumor {
                id: RumorId { origin: e.origin, creation_round: e.creation_round },
                size_b: e.size_b,
                push_phase_len: push,
                lifetime,
            })
            .collect();
        RumorSchedule::from_rumors(rumors, cfg.n)
    }

    pub fn from_rumors(mut rumors: Vec<Rumor>, n: usize) -> Result<Self> {
        rumors.sort_by_key(|r| (r.id.creation_round, r.id.origin));
        let mut seen = BTreeSet::new();
        for r in &rumors {
            if !seen.insert(r.id) {
                return Err(Error::Schedule(format!("rumor {} scheduled twice", r.id)));
            }
            if r.id.origin >= n {
                return Err(Error::Schedule(format!("origin {} out of range for n = {n}", r.id.origin)));
            }
            if r.size_b < 1 {
                return Err(Error::Schedule(format!("rumor {} has empty payload", r.id)));
            }
            if r.push_phase_len > r.lifetime {
                return Err(Error::Schedule(format!("rumor {} pushes longer than it lives", r.id)));
            }
        }
        Ok(RumorSchedule { rumors })
    }

    pub fn rumors(&self) -> &[Rumor] {
        &self.rumors
    }

    pub fn len(&self) -> usize {
        self.rumors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rumors.is_empty()
    }

    /// First round at which every rumor has retired.
    pub fn horizon(&self) -> Round {
        self.rumors.iter().map(|r| r.id.creation_round + r.lifetime).max().unwrap_or(0)
    }
}

const UNKNOWN: Round = Round::MAX;

/// Which rumors each process holds, and from which round.
///
/// A rumor learned during round `r` is stamped `r + 1`, the first round in
/// which the process may forward it. Origins are stamped with the creation
/// round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessKnowledge {
    /// `learned[rumor][process]`.
    learned: Vec<Vec<Round>>,
}

impl ProcessKnowledge {
    fn new(n: usize, rumors: usize) -> Self {
        ProcessKnowledge { learned: vec![vec![UNKNOWN; n]; rumors] }
    }

    /// Whether `p` may use rumor `idx` in `round`.
    pub fn knows(&self, p: ProcessId, idx: usize, round: Round) -> bool {
        self.learned[idx][p] <= round
    }

    pub fn learned_at(&self, p: ProcessId, idx: usize) -> Option<Round> {
        Some(self.learned[idx][p]).filter(|&r| r != UNKNOWN)
    }

    pub fn holders(&self, idx: usize) -> usize {
        self.learned[idx].iter().filter(|&&r| r != UNKNOWN).count()
    }
}

/// Mutable state of a multi-rumor trial.
#[derive(Debug, Clone)]
pub struct MultiRumorState {
    round: Round,
    failed: Vec<bool>,
    knowledge: ProcessKnowledge,
    /// Delivered pull replies per rumor and process.
    pull_receipts: Vec<Vec<u32>>,
    ledger: Vec<RumorLedger>,
}

impl MultiRumorState {
    pub fn new(n: usize, schedule: &RumorSchedule) -> Self {
        let k = schedule.len();
        MultiRumorState {
            round: 0,
            failed: vec![false; n],
            knowledge: ProcessKnowledge::new(n, k),
            pull_receipts: vec![vec![0; n]; k],
            ledger: vec![RumorLedger::default(); k],
        }
    }

    pub fn round(&self) -> Round {
        self.round
    }

    pub fn knowledge(&self) -> &ProcessKnowledge {
        &self.knowledge
    }

    pub fn ledger(&self) -> &[RumorLedger] {
        &self.ledger
    }

    pub fn is_failed(&self, p: ProcessId) -> bool {
        self.failed[p]
    }

    fn n(&self) -> usize {
        self.failed.len()
    }
}

/// Everything charged to one rumor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RumorLedger {
    pub messages: u64,
    pub rumor_bits: u64,
    pub control_bits: u64,
    pub push_messages: u64,
    pub pull_messages: u64,
    /// Deliveries of this rumor via a pull reply to a process that had
    /// already received it via a pull reply.
    pub duplicate_pull_receipts: u64,
    /// Largest age stamped on any message carrying this rumor.
    pub max_age_sent: Option<Round>,
}

impl RumorLedger {
    fn charge(&mut self, rumor: &Rumor, n: usize, age: Round) {
        self.messages += 1;
        self.rumor_bits += rumor.message_bits(n);
        self.max_age_sent = Some(self.max_age_sent.map_or(age, |m| m.max(age)));
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiRoundOutcome {
    pub totals: RoundOutcome,
    /// Per rumor, in schedule order.
    pub new_informed: Vec<u64>,
}

/// Applies the crashes due by the current round, then places rumors created
/// in it at their live origins. Idempotent within a round.
fn open_round(state: &mut MultiRumorState, schedule: &RumorSchedule, plan: &FailurePlan) {
    let round = state.round;
    plan.apply_crashes(&mut state.failed, round);
    for (idx, rumor) in schedule.rumors().iter().enumerate() {
        let origin = rumor.id.origin;
        if rumor.id.creation_round == round && !state.failed[origin] {
            state.knowledge.learned[idx][origin] = round;
        }
    }
}

/// Runs one round for every rumor in `schedule`.
///
/// Order of events: rumors created this round appear at their origin, crashes
/// due this round take effect, then every live process pushes its push-phase
/// rumors as one bundle to `f_out` peers, and every live process missing a
/// pull-phase rumor sends `f_in` requests listing the active rumors it knows.
/// A contacted live process replies with every active rumor it knows that is
/// not on the list. All decisions use the round-start snapshot.
pub fn multirumor_round<D: Randomness + ?Sized>(
    state: &mut MultiRumorState,
    schedule: &RumorSchedule,
    cfg: &ProtocolConfig,
    plan: &FailurePlan,
    rng: &mut D,
) -> MultiRoundOutcome {
    open_round(state, schedule, plan);
    let round = state.round;
    let n = state.n();
    let rumors = schedule.rumors();

    let mut outcome = MultiRoundOutcome { totals: RoundOutcome::default(), new_informed: vec![0; rumors.len()] };
    let mut peers = Vec::new();
    let mut bundle: Vec<usize> = Vec::with_capacity(rumors.len());
    let mut pending: Vec<(usize, ProcessId)> = Vec::new();
    let knowledge = &state.knowledge;
    let ledger = &mut state.ledger;
    let failed = &state.failed;
    let age = |idx: usize| round - rumors[idx].id.creation_round;

    for p in 0..n {
        if failed[p] {
            continue;
        }
        bundle.clear();
        bundle.extend((0..rumors.len()).filter(|&i| rumors[i].in_push_phase(round) && knowledge.knows(p, i, round)));
        if bundle.is_empty() {
            continue;
        }
        rng.peers(n, cfg.f_out, cfg.sampling, p, &mut peers);
        for &target in &peers {
            for &i in &bundle {
                ledger[i].charge(&rumors[i], n, age(i));
                ledger[i].push_messages += 1;
            }
            outcome.totals.rumor_messages += bundle.len() as u64;
            if !rng.call_succeeds(plan.delta()) {
                continue;
            }
            if rng.message_delivered(plan.gamma()) && !failed[target] {
                pending.extend(bundle.iter().map(|&i| (i, target)));
            }
        }
    }

    let mut known: Vec<usize> = Vec::with_capacity(rumors.len());
    let mut reply: Vec<usize> = Vec::with_capacity(rumors.len());
    for p in 0..n {
        if failed[p] {
            continue;
        }
        let wants = (0..rumors.len()).any(|i| rumors[i].in_pull_phase(round) && !knowledge.knows(p, i, round));
        if !wants {
            continue;
        }
        known.clear();
        known.extend((0..rumors.len()).filter(|&i| rumors[i].is_active(round) && knowledge.knows(p, i, round)));
        rng.peers(n, cfg.f_in, cfg.sampling, p, &mut peers);
        for &target in &peers {
            outcome.totals.requests_sent += 1;
            for &i in &known {
                ledger[i].control_bits += rumors[i].header_bits(n);
            }
            if !rng.call_succeeds(plan.delta()) || failed[target] {
                continue;
            }
            reply.clear();
            reply.extend(
                (0..rumors.len())
                    .filter(|&i| rumors[i].is_active(round) && knowledge.knows(target, i, round) && !known.contains(&i)),
            );
            if reply.is_empty() {
                continue;
            }
            for &i in &reply {
                ledger[i].charge(&rumors[i], n, age(i));
                ledger[i].pull_messages += 1;
            }
            outcome.totals.rumor_messages += reply.len() as u64;
            if rng.message_delivered(plan.gamma()) {
                for &i in &reply {
                    let receipts = &mut state.pull_receipts[i][p];
                    *receipts += 1;
                    if *receipts > 1 {
                        ledger[i].duplicate_pull_receipts += 1;
                    }
                    pending.push((i, p));
                }
            }
        }
    }

    for (i, p) in pending {
        let slot = &mut state.knowledge.learned[i][p];
        if *slot == UNKNOWN {
            *slot = round + 1;
            outcome.new_informed[i] += 1;
            outcome.totals.new_informed += 1;
        }
    }
    state.round += 1;
    outcome
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RumorOutcome {
    pub rumor: Rumor,
    pub ledger: RumorLedger,
    /// False when the origin had crashed by the creation round.
    pub created: bool,
    /// Good processes holding the rumor at the end.
    pub informed_good: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiRumorReport {
    /// Every good process holds every created rumor.
    pub completed: bool,
    pub rounds: Round,
    pub requests_sent: u64,
    pub rumors: Vec<RumorOutcome>,
    /// Per round, good processes missing at least one created rumor.
    pub trajectory: Vec<u64>,
    pub seed: u64,
}

impl MultiRumorReport {
    pub fn rumor_messages(&self) -> u64 {
        self.rumors.iter().map(|r| r.ledger.messages).sum()
    }

    /// Collapses the report into a single-trial report for aggregation.
    pub fn to_trial_report(&self) -> TrialReport {
        TrialReport {
            completed: self.completed,
            rounds: self.rounds,
            rumor_messages: self.rumor_messages(),
            rumor_bits: self.rumors.iter().map(|r| r.ledger.rumor_bits).sum(),
            control_bits: self.rumors.iter().map(|r| r.ledger.control_bits).sum(),
            requests_sent: self.requests_sent,
            trajectory: self.trajectory.clone(),
            seed: self.seed,
        }
    }
}

/// Bits and messages attributed to each rumor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RumorBits {
    pub rumor_bits: u64,
    pub control_bits: u64,
    pub messages: u64,
}

impl RumorBits {
    pub fn total_bits(&self) -> u64 {
        self.rumor_bits + self.control_bits
    }
}

pub fn per_rumor_bit_report(report: &MultiRumorReport) -> BTreeMap<RumorId, RumorBits> {
    report
        .rumors
        .iter()
        .map(|r| {
            (r.rumor.id, RumorBits {
                rumor_bits: r.ledger.rumor_bits,
                control_bits: r.ledger.control_bits,
                messages: r.ledger.messages,
            })
        })
        .collect()
}

/// Runs rounds until no further message is possible: every rumor has been
/// created, none is still being pushed, and no live process misses a rumor in
/// its pull phase. The schedule horizon caps the run.
pub fn run_multirumor_trial(
    schedule: &RumorSchedule,
    cfg: &ProtocolConfig,
    plan: &FailurePlan,
    seed: u64,
) -> Result<MultiRumorReport> {
    cfg.validate()?;
    let n = cfg.n;
    let rng = TrialRng::new(seed);
    let mut state = MultiRumorState::new(n, schedule);
    let rumors = schedule.rumors();
    let good: Vec<bool> = (0..n).map(|p| plan.is_good(p)).collect();
    let last_creation = rumors.iter().map(|r| r.id.creation_round).max();

    let missing = |state: &MultiRumorState, round: Round| -> u64 {
        (0..n)
            .filter(|&p| good[p])
            .filter(|&p| {
                (0..rumors.len()).any(|i| {
                    let origin = rumors[i].id.origin;
                    state.knowledge.knows(origin, i, round) && !state.knowledge.knows(p, i, round)
                })
            })
            .count() as u64
    };
    let quiescent = |state: &MultiRumorState| -> bool {
        let round = state.round;
        if last_creation.is_some_and(|c| c >= round) {
            return false;
        }
        rumors.iter().enumerate().all(|(i, r)| {
            !r.in_push_phase(round)
                && (!r.in_pull_phase(round)
                    || (0..n).all(|p| state.failed[p] || state.knowledge.knows(p, i, round)))
        })
    };

    open_round(&mut state, schedule, plan);
    let mut trajectory = vec![missing(&state, 0)];
    let mut requests = 0;
    while state.round < schedule.horizon() && !quiescent(&state) {
        let mut stream = rng.round_stream(state.round);
        let out = multirumor_round(&mut state, schedule, cfg, plan, &mut stream);
        requests += out.totals.requests_sent;
        open_round(&mut state, schedule, plan);
        trajectory.push(missing(&state, state.round));
    }

    let outcomes: Vec<RumorOutcome> = rumors
        .iter()
        .enumerate()
        .map(|(i, r)| RumorOutcome {
            rumor: *r,
            ledger: state.ledger[i],
            created: state.knowledge.learned_at(r.id.origin, i).is_some(),
            informed_good: (0..n).filter(|&p| good[p] && state.knowledge.learned_at(p, i).is_some()).count(),
        })
        .collect();
    let good_count = plan.good_count(n);
    let completed = outcomes.iter().all(|o| !o.created || o.informed_good == good_count);
    Ok(MultiRumorReport {
        completed,
        rounds: state.round,
        requests_sent: requests,
        rumors: outcomes,
        trajectory,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Protocol, SamplingMode};
    use crate::protocols::{run_trial, StopRule};

    fn entry(origin: ProcessId, creation_round: Round, size_b: u64) -> ScheduleEntry {
        ScheduleEntry { origin, creation_round, size_b }
    }

    #[test]
    fn header_bits_example() {
        let rumor = Rumor {
            id: RumorId { origin: 0, creation_round: 0 },
            size_b: 8,
            push_phase_len: 2,
            lifetime: 16,
        };
        assert_eq!(rumor.message_bits(4), 14);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(10_000), 14);
        assert_eq!(ceil_log2(1 << 20), 20);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let cfg = ProtocolConfig::new(Protocol::RegularPushThenPull, 16);
        let err = RumorSchedule::new(&[entry(3, 1, 8), entry(3, 1, 16)], &cfg, Some(2), Some(10));
        assert!(matches!(err, Err(Error::Schedule(_))));
        assert!(RumorSchedule::new(&[entry(3, 1, 0)], &cfg, Some(2), Some(10)).is_err());
        assert!(RumorSchedule::new(&[entry(99, 1, 8)], &cfg, Some(2), Some(10)).is_err());
        assert!(RumorSchedule::new(&[entry(3, 1, 8)], &cfg, Some(12), Some(10)).is_err());
    }

    #[test]
    fn schedule_file_format() {
        let entries = parse_rumor_schedule("# origin round bits\n0 0 512\n\n7 3 64\n").unwrap();
        assert_eq!(entries, vec![entry(0, 0, 512), entry(7, 3, 64)]);
        assert!(matches!(parse_rumor_schedule("0 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_rumor_schedule("x 0 1\n").is_err());
    }

    #[test]
    fn single_rumor_matches_push_then_pull() {
        let n = 1000;
        let push = switch_round_for_overhead(n, 1).unwrap();
        let cfg = ProtocolConfig::new(Protocol::RegularPushThenPull, n).with_switch_round(push);
        let schedule = RumorSchedule::new(&[entry(0, 0, 64)], &cfg, None, None).unwrap();
        for seed in 0..10 {
            let multi = run_multirumor_trial(&schedule, &cfg, &FailurePlan::none(), seed).unwrap();
            let single = run_trial(&cfg, &FailurePlan::none(), StopRule::UntilComplete, seed).unwrap();
            assert!(single.completed && multi.completed);
            assert_eq!(multi.rumors[0].ledger.messages, single.rumor_messages, "seed {seed}");
            assert_eq!(multi.rounds, single.rounds);
            assert_eq!(multi.trajectory, single.trajectory);
        }
    }

    #[test]
    fn identical_payloads_from_two_origins_stay_distinct() {
        let n = 200;
        let cfg = ProtocolConfig::new(Protocol::RegularPushThenPull, n);
        let schedule = RumorSchedule::new(&[entry(0, 0, 32), entry(1, 0, 32)], &cfg, None, None).unwrap();
        let report = run_multirumor_trial(&schedule, &cfg, &FailurePlan::none(), 4).unwrap();
        assert!(report.completed);
        let bits = per_rumor_bit_report(&report);
        assert_eq!(bits.len(), 2);
        for r in &report.rumors {
            assert_eq!(r.informed_good, n);
            assert!(r.ledger.messages >= n as u64 - 1);
        }
    }

    #[test]
    fn empty_schedule_gives_empty_report() {
        let cfg = ProtocolConfig::new(Protocol::RegularPushThenPull, 50);
        let schedule = RumorSchedule::new(&[], &cfg, None, None).unwrap();
        let report = run_multirumor_trial(&schedule, &cfg, &FailurePlan::none(), 0).unwrap();
        assert!(per_rumor_bit_report(&report).is_empty());
        assert_eq!(report.rounds, 0);
    }

    #[test]
    fn accounting_identity_and_retirement() {
        let n = 500;
        let cfg = ProtocolConfig::new(Protocol::RegularPushThenPull, n).with_sampling(SamplingMode::WithoutReplacement);
        let schedule =
            RumorSchedule::new(&[entry(0, 0, 100), entry(5, 2, 100), entry(9, 4, 300)], &cfg, Some(4), Some(12)).unwrap();
        for seed in 0..5 {
            let report = run_multirumor_trial(&schedule, &cfg, &FailurePlan::none(), seed).unwrap();
            for r in &report.rumors {
                assert_eq!(r.ledger.rumor_bits, r.ledger.messages * r.rumor.message_bits(n));
                assert_eq!(r.ledger.messages, r.ledger.push_messages + r.ledger.pull_messages);
                assert!(r.ledger.max_age_sent.unwrap() < r.rumor.lifetime);
                assert_eq!(r.ledger.duplicate_pull_receipts, 0);
            }
        }
    }

    #[test]
    fn short_lifetime_leaves_rumor_incomplete() {
        let n = 4096;
        let cfg = ProtocolConfig::new(Protocol::RegularPushThenPull, n);
        let schedule = RumorSchedule::new(&[entry(0, 0, 8)], &cfg, Some(1), Some(3)).unwrap();
        let report = run_multirumor_trial(&schedule, &cfg, &FailurePlan::none(), 1).unwrap();
        assert!(!report.completed);
        assert_eq!(report.rounds, 3);
        assert!(report.rumors[0].ledger.max_age_sent.unwrap() <= 2);
    }

    #[test]
    fn pull_request_lists_are_charged() {
        // Two rumors, the second created later: processes that hold the first
        // list it while pulling the second.
        let n = 300;
        let cfg = ProtocolConfig::new(Protocol::RegularPushThenPull, n);
        let schedule = RumorSchedule::new(&[entry(0, 0, 64), entry(1, 30, 64)], &cfg, Some(3), Some(60)).unwrap();
        let report = run_multirumor_trial(&schedule, &cfg, &FailurePlan::none(), 2).unwrap();
        assert!(report.completed);
        assert!(report.rumors[0].ledger.control_bits > 0);
        let header = report.rumors[0].rumor.header_bits(n);
        assert_eq!(report.rumors[0].ledger.control_bits % header, 0);
    }
}
