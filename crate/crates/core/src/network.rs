//! Network state, configuration, identities and peer sampling shared by every
//! protocol engine.
//!
//! Processes are dense ids in `[0, n)`. Randomness is derived per trial and per
//! round from a ChaCha stream so that any round of any trial can be replayed
//! from the trial seed alone.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::failures;

pub type ProcessId = usize;
pub type Round = u32;

/// How a process picks the `f` peers it calls in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SamplingMode {
    /// `f` independent uniform draws from `[0, n)`; self and duplicates allowed.
    WithReplacement,
    /// `f` distinct uniform draws from the other `n - 1` processes.
    WithoutReplacement,
}

impl SamplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMode::WithReplacement => "with-replacement",
            SamplingMode::WithoutReplacement => "without-replacement",
        }
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with-replacement" | "wr" => Ok(SamplingMode::WithReplacement),
            "without-replacement" | "without-replacement-excluding-self" | "wor" => {
                Ok(SamplingMode::WithoutReplacement)
            }
            other => config(format!("unknown sampling mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    RegularPull,
    RegularPush,
    RegularPushThenPull,
    PolitePushPull,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [
        Protocol::RegularPull,
        Protocol::RegularPush,
        Protocol::RegularPushThenPull,
        Protocol::PolitePushPull,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::RegularPull => "regular-pull",
            Protocol::RegularPush => "regular-push",
            Protocol::RegularPushThenPull => "regular-push-then-pull",
            Protocol::PolitePushPull => "polite-push-pull",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown protocol `{s}`")))
    }
}

/// Parameters of one dissemination run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n: usize,
    pub f_in: usize,
    pub f_out: usize,
    pub sampling: SamplingMode,
    pub protocol: Protocol,
    pub round_budget: Round,
    /// Push rounds before switching to pull; only read by push-then-pull.
    pub switch_round: Round,
    pub seed: u64,
    pub origin: ProcessId,
    /// Number of processes holding the rumor at round 0. The origin is always
    /// one of them; the rest are the lowest remaining ids.
    pub initial_informed: usize,
    /// Rumor payload size `b` in bits.
    pub payload_bits: u64,
}

pub const DEFAULT_PAYLOAD_BITS: u64 = 256;

impl ProtocolConfig {
    /// A config with unit fanouts, with-replacement sampling, origin 0 and
    /// the default round budget for `protocol`.
    pub fn new(protocol: Protocol, n: usize) -> Self {
        let mut cfg = ProtocolConfig {
            n,
            f_in: 1,
            f_out: 1,
            sampling: SamplingMode::WithReplacement,
            protocol,
            round_budget: 0,
            switch_round: 0,
            seed: 0,
            origin: 0,
            initial_informed: 1,
            payload_bits: DEFAULT_PAYLOAD_BITS,
        };
        cfg.round_budget = cfg.default_round_budget();
        cfg
    }

    pub fn with_fanouts(mut self, f_in: usize, f_out: usize) -> Self {
        self.f_in = f_in;
        self.f_out = f_out;
        self.round_budget = self.default_round_budget();
        self
    }

    pub fn with_sampling(mut self, sampling: SamplingMode) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sets the push-phase length and refreshes the default budget so the
    /// pull phase keeps its full allowance.
    pub fn with_switch_round(mut self, switch_round: Round) -> Self {
        self.switch_round = switch_round;
        self.round_budget = self.default_round_budget();
        self
    }

    pub fn with_round_budget(mut self, round_budget: Round) -> Self {
        self.round_budget = round_budget;
        self
    }

    /// Round budget guarding until-complete runs against non-termination.
    ///
    /// Pull: `ceil(8 log_{f_in+1} n) + 20`. Push and polite use the same
    /// multiple of their own round prediction; push-then-pull adds the pull
    /// allowance on top of the push phase.
    pub fn default_round_budget(&self) -> Round {
        let n = self.n.max(2) as f64;
        let pull = (8.0 * n.ln() / ((self.f_in + 1) as f64).ln()).ceil() + 20.0;
        let budget = match self.protocol {
            Protocol::RegularPull => pull,
            Protocol::RegularPush => {
                let f = self.f_out as f64;
                (8.0 * (n.ln() / (f + 1.0).ln() + n.ln() / f)).ceil() + 20.0
            }
            Protocol::RegularPushThenPull => self.switch_round as f64 + pull,
            Protocol::PolitePushPull => (8.0 * n.log2()).ceil() + 20.0,
        };
        budget as Round
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return config(format!("n must be at least 2, got {}", self.n));
        }
        if self.f_in < 1 || self.f_out < 1 {
            return config("fanouts must be at least 1");
        }
        if self.sampling == SamplingMode::WithoutReplacement
            && (self.f_in > self.n - 1 || self.f_out > self.n - 1)
        {
            return config(format!(
                "without-replacement sampling needs fanouts <= n-1 = {}",
                self.n - 1
            ));
        }
        if self.switch_round > self.round_budget {
            return config(format!(
                "switch_round {} exceeds round_budget {}",
                self.switch_round, self.round_budget
            ));
        }
        if self.origin >= self.n {
            return config(format!("origin {} out of range for n = {}", self.origin, self.n));
        }
        if self.initial_informed < 1 || self.initial_informed > self.n {
            return config(format!(
                "initial_informed must lie in [1, n], got {}",
                self.initial_informed
            ));
        }
        Ok(())
    }
}

/// Identity of a rumor: the process that created it and the creation round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RumorId {
    pub origin: ProcessId,
    pub creation_round: Round,
}

impl fmt::Display for RumorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.origin, self.creation_round)
    }
}

/// The informed/failed status of every process at the start of `round`.
///
/// This is the only mutable state of a single-rumor trial. Flags only ever
/// move from `false` to `true`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    round: Round,
    informed: Vec<bool>,
    failed: Vec<bool>,
    informed_count: usize,
}

impl NetworkState {
    /// A state where exactly `ids` are informed. Used for presets and tests
    /// that start from an arbitrary population; duplicates are ignored.
    pub fn with_informed(n: usize, ids: impl IntoIterator<Item = ProcessId>) -> Result<Self> {
        let mut state = NetworkState {
            round: 0,
            informed: vec![false; n],
            failed: vec![false; n],
            informed_count: 0,
        };
        for id in ids {
            if id >= n {
                return config(format!("process {id} out of range for n = {n}"));
            }
            state.inform(id);
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.informed.len()
    }

    pub fn round(&self) -> Round {
        self.round
    }

    pub fn is_informed(&self, p: ProcessId) -> bool {
        self.informed[p]
    }

    pub fn is_failed(&self, p: ProcessId) -> bool {
        self.failed[p]
    }

    pub fn informed_count(&self) -> usize {
        self.informed_count
    }

    pub fn uninformed_count(&self) -> usize {
        self.n() - self.informed_count
    }

    pub fn informed(&self) -> &[bool] {
        &self.informed
    }

    pub fn failed(&self) -> &[bool] {
        &self.failed
    }

    pub fn failed_count(&self) -> usize {
        self.failed.iter().filter(|&&f| f).count()
    }

    /// Marks `p` informed; returns whether it was newly informed.
    pub(crate) fn inform(&mut self, p: ProcessId) -> bool {
        if self.informed[p] {
            return false;
        }
        self.informed[p] = true;
        self.informed_count += 1;
        true
    }

    /// Marks `p` informed unless it has failed; returns whether it was newly
    /// informed. Branch-free, for hot loops over random targets.
    #[inline]
    pub(crate) fn inform_live(&mut self, p: ProcessId) -> bool {
        let fresh = !self.informed[p] & !self.failed[p];
        self.informed[p] |= fresh;
        self.informed_count += fresh as usize;
        fresh
    }

    pub(crate) fn fail(&mut self, p: ProcessId) {
        self.failed[p] = true;
    }

    pub(crate) fn advance_round(&mut self) {
        self.round += 1;
    }
}

/// Round-0 state with only `origin` informed.
pub fn init_state(n: usize, origin: ProcessId) -> Result<NetworkState> {
    init_state_with(n, origin, 1)
}

/// Round-0 state with `count` informed processes: the origin plus the lowest
/// other ids.
pub fn init_state_with(n: usize, origin: ProcessId, count: usize) -> Result<NetworkState> {
    if origin >= n {
        return config(format!("origin {origin} out of range for n = {n}"));
    }
    if count < 1 || count > n {
        return config(format!("initial informed count must lie in [1, {n}], got {count}"));
    }
    let others = (0..n).filter(|&p| p != origin).take(count - 1);
    NetworkState::with_informed(n, std::iter::once(origin).chain(others))
}

/// Draws `f` peers for `self_id`, checking the fanout against the mode.
pub fn sample_peers<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    f: usize,
    mode: SamplingMode,
    self_id: ProcessId,
) -> Result<Vec<ProcessId>> {
    if f < 1 {
        return config("fanout must be at least 1");
    }
    if self_id >= n {
        return config(format!("process {self_id} out of range for n = {n}"));
    }
    if mode == SamplingMode::WithoutReplacement && f > n.saturating_sub(1) {
        return config(format!(
            "fanout {f} exceeds n-1 = {} for without-replacement sampling",
            n.saturating_sub(1)
        ));
    }
    let mut out = Vec::with_capacity(f);
    sample_peers_into(rng, n, f, mode, self_id, &mut out);
    Ok(out)
}

/// Unchecked variant of [`sample_peers`] that reuses `out`.
pub fn sample_peers_into<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    f: usize,
    mode: SamplingMode,
    self_id: ProcessId,
    out: &mut Vec<ProcessId>,
) {
    out.clear();
    match mode {
        SamplingMode::WithReplacement => {
            if let Ok(m) = u32::try_from(n) {
                out.extend((0..f).map(|_| rng.gen_range(0..m) as usize));
            } else {
                out.extend((0..f).map(|_| rng.gen_range(0..n)));
            }
        }
        SamplingMode::WithoutReplacement => {
            debug_assert!(f < n);
            let skip_self = |i: usize| if i >= self_id { i + 1 } else { i };
            // Uniformly ordered prefix, by rejection.
            while out.len() < f {
                let q = skip_self(rng.gen_range(0..n - 1));
                if !out.contains(&q) {
                    out.push(q);
                }
            }
        }
    }
}

/// Source of every random decision a round engine makes.
///
/// Blanket-implemented for all [`Rng`]s. Tests substitute scripted sources to
/// enumerate every sampling outcome of a round.
pub trait Randomness {
    fn peers(&mut self, n: usize, f: usize, mode: SamplingMode, self_id: ProcessId, out: &mut Vec<ProcessId>);
    fn call_succeeds(&mut self, delta: f64) -> bool;
    fn message_delivered(&mut self, gamma: f64) -> bool;
}

impl<R: Rng + ?Sized> Randomness for R {
    #[inline]
    fn peers(&mut self, n: usize, f: usize, mode: SamplingMode, self_id: ProcessId, out: &mut Vec<ProcessId>) {
        sample_peers_into(self, n, f, mode, self_id, out)
    }

    #[inline]
    fn call_succeeds(&mut self, delta: f64) -> bool {
        failures::call_succeeds(self, delta)
    }

    #[inline]
    fn message_delivered(&mut self, gamma: f64) -> bool {
        failures::message_delivered(self, gamma)
    }
}

/// SplitMix64 finalizer, used to spread trial indices over the seed space.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`: `master ^ mix(index)`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    master ^ mix64(index)
}

/// Per-trial randomness. Every round gets its own ChaCha stream keyed by the
/// trial seed, so rounds are independent and individually replayable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRng {
    seed: u64,
}

const SETUP_STREAM: u64 = u64::MAX;

impl TrialRng {
    pub fn new(seed: u64) -> Self {
        TrialRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn round_stream(&self, round: Round) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(round as u64);
        rng
    }

    /// Stream reserved for pre-execution draws such as adversary choices.
    pub fn setup_stream(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(SETUP_STREAM);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn forced_choice_for_two_processes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let peers = sample_peers(&mut rng, 2, 1, SamplingMode::WithoutReplacement, 0).unwrap();
            assert_eq!(peers, vec![1]);
        }
    }

    #[test]
    fn with_replacement_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut saw_dup_or_self = false;
        for _ in 0..10_000 {
            let peers = sample_peers(&mut rng, 1000, 3, SamplingMode::WithReplacement, 5).unwrap();
            assert_eq!(peers.len(), 3);
            assert!(peers.iter().all(|&p| p < 1000));
            saw_dup_or_self |= peers.contains(&5) || peers[0] == peers[1] || peers[1] == peers[2];
        }
        assert!(saw_dup_or_self);
    }

    #[test]
    fn without_replacement_is_uniform_over_others() {
        // n=5, f=4, self=2: each of the four other peers must appear in every
        // sample, and each position of the prefix is uniform over {0,1,3,4}.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let mut first = [0u64; 5];
        for _ in 0..draws {
            let peers = sample_peers(&mut rng, 5, 4, SamplingMode::WithoutReplacement, 2).unwrap();
            let mut sorted = peers.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![0, 1, 3, 4]);
            first[peers[0]] += 1;
        }
        assert_eq!(first[2], 0);
        let p = 0.25;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let mut chi2 = 0.0;
        for &id in &[0usize, 1, 3, 4] {
            let freq = first[id] as f64 / draws as f64;
            assert!((freq - p).abs() <= 3.0 * se, "peer {id}: {freq}");
            let expected = p * draws as f64;
            chi2 += (first[id] as f64 - expected).powi(2) / expected;
        }
        // 3 degrees of freedom, 99.9th percentile.
        assert!(chi2 < 16.27, "chi-square {chi2}");
    }

    #[test]
    fn with_replacement_hits_self_at_rate_f_over_n() {
        let (n, f, draws) = (10usize, 2usize, 200_000u64);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut hits = 0u64;
        for _ in 0..draws {
            let peers = sample_peers(&mut rng, n, f, SamplingMode::WithReplacement, 4).unwrap();
            hits += peers.iter().filter(|&&p| p == 4).count() as u64;
        }
        // Each sample contains Binomial(f, 1/n) copies of self.
        let mean = hits as f64 / draws as f64;
        let expected = f as f64 / n as f64;
        let se = (f as f64 * (1.0 / n as f64) * (1.0 - 1.0 / n as f64) / draws as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn fanout_out_of_range_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_peers(&mut rng, 4, 4, SamplingMode::WithoutReplacement, 0),
            Err(Error::Config(_))
        ));
        assert!(sample_peers(&mut rng, 4, 0, SamplingMode::WithReplacement, 0).is_err());
        assert!(sample_peers(&mut rng, 4, 9, SamplingMode::WithReplacement, 0).is_ok());
    }

    #[test]
    fn init_state_examples() {
        let s = init_state(2, 0).unwrap();
        assert!(s.is_informed(0) && !s.is_informed(1));
        assert_eq!(s.uninformed_count(), 1);

        let s = init_state(10_000, 7).unwrap();
        assert_eq!((s.informed_count(), s.uninformed_count()), (1, 9999));
        assert!(s.is_informed(7));
        assert_eq!(s.round(), 0);
        assert_eq!(s.failed_count(), 0);

        assert!(init_state(5, 5).is_err());
    }

    #[test]
    fn init_state_with_many_includes_origin() {
        let s = init_state_with(10, 4, 3).unwrap();
        assert_eq!(s.informed_count(), 3);
        assert!(s.is_informed(4) && s.is_informed(0) && s.is_informed(1));
        assert!(init_state_with(10, 0, 11).is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = ProtocolConfig::new(Protocol::RegularPull, 1000);
        assert_eq!(cfg.round_budget, 100); // ceil(8 * log2 1000) + 20
        cfg.validate().unwrap();
        assert!(ProtocolConfig::new(Protocol::RegularPull, 1).validate().is_err());
        let wor = ProtocolConfig::new(Protocol::RegularPull, 3)
            .with_fanouts(3, 1)
            .with_sampling(SamplingMode::WithoutReplacement);
        assert!(wor.validate().is_err());
        let bad_switch = ProtocolConfig::new(Protocol::RegularPushThenPull, 100)
            .with_switch_round(5)
            .with_round_budget(4);
        assert!(bad_switch.validate().is_err());
    }

    #[test]
    fn names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.as_str().parse::<Protocol>().unwrap(), p);
        }
        assert!("push-pull".parse::<Protocol>().is_err());
        assert_eq!(
            "without-replacement".parse::<SamplingMode>().unwrap(),
            SamplingMode::WithoutReplacement
        );
    }

    #[test]
    fn round_streams_are_reproducible_and_distinct() {
        let rng = TrialRng::new(42);
        let a: Vec<u64> = (0..4).map(|_| rng.round_stream(3).gen()).collect();
        let mut s = rng.round_stream(3);
        let b: Vec<u64> = (0..4).map(|_| s.gen()).collect();
        assert_eq!(a[0], b[0]);
        let mut other = rng.round_stream(4);
        assert_ne!(b[0], other.gen::<u64>());
    }

    proptest! {
        #[test]
        fn without_replacement_never_contains_self_or_duplicates(
            n in 2usize..60, seed in any::<u64>(), self_frac in 0.0f64..1.0, f_frac in 0.0f64..1.0,
        ) {
            let self_id = ((n as f64 * self_frac) as usize).min(n - 1);
            let f = 1 + ((n - 2) as f64 * f_frac) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let peers = sample_peers(&mut rng, n, f, SamplingMode::WithoutReplacement, self_id).unwrap();
            prop_assert_eq!(peers.len(), f);
            prop_assert!(!peers.contains(&self_id));
            let mut sorted = peers.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), f);
            prop_assert!(peers.iter().all(|&p| p < n));
        }
    }
}
