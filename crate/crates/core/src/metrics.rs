//! Per-trial reports and their aggregation.
//!
//! Only rumor-bearing payloads are charged: establishing a call is free.
//! Aggregates are computed from integer sums and sorted copies so the result
//! does not depend on the order reports arrive in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Round;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialReport {
    /// Every good process ended informed.
    pub completed: bool,
    pub rounds: Round,
    pub rumor_messages: u64,
    pub rumor_bits: u64,
    /// Pull-request payload bits; non-zero only for multi-rumor runs.
    pub control_bits: u64,
    pub requests_sent: u64,
    /// Uninformed count at the start of every round, plus the final count.
    pub trajectory: Vec<u64>,
    pub seed: u64,
}

impl TrialReport {
    pub fn total_bits(&self) -> u64 {
        self.rumor_bits + self.control_bits
    }
}

/// Redundant rumor transmissions of a completed trial: `messages - (n - 1)`.
pub fn overhead(report: &TrialReport, n: usize) -> Result<i64> {
    if !report.completed {
        return Err(Error::Usage("overhead is only defined for completed trials".into()));
    }
    Ok(report.rumor_messages as i64 - (n as i64 - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub mean: f64,
    pub median: u64,
    pub p99: u64,
    pub max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageStats {
    pub mean: f64,
    pub median: u64,
    pub max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub round: Round,
    pub u_mean: f64,
    pub u_p10: u64,
    pub u_p90: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub trials: usize,
    pub success_rate: f64,
    pub rounds: RoundStats,
    pub rumor_messages: MessageStats,
    /// Mean of rumor plus control bits.
    pub bits_mean: f64,
    /// Per-round uninformed counts. Trials that stopped early contribute their
    /// final count to later rounds.
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Nearest-rank percentile of a sorted, non-empty slice.
pub fn nearest_rank(sorted: &[u64], pct: f64) -> u64 {
    let rank = (pct / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Lower-middle element for even lengths.
pub fn median(sorted: &[u64]) -> u64 {
    sorted[(sorted.len() - 1) / 2]
}

fn mean(values: &[u64]) -> f64 {
    values.iter().map(|&v| v as u128).sum::<u128>() as f64 / values.len() as f64
}

fn sorted(values: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut v: Vec<u64> = values.collect();
    v.sort_unstable();
    v
}

pub fn aggregate(reports: &[TrialReport]) -> Result<AggregateReport> {
    if reports.is_empty() {
        return Err(Error::Usage("cannot aggregate an empty set of trials".into()));
    }
    let trials = reports.len();
    let completed = reports.iter().filter(|r| r.completed).count();

    let rounds = sorted(reports.iter().map(|r| r.rounds as u64));
    let msgs = sorted(reports.iter().map(|r| r.rumor_messages));
    let bits: Vec<u64> = reports.iter().map(TrialReport::total_bits).collect();

    let len = reports.iter().map(|r| r.trajectory.len()).max().unwrap_or(0);
    let trajectory = (0..len)
        .map(|i| {
            let column = sorted(reports.iter().filter_map(|r| r.trajectory.get(i).or(r.trajectory.last()).copied()));
            TrajectoryPoint {
                round: i as Round,
                u_mean: mean(&column),
                u_p10: nearest_rank(&column, 10.0),
                u_p90: nearest_rank(&column, 90.0),
            }
        })
        .collect();

    Ok(AggregateReport {
        trials,
        success_rate: completed as f64 / trials as f64,
        rounds: RoundStats {
            mean: mean(&rounds),
            median: median(&rounds),
            p99: nearest_rank(&rounds, 99.0),
            max: *rounds.last().unwrap(),
        },
        rumor_messages: MessageStats {
            mean: mean(&msgs),
            median: median(&msgs),
            max: *msgs.last().unwrap(),
        },
        bits_mean: mean(&bits),
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn report(rounds: Round, msgs: u64, completed: bool) -> TrialReport {
        TrialReport {
            completed,
            rounds,
            rumor_messages: msgs,
            rumor_bits: msgs * 8,
            control_bits: 0,
            requests_sent: 0,
            trajectory: (0..=rounds as u64).rev().collect(),
            seed: 0,
        }
    }

    #[test]
    fn median_of_three() {
        let agg = aggregate(&[report(3, 1, true), report(5, 2, true), report(7, 3, true)]).unwrap();
        assert_eq!(agg.rounds.median, 5);
        assert_eq!(agg.rounds.max, 7);
        assert_eq!(agg.rounds.p99, 7);
        assert_eq!(agg.success_rate, 1.0);
        assert_eq!(agg.rounds.mean, 5.0);
        assert_eq!(agg.bits_mean, 16.0);
    }

    #[test]
    fn even_median_is_lower_middle() {
        assert_eq!(median(&[1, 2, 3, 4]), 2);
        assert_eq!(nearest_rank(&[1, 2, 3, 4], 50.0), 2);
        assert_eq!(nearest_rank(&[10], 1.0), 10);
        assert_eq!(nearest_rank(&(1..=100).collect::<Vec<_>>(), 99.0), 99);
    }

    #[test]
    fn empty_input_is_a_usage_error() {
        assert!(matches!(aggregate(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn success_rate_counts_completed() {
        let agg = aggregate(&[report(2, 1, true), report(2, 1, false)]).unwrap();
        assert_eq!(agg.success_rate, 0.5);
    }

    #[test]
    fn short_trajectories_are_carried_forward() {
        let agg = aggregate(&[report(1, 1, true), report(3, 3, true)]).unwrap();
        assert_eq!(agg.trajectory.len(), 4);
        // Round 2: the finished trial is carried at 0, the other is at 1.
        assert_eq!(agg.trajectory[2].u_mean, 0.5);
        assert_eq!(agg.trajectory[0].u_mean, 2.0);
    }

    #[test]
    fn overhead_needs_completion() {
        assert_eq!(overhead(&report(3, 9, true), 10).unwrap(), 0);
        assert_eq!(overhead(&report(3, 15, true), 10).unwrap(), 6);
        assert!(overhead(&report(3, 15, false), 10).is_err());
    }

    proptest! {
        #[test]
        fn aggregation_ignores_order(
            data in prop::collection::vec((0u32..40, 0u64..1000, any::<bool>()), 1..30),
            seed in any::<u64>(),
        ) {
            let reports: Vec<TrialReport> = data.iter().map(|&(r, m, c)| report(r, m, c)).collect();
            let mut shuffled = reports.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(aggregate(&reports).unwrap(), aggregate(&shuffled).unwrap());
        }
    }
}
