//! Rumor dissemination in the generalized random phone call model.
//!
//! The crate simulates regular pull, regular push, regular push-then-pull and
//! the polite push-pull baseline in synchronous rounds over a complete
//! network, injects crash, call and message failures, accounts messages and
//! bits, and checks the simulator against closed-form expectations.
//!
//! ```
//! use phonecall::{run_trial, FailurePlan, Protocol, ProtocolConfig, StopRule};
//!
//! let cfg = ProtocolConfig::new(Protocol::RegularPull, 1000);
//! let report = run_trial(&cfg, &FailurePlan::none(), StopRule::UntilComplete, 7).unwrap();
//! assert!(report.completed);
//! assert_eq!(report.rumor_messages, 999);
//! ```

pub mod analytics;
pub mod error;
pub mod failures;
pub mod harness;
pub mod metrics;
pub mod multirumor;
pub mod network;
pub mod parallel;
pub mod protocols;

pub use error::{Error, Result};
pub use failures::{make_adversarial_plan, AdversaryMode, FailurePlan};
pub use metrics::{aggregate, overhead, AggregateReport, TrialReport};
pub use network::{
    init_state, sample_peers, trial_seed, NetworkState, ProcessId, Protocol, ProtocolConfig, Round, RumorId,
    SamplingMode, TrialRng,
};
pub use protocols::{
    polite_pushpull_round, pull_round, push_round, run_trial, switch_round_for_overhead, RoundOutcome, StopRule,
};
