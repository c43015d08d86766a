//! Closed-form one-round expectations, the pull-versus-push and growth-cap
//! inequality checks, and round/message predictions.
//!
//! Everything is evaluated in `f64` without intermediate rounding; these are
//! expectations, not counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Protocol;

/// `x (x-1) ... (x-k+1)`; the empty product is 1.
pub fn falling_factorial(x: f64, k: u32) -> f64 {
    (0..k).map(|i| x - i as f64).product()
}

/// Expected uninformed count after one regular-pull round when requests are
/// independent uniform draws: `u (u/n)^f_in`.
pub fn expected_uninformed_pull_wr(u: usize, n: usize, f_in: usize) -> f64 {
    let u = u as f64;
    u * (u / n as f64).powi(f_in as i32)
}

/// Exact expectation when each requester draws `f_in` distinct peers among
/// the other `n - 1`: it stays uninformed iff all of them come from the other
/// `u - 1` uninformed processes, giving `u (u-1)_f / (n-1)_f`.
pub fn expected_uninformed_pull_wor(u: usize, n: usize, f_in: usize) -> Result<f64> {
    check_wor_domain(u, n, f_in)?;
    if u == 0 {
        return Ok(0.0);
    }
    let k = f_in as u32;
    Ok(u as f64 * falling_factorial(u as f64 - 1.0, k) / falling_factorial(n as f64 - 1.0, k))
}

/// The binomial-coefficient form `u C(u, f) / C(n-1, f)`, kept for comparison
/// with [`expected_uninformed_pull_wor`]. It counts the requester among its own
/// candidate peers and therefore exceeds the exact value whenever `0 < u`.
pub fn expected_uninformed_pull_wor_binomial(u: usize, n: usize, f_in: usize) -> Result<f64> {
    check_wor_domain(u, n, f_in)?;
    let k = f_in as u32;
    Ok(u as f64 * falling_factorial(u as f64, k) / falling_factorial(n as f64 - 1.0, k))
}

fn check_wor_domain(u: usize, n: usize, f_in: usize) -> Result<()> {
    if n < 2 || u > n {
        return Err(Error::Domain(format!("need 0 <= u <= n and n >= 2, got u = {u}, n = {n}")));
    }
    if f_in < 1 || f_in > n - 1 {
        return Err(Error::Domain(format!("f_in = {f_in} outside [1, n-1 = {}]", n - 1)));
    }
    Ok(())
}

/// Expected uninformed count after one regular-push round:
/// `u (1 - 1/n)^(f_out (n - u))`.
pub fn expected_uninformed_push(u: usize, n: usize, f_out: usize) -> f64 {
    let exponent = (f_out * (n - u)) as f64;
    u as f64 * (1.0 - 1.0 / n as f64).powf(exponent)
}

/// Expected informed count after one without-replacement pull round from `i`
/// informed processes.
pub fn expected_informed_after_pull_wor(i: usize, n: usize, f_in: usize) -> Result<f64> {
    if i > n {
        return Err(Error::Domain(format!("i = {i} exceeds n = {n}")));
    }
    Ok(n as f64 - expected_uninformed_pull_wor(n - i, n, f_in)?)
}

/// Cap on the expected informed count after one pull round: `i (f_in + 1)`.
pub fn informed_growth_bound(i: usize, f_in: usize) -> f64 {
    (i * (f_in + 1)) as f64
}

/// Relative slack absorbing floating-point rounding in the inequality checks.
pub const CHECK_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    /// First `u` (or `i`) where the inequality fails, with both sides.
    Violation { at: usize, lhs: f64, rhs: f64 },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

fn first_violation(range: impl Iterator<Item = usize>, sides: impl Fn(usize) -> (f64, f64)) -> Verdict {
    for x in range {
        let (lhs, rhs) = sides(x);
        if lhs > rhs + CHECK_RTOL * rhs.abs().max(1.0) {
            return Verdict::Violation { at: x, lhs, rhs };
        }
    }
    Verdict::Pass
}

/// Checks `E_pull[u'] <= E_push[u']` for every `u` in `0..=n` with equal
/// fanouts, using the with-replacement forms.
pub fn check_pull_le_push(n: usize, f: usize) -> Verdict {
    first_violation(0..=n, |u| {
        (expected_uninformed_pull_wr(u, n, f), expected_uninformed_push(u, n, f))
    })
}

/// Checks that the exact one-round expected informed count never exceeds
/// `i (f_in + 1)`, for every `i` in `0..=n`.
pub fn check_growth_bound(n: usize, f_in: usize) -> Result<Verdict> {
    check_wor_domain(0, n, f_in)?;
    Ok(first_violation(0..=n, |i| {
        let informed = expected_informed_after_pull_wor(i, n, f_in).expect("domain checked");
        (informed, informed_growth_bound(i, f_in))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    ExpectedUninformed,
    Rounds,
    Messages,
}

/// Regime a prediction is made for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Protocol(Protocol),
    /// Regular pull starting from `n / ln n` informed processes.
    Endgame,
}

/// An asymptotic prediction: `value` is the base term, and the band
/// `[low * value, high * value]` is where measurements are expected to land.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub quantity: Quantity,
    pub value: f64,
    pub low: f64,
    pub high: f64,
    pub validity: String,
}

impl Prediction {
    pub fn band(&self) -> (f64, f64) {
        (self.low * self.value, self.high * self.value)
    }
}

pub const DEFAULT_BAND: (f64, f64) = (1.0, 8.0);

fn log_base(x: f64, base: f64) -> f64 {
    x.ln() / base.ln()
}

pub fn predicted_rounds(regime: Regime, n: usize, f_in: usize, f_out: usize) -> Result<Prediction> {
    predicted_rounds_with_band(regime, n, f_in, f_out, DEFAULT_BAND)
}

pub fn predicted_rounds_with_band(
    regime: Regime,
    n: usize,
    f_in: usize,
    f_out: usize,
    (low, high): (f64, f64),
) -> Result<Prediction> {
    if n < 2 || f_in < 1 || f_out < 1 {
        return Err(Error::Domain(format!("need n >= 2 and fanouts >= 1, got n = {n}")));
    }
    let nf = n as f64;
    let (value, validity) = match regime {
        Regime::Protocol(Protocol::RegularPull) | Regime::Protocol(Protocol::RegularPushThenPull) => {
            (log_base(nf, (f_in + 1) as f64), "order log_{f_in+1} n; push-then-pull shares the pull order")
        }
        Regime::Protocol(Protocol::RegularPush) => (
            log_base(nf, (f_out + 1) as f64) + nf.ln() / f_out as f64,
            "log_{f_out+1} n + ln(n)/f_out, up to an additive constant",
        ),
        Regime::Protocol(Protocol::PolitePushPull) => {
            (log_base(nf, 3.0) + nf.ln().max(1.0).ln(), "log_3 n + ln ln n for one call per process")
        }
        Regime::Endgame => {
            if n < 3 {
                return Err(Error::Domain("endgame needs ln n > 1, i.e. n >= 3".into()));
            }
            (log_base(nf.ln(), (f_in + 1) as f64), "log_{f_in+1} ln n from n/ln n informed")
        }
    };
    Ok(Prediction {
        quantity: Quantity::Rounds,
        value,
        low,
        high,
        validity: validity.to_string(),
    })
}

/// Message-count prediction for a run to completion without failures.
pub fn predicted_messages(protocol: Protocol, n: usize, f_in: usize, f_out: usize) -> Result<Prediction> {
    if n < 3 || f_in < 1 || f_out < 1 {
        return Err(Error::Domain(format!("need n >= 3 and fanouts >= 1, got n = {n}")));
    }
    let nf = n as f64;
    let (value, low, high, validity) = match protocol {
        Protocol::RegularPull => (
            nf - 1.0,
            1.0,
            f_in as f64,
            "exactly n-1 at f_in = 1; at most f_in (n-1)",
        ),
        Protocol::RegularPush => (nf * nf.ln(), 0.2, 3.0, "order n ln n"),
        Protocol::RegularPushThenPull => (
            nf - 1.0 + nf / (nf.ln() * nf.ln()),
            1.0,
            1.2,
            "n - 1 plus O(n / (ln n)^2) overhead with the overhead-bounded switch point",
        ),
        Protocol::PolitePushPull => (nf * nf.ln().ln(), DEFAULT_BAND.0, f64::INFINITY, "at least order n ln ln n"),
    };
    Ok(Prediction {
        quantity: Quantity::Messages,
        value,
        low,
        high,
        validity: validity.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force without-replacement expectation: enumerate every ordered
    /// choice of `f` distinct peers among the others for every uninformed
    /// process (processes `0..u` uninformed).
    fn enumerate_wor(u: usize, n: usize, f: usize) -> f64 {
        fn ordered(pool: &[usize], f: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if prefix.len() == f {
                out.push(prefix.clone());
                return;
            }
            for &p in pool {
                if !prefix.contains(&p) {
                    prefix.push(p);
                    ordered(pool, f, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut stay = 0.0;
        for requester in 0..u {
            let pool: Vec<usize> = (0..n).filter(|&p| p != requester).collect();
            let mut choices = Vec::new();
            ordered(&pool, f, &mut Vec::new(), &mut choices);
            let misses = choices.iter().filter(|c| c.iter().all(|&p| p < u)).count();
            stay += misses as f64 / choices.len() as f64;
        }
        stay
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5.0, 0), 1.0);
        assert_eq!(falling_factorial(5.0, 2), 20.0);
        assert_eq!(falling_factorial(3.0, 5), 0.0);
        assert_eq!(falling_factorial(0.0, 1), 0.0);
    }

    #[test]
    fn pull_wr_examples() {
        assert_eq!(expected_uninformed_pull_wr(0, 100, 1), 0.0);
        assert_eq!(expected_uninformed_pull_wr(100, 100, 3), 100.0);
        assert_eq!(expected_uninformed_pull_wr(50, 100, 1), 25.0);
        assert_eq!(expected_uninformed_pull_wr(50, 100, 2), 12.5);
    }

    #[test]
    fn pull_wor_examples() {
        assert_eq!(expected_uninformed_pull_wor(10, 10, 3).unwrap(), 10.0);
        assert_eq!(expected_uninformed_pull_wor(1, 5, 1).unwrap(), 0.0);
        let v = expected_uninformed_pull_wor(2, 4, 1).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(expected_uninformed_pull_wor(2, 4, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn pull_wor_matches_enumeration() {
        for n in 2..=6 {
            for f in 1..n {
                for u in 0..=n {
                    let exact = expected_uninformed_pull_wor(u, n, f).unwrap();
                    let brute = enumerate_wor(u, n, f);
                    assert!((exact - brute).abs() < 1e-12, "n={n} f={f} u={u}: {exact} vs {brute}");
                }
            }
        }
    }

    #[test]
    fn binomial_form_disagrees_with_exact() {
        let exact = expected_uninformed_pull_wor(2, 4, 1).unwrap();
        let binomial = expected_uninformed_pull_wor_binomial(2, 4, 1).unwrap();
        assert!((binomial - 4.0 / 3.0).abs() < 1e-15);
        assert!(binomial > exact);
    }

    #[test]
    fn push_examples() {
        assert_eq!(expected_uninformed_push(100, 100, 2), 100.0);
        assert!((expected_uninformed_push(99, 100, 1) - 98.01).abs() < 1e-12);
        assert!((expected_uninformed_push(50, 100, 1) - 50.0 * 0.99f64.powi(50)).abs() < 1e-12);
        assert!((expected_uninformed_push(50, 100, 1) - 30.25).abs() < 0.01);
    }

    #[test]
    fn pull_le_push_everywhere_small() {
        assert!(check_pull_le_push(100, 1).passed());
        for n in 2..=200 {
            for f in 1..=5 {
                assert_eq!(check_pull_le_push(n, f), Verdict::Pass, "n={n} f={f}");
            }
        }
    }

    #[test]
    fn equality_one_below_n() {
        for n in 2..=200 {
            let pull = expected_uninformed_pull_wr(n - 1, n, 1);
            let push = expected_uninformed_push(n - 1, n, 1);
            assert!((pull - push).abs() <= 1e-12 * push, "n={n}");
        }
    }

    #[test]
    fn growth_bound_examples() {
        assert_eq!(informed_growth_bound(0, 3), 0.0);
        assert_eq!(informed_growth_bound(10, 1), 20.0);
        assert!(expected_informed_after_pull_wor(10, 100, 1).unwrap() <= 20.0);
        for n in 2..=200 {
            for f in 1..=5.min(n - 1) {
                assert_eq!(check_growth_bound(n, f).unwrap(), Verdict::Pass, "n={n} f={f}");
            }
        }
    }

    #[test]
    fn violations_are_reported() {
        // Swapped sides: push <= pull fails strictly inside (0, n-1).
        let v = first_violation(0..=10, |u| (expected_uninformed_push(u, 10, 1), expected_uninformed_pull_wr(u, 10, 1)));
        assert!(matches!(v, Verdict::Violation { at, .. } if at > 0 && at < 9));
    }

    #[test]
    fn round_predictions() {
        let push = predicted_rounds(Regime::Protocol(Protocol::RegularPush), 1024, 1, 1).unwrap();
        assert!((push.value - (10.0 + 1024f64.ln())).abs() < 1e-12);
        assert!((push.value - 16.93).abs() < 0.01);
        let pull = predicted_rounds(Regime::Protocol(Protocol::RegularPull), 1024, 1, 1).unwrap();
        assert!((pull.value - 10.0).abs() < 1e-12);
        assert_eq!(pull.band(), (pull.value, 8.0 * pull.value));
        let saturated = predicted_rounds(Regime::Protocol(Protocol::RegularPull), 1024, 1023, 1).unwrap();
        assert!((saturated.value - 1.0).abs() < 1e-12);
        let endgame = predicted_rounds(Regime::Endgame, 1 << 16, 1, 1).unwrap();
        assert!((endgame.value - (65536f64).ln().log2()).abs() < 1e-12);
        assert!(predicted_rounds(Regime::Protocol(Protocol::RegularPull), 1, 1, 1).is_err());
    }

    #[test]
    fn message_predictions() {
        let pull = predicted_messages(Protocol::RegularPull, 1000, 1, 1).unwrap();
        assert_eq!(pull.band(), (999.0, 999.0));
        let push = predicted_messages(Protocol::RegularPush, 1000, 1, 1).unwrap();
        assert!((push.value - 1000.0 * 1000f64.ln()).abs() < 1e-9);
    }
}
