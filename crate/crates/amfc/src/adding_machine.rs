//! The base-d stochastic adding machine on the nonnegative integers.
//!
//! From state `n` the machine tries to add 1 in base `d` with unreliable
//! carries: digit positions `j = 1, 2, ...` fire independent Bernoulli
//! trials with success probability `p_j`. Exactly the first
//! `zeta(n) = min{ j : a_j(n) != d-1 }` positions are involved in adding 1
//! to `n`; if every one of them succeeds the state becomes `n + 1`, and if
//! the cascade first fails at position `tau <= zeta(n)` the positions below
//! `tau` have already wrapped to 0, leaving
//!
//! ```text
//! n - (d^(tau-1) - 1)
//! ```
//!
//! (`tau = 1` leaves the state unchanged). Digits are little-endian:
//! `a_1` is the least significant.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::probability::ProbabilitySequence;

/// Little-endian base-`d` digits of `n`, without trailing zeros (`n = 0`
/// gives an empty expansion).
pub fn to_digits(n: u64, d: u32) -> Vec<u32> {
    assert!(d >= 2);
    let d = d as u64;
    let mut digits = Vec::new();
    let mut rest = n;
    while rest > 0 {
        digits.push((rest % d) as u32);
        rest /= d;
    }
    digits
}

/// Inverse of [`to_digits`]: `sum_j digits[j] * d^j`.
pub fn digits_value(digits: &[u32], d: u32) -> u64 {
    let d = d as u64;
    digits
        .iter()
        .rev()
        .fold(0u64, |acc, &a| acc * d + a as u64)
}

/// The digit `a_j(n)` at 1-based position `j` (0 past the expansion).
pub fn digit_at(n: u64, d: u32, j: usize) -> u32 {
    assert!(j >= 1, "digit positions are 1-based");
    let d = d as u64;
    let mut rest = n;
    for _ in 1..j {
        rest /= d;
    }
    (rest % d) as u32
}

/// The carry depth `zeta(n) = min{ j >= 1 : a_j(n) != d-1 }`.
///
/// Satisfies `zeta(n) <= floor(log_d n) + 1` and `zeta(d^j - 1) = j + 1`.
pub fn counter_zeta(n: u64, d: u32) -> usize {
    assert!(d >= 2);
    let d = d as u64;
    let mut rest = n;
    let mut j = 1usize;
    while rest % d == d - 1 {
        rest /= d;
        j += 1;
    }
    j
}

/// One-step transition law out of a state, with zero-probability outcomes
/// dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDistribution {
    pub from: u64,
    /// `(target, probability)` pairs: the stay outcome first, then the
    /// wrap-backs `n - (d^r - 1)` for `r = 1..zeta-1` in increasing `r`,
    /// then the successful increment `n + 1`.
    pub outcomes: Vec<(u64, f64)>,
}

impl StepDistribution {
    pub fn probability_of(&self, target: u64) -> f64 {
        self.outcomes
            .iter()
            .find(|(t, _)| *t == target)
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn total_mass(&self) -> f64 {
        self.outcomes.iter().map(|(_, p)| p).sum()
    }
}

/// Exact one-step distribution out of `n`:
///
/// ```text
/// P(n -> n)               = 1 - p_1
/// P(n -> n - (d^r - 1))   = p_1 ... p_r (1 - p_{r+1})   for 1 <= r <= zeta(n)-1
/// P(n -> n + 1)           = p_1 ... p_{zeta(n)}
/// ```
///
/// Probabilities are accumulated as left-to-right running products so that
/// independent recomputations of the same expression agree bit for bit.
pub fn step_distribution(n: u64, probs: &ProbabilitySequence) -> StepDistribution {
    let d = probs.d() as u64;
    let zeta = counter_zeta(n, probs.d());
    let mut outcomes = Vec::with_capacity(zeta + 1);
    let stay = 1.0 - probs.p(1);
    if stay > 0.0 {
        outcomes.push((n, stay));
    }
    let mut running = 1.0f64;
    for r in 1..zeta {
        running *= probs.p(r);
        let fail_next = running * (1.0 - probs.p(r + 1));
        if fail_next > 0.0 {
            let wrapped = n - (d.pow(r as u32) - 1);
            outcomes.push((wrapped, fail_next));
        }
    }
    running *= probs.p(zeta);
    let next = n.checked_add(1).expect("state overflow");
    outcomes.push((next, running));
    StepDistribution { from: n, outcomes }
}

/// Samples one transition by running the Bernoulli cascade directly.
pub fn amfc_step<R: Rng + ?Sized>(n: u64, probs: &ProbabilitySequence, rng: &mut R) -> u64 {
    let d = probs.d() as u64;
    let zeta = counter_zeta(n, probs.d());
    for j in 1..=zeta {
        // gen() < 1.0 always holds, so p_j = 1 can never fail here.
        if !(rng.gen::<f64>() < probs.p(j)) {
            return n - (d.pow((j - 1) as u32) - 1);
        }
    }
    n.checked_add(1).expect("state overflow")
}

/// Trajectory statistics from [`simulate`].
#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub start: u64,
    pub steps: u64,
    pub final_state: u64,
    /// occupancy counts over times `0..=steps`
    pub visits: BTreeMap<u64, u64>,
    /// visits to `start` at times `>= 1`
    pub returns_to_start: u64,
    /// first time `t` with `X_t = d^k`, keyed by the exponent `k`, for every
    /// power of `d` the trajectory reached
    pub first_hit_of_power: BTreeMap<u32, u64>,
    /// visits to `start` at times strictly before the first hit of `d^k`
    /// (time 0 counts as a visit)
    pub visits_to_start_before_power: BTreeMap<u32, u64>,
}

/// Exponent `k` if `n = d^k`, else `None`.
fn power_exponent(n: u64, d: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut k = 0u32;
    let mut rest = n;
    while rest % d == 0 {
        rest /= d;
        k += 1;
    }
    (rest == 1).then_some(k)
}

/// Runs the chain for a fixed number of steps with a seeded generator.
/// Identical seeds give identical summaries.
pub fn simulate(
    start: u64,
    steps: u64,
    probs: &ProbabilitySequence,
    seed: u64,
) -> SimulationSummary {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let d = probs.d() as u64;

    let mut visits = BTreeMap::new();
    let mut returns_to_start = 0u64;
    let mut first_hit_of_power = BTreeMap::new();
    let mut visits_to_start_before_power = BTreeMap::new();
    let mut start_visits = 0u64;

    let mut state = start;
    for t in 0..=steps {
        if t > 0 {
            state = amfc_step(state, probs, &mut rng);
        }
        if let Some(k) = power_exponent(state, d) {
            first_hit_of_power.entry(k).or_insert_with(|| {
                visits_to_start_before_power.insert(k, start_visits);
                t
            });
        }
        if state == start {
            start_visits += 1;
            if t > 0 {
                returns_to_start += 1;
            }
        }
        *visits.entry(state).or_insert(0) += 1;
    }

    SimulationSummary {
        start,
        steps,
        final_state: state,
        visits,
        returns_to_start,
        first_hit_of_power,
        visits_to_start_before_power,
    }
}
