//! Connectedness analysis, monic conjugation, Green function, and the
//! quasicircle criterion for the fibered filled-in sets.
//!
//! Conjugating the spectrum-side maps by the affine changes `h_j` produces
//! the monic-side cascade
//!
//! ```text
//! g_j(w) = (w^d - (1 - p_j)) / p_j,     g_{j+1} ∘ h_j = h_{j+1} ∘ f_j,
//! ```
//!
//! whose filled-in set `K` satisfies `E = h_1^{-1}(K)`. Each stage has
//! critical point 0, so the topology of `K` is governed by the orbits of
//! the critical values: the level-`k` critical orbit starts at the seed
//! `g_{k+1}(0) = 1 - 1/p_{k+1}` and then applies `g_{k+2}, g_{k+3}, ...`
//! Every escaping level multiplies the component count; the count for a
//! finite escape set `Esc` is
//!
//! ```text
//! N = 1 + (d - 1) * sum_{k in Esc} d^(k-1)
//! ```
//!
//! (each escaped level `k` contributes an unbranched degree-`d` cover on
//! `d^(k-1)` components; bounded levels glue at the critical point).
//!
//! Orbits are real and nonpositive, and for odd `d` the stage maps are
//! increasing, which pins the escape set to a prefix `{1..m}`: the level-k
//! orbit at stage `s+1` sits below the level-(k+1) orbit at stage `s`, so a
//! bounded level forces every higher level bounded.
//!
//! A further scaling conjugation `z -> λ(τ^n p̄) z` with
//! `λ(p̄) = prod_i (1/p_i)^(d^-i)` turns the cascade monic:
//! `P̂_n(z) = z^d + c(τ^(n-1) p̄)` with `c(p̄) = -((1 - p_1)/p_1) λ(τ p̄)`.
//! The escape-rate (Green) function of that sequence of monic maps detects
//! the filled-in set as its zero set, and a uniform bound
//! `sup_k |c(τ^k p̄)| < (1/2)^(d/(d-1))` forces every fiber Julia set to be
//! a quasicircle.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::probability::{IndicesBelow, ProbabilitySequence, TailRule};
use crate::spectrum::{pow_u, ESCAPE_TOLERANCE};

/// Monic-cascade escape radius for Green-function evaluation.
pub const BIG_RADIUS: f64 = 1e8;

/// Default truncation tolerance for the scaling products `λ`.
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-12;

/// Shifts examined explicitly by [`quasicircle_check`] before the analytic
/// tail bound takes over.
pub const QUASI_SHIFTS: usize = 64;

/// Levels examined by [`classify_connectedness`] when no analytic cutoff
/// bounds the scan.
const MAX_LEVEL_SCAN: usize = 64;

#[derive(Debug, Error)]
pub enum JuliaError {
    #[error("the odd-base threshold is defined for odd d >= 3, got {0}")]
    EvenBase(u32),
    #[error("sequence admits probabilities arbitrarily close to 0; the scaling product diverges")]
    VanishingProbabilities,
}

/// One real monic-side step `g(w) = ((w^d - 1) + p) / p`.
#[inline]
fn apply_g_real(w: f64, p: f64, d: u32) -> f64 {
    ((w.powi(d as i32) - 1.0) + p) / p
}

// ── odd-base threshold ──

/// `theta`: the root in (0, 1) of `d x^(d-1) + (d-1) x^d = 1`;
/// `vartheta = d theta^(d-1)` is the tail threshold above which the
/// interval `[-theta, 1]` is forward invariant for every stage map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaThreshold {
    pub theta: f64,
    pub vartheta: f64,
}

/// Bisects the defining polynomial; odd `d >= 3` only. For `d = 3` the
/// values are exactly `theta = 1/2`, `vartheta = 3/4`; the thresholds
/// decrease strictly in `d` toward `1/2`.
pub fn theta_d(d: u32) -> Result<ThetaThreshold, JuliaError> {
    if d < 3 || d % 2 == 0 {
        return Err(JuliaError::EvenBase(d));
    }
    let dd = d as f64;
    let psi = |x: f64| dd * x.powi(d as i32 - 1) + (dd - 1.0) * x.powi(d as i32) - 1.0;
    let mut lo = 1e-9;
    let mut hi = 1.0 - 1e-9;
    debug_assert!(psi(lo) < 0.0 && psi(hi) > 0.0);
    for _ in 0..200 {
        if hi - lo < 1e-16 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if psi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    Ok(ThetaThreshold { theta, vartheta: dd * theta.powi(d as i32 - 1) })
}

/// Interval floor and tail threshold used by the bounded-orbit proof:
/// `[-floor, 1]` is forward invariant for stage maps with `p >= threshold`.
fn orbit_decision_bounds(d: u32) -> (f64, f64) {
    if d % 2 == 0 {
        (-1.0, 0.5)
    } else {
        let t = theta_d(d).expect("odd d >= 3 always has a threshold");
        (-t.theta, t.vartheta)
    }
}

// ── critical orbits ──

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CriticalOrbitStatus {
    /// `proved` means the orbit entered the invariant interval with every
    /// remaining stage map above the tail threshold, so boundedness is a
    /// theorem (up to escape-tolerance slack absorbing seed roundoff).
    /// Unproved means the budget ran out with the orbit still in bounds.
    Bounded { stages_run: usize, proved: bool },
    Escaped { stage: usize, witness: f64 },
}

impl CriticalOrbitStatus {
    pub fn escaped(&self) -> bool {
        matches!(self, CriticalOrbitStatus::Escaped { .. })
    }

    pub fn proved_bounded(&self) -> bool {
        matches!(self, CriticalOrbitStatus::Bounded { proved: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalOrbitReport {
    pub level: usize,
    pub status: CriticalOrbitStatus,
    /// `w_1 = g_{level+1}(0), w_2 = g_{level+2}(w_1), ...` as computed.
    pub trace: Vec<f64>,
}

/// Runs the level-`k` critical orbit: seed `g_{k+1}(0)`, then apply
/// `g_{k+2}, g_{k+3}, ...` up to `budget` stages.
///
/// Escape fires when `|w| > 1 + tol`. Boundedness is proved early when the
/// orbit sits inside the invariant interval (`[-1, 1]` for even `d`,
/// `[-theta, 1]` for odd `d`, with tolerance slack) and every remaining
/// stage map has `p` at least the tail threshold (1/2 resp. `vartheta`).
pub fn critical_orbit(
    probs: &ProbabilitySequence,
    level: usize,
    budget: usize,
) -> CriticalOrbitReport {
    assert!(level >= 1, "critical-orbit levels are 1-based");
    assert!(budget >= 1);
    let d = probs.d();
    let (floor, tail_threshold) = orbit_decision_bounds(d);
    // Proof needs every map index past the current stage to clear the
    // threshold; with infinitely many below it no stage ever qualifies.
    let last_small = match probs.indices_below(tail_threshold, 2) {
        IndicesBelow::Finite { last, .. } => Some(last.unwrap_or(1)),
        IndicesBelow::Infinite => None,
    };

    let mut trace = Vec::new();
    let mut w = apply_g_real(0.0, probs.p(level + 1), d);
    for stage in 1..=budget {
        if stage > 1 {
            w = apply_g_real(w, probs.p(level + stage), d);
        }
        trace.push(w);
        if !(w.abs() <= 1.0 + ESCAPE_TOLERANCE) {
            return CriticalOrbitReport {
                level,
                status: CriticalOrbitStatus::Escaped { stage, witness: w },
                trace,
            };
        }
        if let Some(t) = last_small {
            if level + stage + 1 > t && w >= floor - ESCAPE_TOLERANCE {
                return CriticalOrbitReport {
                    level,
                    status: CriticalOrbitStatus::Bounded { stages_run: stage, proved: true },
                    trace,
                };
            }
        }
    }
    CriticalOrbitReport {
        level,
        status: CriticalOrbitStatus::Bounded { stages_run: budget, proved: false },
        trace,
    }
}

// ── connectedness classification ──

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ConnectednessVerdict {
    Connected,
    ComponentsExactly(u64),
    ComponentsAtLeast(u64),
    InfinitelyMany,
    Cantor,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectednessReport {
    pub verdict: ConnectednessVerdict,
    /// Which decision rule fired, in plain words.
    pub rule: String,
    /// Critical orbits run as evidence.
    pub orbits: Vec<CriticalOrbitReport>,
    /// Levels whose orbit exhausted its budget undecided; the verdict is
    /// then a lower bound.
    pub undecided_levels: Vec<usize>,
}

/// `1 + (d-1) * sum d^(k-1)` over escaped levels, saturating at `u64::MAX`.
fn component_count(d: u32, escaped_levels: impl IntoIterator<Item = usize>) -> u64 {
    let base = d as u128;
    let mut sum: u128 = 0;
    for k in escaped_levels {
        let Some(power) = base.checked_pow((k - 1) as u32) else {
            return u64::MAX;
        };
        let Some(next) = sum.checked_add(power) else {
            return u64::MAX;
        };
        sum = next;
    }
    match (base - 1).checked_mul(sum).and_then(|x| x.checked_add(1)) {
        Some(n) if n <= u64::MAX as u128 => n as u64,
        _ => u64::MAX,
    }
}

/// The tail value when the sequence is eventually constant (including
/// degenerate iid draws and all-equal cycles).
fn effective_constant_tail(probs: &ProbabilitySequence) -> Option<f64> {
    match probs.tail() {
        TailRule::Constant { value } => Some(*value),
        TailRule::IidUniform { lo, hi, .. } if lo == hi => Some(*lo),
        TailRule::Cycle => {
            let first = probs.prefix()[0];
            probs.prefix().iter().all(|&p| p == first).then_some(first)
        }
        _ => None,
    }
}

/// Classifies the connectedness of the filled-in set (equivalently of the
/// spectrum: the affine change `h_1` is a homeomorphism).
///
/// `budget` caps the stages of every critical orbit run.
pub fn classify_connectedness(
    probs: &ProbabilitySequence,
    budget: usize,
) -> ConnectednessReport {
    let d = probs.d();
    let (_, tail_threshold) = orbit_decision_bounds(d);
    let below = probs.indices_below(tail_threshold, 2);

    match below {
        IndicesBelow::Finite { count: 0, .. } => {
            // Every seed lands in the invariant interval and stays: all
            // critical orbits are bounded.
            let orbit = critical_orbit(probs, 1, budget);
            ConnectednessReport {
                verdict: ConnectednessVerdict::Connected,
                rule: format!(
                    "every probability from index 2 on is at least the tail threshold {tail_threshold:.6}, so every critical orbit is bounded"
                ),
                orbits: vec![orbit],
                undecided_levels: Vec::new(),
            }
        }
        IndicesBelow::Finite { last: Some(t), .. } => {
            if d % 2 == 0 {
                classify_even_finite(probs, t, budget)
            } else {
                classify_odd_scan(probs, Some(t), budget)
            }
        }
        IndicesBelow::Finite { last: None, .. } => unreachable!("count > 0 has a last index"),
        IndicesBelow::Infinite => classify_infinite(probs, tail_threshold, budget),
    }
}

/// Even base, finitely many sub-threshold tail indices, the last at `t`:
/// levels `k >= t` are provably bounded (their seed and every later map sit
/// past `t`), so only levels `1..t` need orbit runs, and the escape set is
/// read off directly.
fn classify_even_finite(
    probs: &ProbabilitySequence,
    t: usize,
    budget: usize,
) -> ConnectednessReport {
    let d = probs.d();
    let mut orbits = Vec::new();
    let mut escaped = Vec::new();
    let mut undecided = Vec::new();
    for level in 1..t {
        let report = critical_orbit(probs, level, budget);
        match report.status {
            CriticalOrbitStatus::Escaped { .. } => escaped.push(level),
            CriticalOrbitStatus::Bounded { proved: false, .. } => undecided.push(level),
            CriticalOrbitStatus::Bounded { proved: true, .. } => {}
        }
        orbits.push(report);
    }
    let count = component_count(d, escaped.iter().copied());
    let (verdict, rule) = if !undecided.is_empty() {
        (
            ConnectednessVerdict::ComponentsAtLeast(count),
            format!(
                "levels {undecided:?} exhausted the orbit budget undecided; counting only confirmed escapes {escaped:?}"
            ),
        )
    } else if count == 1 {
        (
            ConnectednessVerdict::Connected,
            format!("all critical orbits up to the last sub-threshold index {t} are bounded"),
        )
    } else {
        (
            ConnectednessVerdict::ComponentsExactly(count),
            format!("escaped levels {escaped:?}; levels from {t} on are provably bounded"),
        )
    };
    ConnectednessReport { verdict, rule, orbits, undecided_levels: undecided }
}

/// Odd base: stage maps are increasing and orbits nonpositive, so a bounded
/// level forces all higher levels bounded and the escape set is a prefix.
/// Scan upward until a level stops escaping. `cutoff` is the last
/// sub-threshold index when there is one (levels from there on are provably
/// bounded); otherwise the scan is capped and the verdict stays a lower
/// bound unless a bounded level is found.
fn classify_odd_scan(
    probs: &ProbabilitySequence,
    cutoff: Option<usize>,
    budget: usize,
) -> ConnectednessReport {
    let d = probs.d();
    let scan_end = cutoff.unwrap_or(MAX_LEVEL_SCAN + 1);
    let mut orbits = Vec::new();
    let mut escaped = 0usize;
    for level in 1..scan_end {
        let report = critical_orbit(probs, level, budget);
        let status = report.status;
        orbits.push(report);
        match status {
            CriticalOrbitStatus::Escaped { .. } => escaped += 1,
            CriticalOrbitStatus::Bounded { proved: true, .. } => {
                let (verdict, escapes) = if escaped == 0 {
                    (ConnectednessVerdict::Connected, "no level escapes".to_string())
                } else {
                    (
                        ConnectednessVerdict::ComponentsExactly(component_count(d, 1..=escaped)),
                        format!("the escape set is exactly {{1..={escaped}}}"),
                    )
                };
                return ConnectednessReport {
                    verdict,
                    rule: format!(
                        "odd base: level {level} is provably bounded, so every higher level is bounded and {escapes}"
                    ),
                    orbits,
                    undecided_levels: Vec::new(),
                };
            }
            CriticalOrbitStatus::Bounded { proved: false, .. } => {
                return ConnectednessReport {
                    verdict: ConnectednessVerdict::ComponentsAtLeast(component_count(
                        d,
                        1..=escaped,
                    )),
                    rule: format!(
                        "odd base: level {level} exhausted its orbit budget undecided after {escaped} confirmed escapes"
                    ),
                    orbits,
                    undecided_levels: vec![level],
                };
            }
        }
    }
    if let Some(t) = cutoff {
        // Everything below t escaped and everything from t on is provably
        // bounded, so the escape set is exactly {1..t-1}.
        let verdict = if escaped == 0 {
            ConnectednessVerdict::Connected
        } else {
            ConnectednessVerdict::ComponentsExactly(component_count(d, 1..=escaped))
        };
        ConnectednessReport {
            verdict,
            rule: format!(
                "odd base: levels 1..{t} all escape and levels from {t} on are provably bounded"
            ),
            orbits,
            undecided_levels: Vec::new(),
        }
    } else {
        ConnectednessReport {
            verdict: ConnectednessVerdict::ComponentsAtLeast(component_count(d, 1..=escaped)),
            rule: format!(
                "odd base: first {escaped} levels all escape and the scan cap was reached with no analytic cutoff"
            ),
            orbits,
            undecided_levels: Vec::new(),
        }
    }
}

/// Infinitely many tail indices below the threshold.
fn classify_infinite(
    probs: &ProbabilitySequence,
    tail_threshold: f64,
    budget: usize,
) -> ConnectednessReport {
    let d = probs.d();
    if let Some(value) = effective_constant_tail(probs) {
        debug_assert!(value < tail_threshold);
        let prefix_len = probs.prefix().len();
        if d % 2 == 1 {
            // Tail-region orbits strictly decrease (the stage polynomial has
            // no fixed point on the nonpositive axis below the threshold),
            // so infinitely many levels escape; by the prefix structure of
            // odd-base escape sets, every level escapes.
            let mut levels = vec![1];
            if prefix_len > 0 {
                levels.push(prefix_len + 1);
            }
            let orbits = levels
                .into_iter()
                .map(|k| critical_orbit(probs, k, budget))
                .collect();
            return ConnectednessReport {
                verdict: ConnectednessVerdict::Cantor,
                rule: format!(
                    "odd base with constant tail {value:.6} below the threshold {tail_threshold:.6}: every critical orbit escapes"
                ),
                orbits,
                undecided_levels: Vec::new(),
            };
        }
        // Even base: levels past the prefix share one orbit; run every
        // distinct orbit and demand escape across the board.
        let mut orbits = Vec::new();
        let mut all_escaped = true;
        let mut undecided = Vec::new();
        for level in 1..=prefix_len + 1 {
            let report = critical_orbit(probs, level, budget);
            match report.status {
                CriticalOrbitStatus::Escaped { .. } => {}
                CriticalOrbitStatus::Bounded { proved: false, .. } => {
                    all_escaped = false;
                    undecided.push(level);
                }
                CriticalOrbitStatus::Bounded { proved: true, .. } => all_escaped = false,
            }
            orbits.push(report);
        }
        let (verdict, rule) = if all_escaped {
            (
                ConnectednessVerdict::Cantor,
                format!(
                    "even base with constant tail {value:.6} below 1/2: every distinct critical orbit escapes"
                ),
            )
        } else {
            (
                ConnectednessVerdict::InfinitelyMany,
                "constant sub-threshold tail escapes at infinitely many levels, but not at all of them".to_string(),
            )
        };
        return ConnectednessReport { verdict, rule, orbits, undecided_levels: undecided };
    }

    match probs.tail() {
        TailRule::IidUniform { lo, .. } => {
            let orbit = critical_orbit(probs, 1, budget);
            ConnectednessReport {
                verdict: ConnectednessVerdict::InfinitelyMany,
                rule: format!(
                    "iid tail with positive mass below the threshold (lo = {lo}): infinitely many escaping levels almost surely"
                ),
                orbits: vec![orbit],
                undecided_levels: Vec::new(),
            }
        }
        _ if d % 2 == 1 => classify_odd_scan(probs, None, budget),
        _ => {
            let orbit = critical_orbit(probs, 1, budget);
            ConnectednessReport {
                verdict: ConnectednessVerdict::InfinitelyMany,
                rule: "infinitely many tail indices below 1/2 seed escaping levels".to_string(),
                orbits: vec![orbit],
                undecided_levels: Vec::new(),
            }
        }
    }
}

// ── monic conjugation ──

/// Scaling data of the monic model.
#[derive(Debug, Clone, Serialize)]
pub struct FiberedConjugacy {
    /// `λ(p̄) = prod_i (1/p_i)^(d^-i)`.
    pub lambda: f64,
    /// `c(τ^k p̄)` for `k = 0..=shifts`.
    pub c_values: Vec<f64>,
    /// Worst log-scale truncation remainder across the computed products.
    pub truncation_error: f64,
}

/// Truncated evaluation of `log λ = sum_i d^-i log(1/p_i)`: terms are added
/// until the geometric tail bound `log(1/eps) d^-N / (d-1)` drops below
/// `tol`. Returns the value and the achieved bound.
fn lambda_scale_detail(
    probs: &ProbabilitySequence,
    tol: f64,
) -> Result<(f64, f64), JuliaError> {
    let eps = probs.min_probability();
    if !(eps > 0.0) {
        return Err(JuliaError::VanishingProbabilities);
    }
    let d = probs.d() as f64;
    let log_inv_eps = -eps.ln();
    let mut weight = 1.0 / d;
    let mut log_sum = 0.0;
    let mut remainder;
    let mut i = 1usize;
    loop {
        log_sum += weight * -probs.p(i).ln();
        remainder = log_inv_eps * weight / (d - 1.0);
        if remainder < tol || i >= 10_000 {
            break;
        }
        weight /= d;
        i += 1;
    }
    Ok((log_sum.exp(), remainder))
}

/// `λ(p̄)` to within `tol` (log scale). Always in
/// `[1, (1/min p)^(1/(d-1))]`; exactly 1 when every `p_i = 1`.
pub fn lambda_scale(probs: &ProbabilitySequence, tol: f64) -> Result<f64, JuliaError> {
    lambda_scale_detail(probs, tol).map(|(v, _)| v)
}

/// `c(p̄) = -((1 - p_1)/p_1) λ(τ p̄)`, the (real, nonpositive) constant of
/// the monic model `z^d + c`.
pub fn monic_offset(probs: &ProbabilitySequence, tol: f64) -> Result<f64, JuliaError> {
    let p1 = probs.p(1);
    Ok(-((1.0 - p1) / p1) * lambda_scale(&probs.shift(1), tol)?)
}

/// Computes `λ(p̄)` and the offsets `c(τ^k p̄)` for `k = 0..=shifts`.
///
/// The scalings satisfy `λ(p̄)^d = λ(τ p̄) / p_1`.
pub fn conjugacy(
    probs: &ProbabilitySequence,
    shifts: usize,
    tol: f64,
) -> Result<FiberedConjugacy, JuliaError> {
    let (lambda, mut worst) = lambda_scale_detail(probs, tol)?;
    let mut c_values = Vec::with_capacity(shifts + 1);
    for k in 0..=shifts {
        let shifted = probs.shift(k);
        let p1 = shifted.p(1);
        let (lam_tau, rem) = lambda_scale_detail(&shifted.shift(1), tol)?;
        worst = worst.max(rem);
        c_values.push(-((1.0 - p1) / p1) * lam_tau);
    }
    Ok(FiberedConjugacy { lambda, c_values, truncation_error: worst })
}

// ── Green function ──

/// Escape-rate function of the monic cascade based at a fixed sequence:
/// `G(z) = lim d^-n log|P̂_n ∘ ... ∘ P̂_1(z)|`, zero exactly on the
/// filled-in set of the cascade.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    d: u32,
    c: Vec<f64>,
}

impl GreenFunction {
    /// Prepares the offsets `c(τ^k p̄)` for `k < n_max`.
    pub fn new(
        probs: &ProbabilitySequence,
        n_max: usize,
        tol: f64,
    ) -> Result<Self, JuliaError> {
        assert!(n_max >= 1);
        let conj = conjugacy(probs, n_max - 1, tol)?;
        Ok(Self { d: probs.d(), c: conj.c_values })
    }

    pub fn depth(&self) -> usize {
        self.c.len()
    }

    /// `d^-n log|w_n|` at the first `n` with `|w_n| > BIG_RADIUS`
    /// (`|w_n|` is then so large that deeper terms shift the value by
    /// `O(|c| / |w_n|^d)`), and 0 when the budget runs out.
    pub fn eval(&self, z: Complex64) -> f64 {
        let d = self.d;
        let mut w = z;
        let mut modulus = w.norm();
        if !(modulus <= BIG_RADIUS) {
            return modulus.ln();
        }
        for (k, &c) in self.c.iter().enumerate() {
            w = pow_u(w, d) + c;
            modulus = w.norm();
            if !(modulus <= BIG_RADIUS) {
                return modulus.ln() / (d as f64).powi(k as i32 + 1);
            }
        }
        0.0
    }
}

/// One-off Green evaluation; precompute a [`GreenFunction`] for grids.
pub fn green_function(z: Complex64, probs: &ProbabilitySequence, n_max: usize) -> f64 {
    GreenFunction::new(probs, n_max, DEFAULT_PRODUCT_TOL)
        .expect("validated sequences have positive probabilities")
        .eval(z)
}

// ── quasicircle criterion ──

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuasicircleVerdict {
    /// Every offset of the shifted monic models is uniformly small, so each
    /// fiber Julia set is a quasicircle.
    GuaranteedQuasicircle,
    /// The sufficient criterion fails; nothing is asserted either way.
    CriterionFails,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasicircleReport {
    pub verdict: QuasicircleVerdict,
    /// `(1/2)^(d/(d-1))`: offsets strictly below this force quasicircles.
    pub threshold: f64,
    /// `max_k |c(τ^k p̄)|` over the explicitly checked shifts `k = 1..=K`.
    pub sup_offset_checked: f64,
    /// Analytic bound on `|c(τ^k p̄)|` for every unchecked `k > K`, from the
    /// infimum `ρ` of the remaining probabilities:
    /// `(1/ρ - 1)(1/ρ)^(1/(d-1))`.
    pub tail_bound: f64,
    /// All probabilities from index 2 on are at least `2(sqrt 2 - 1)`, which
    /// certifies the criterion for every `d` without computing offsets.
    pub shortcut: bool,
}

/// Checks the sufficient quasicircle criterion for the boundary fibers of
/// the spectrum: the relevant monic models start one shift in, so offsets
/// are examined for `k >= 1`.
pub fn quasicircle_check(probs: &ProbabilitySequence) -> Result<QuasicircleReport, JuliaError> {
    let d = probs.d() as f64;
    let threshold = 0.5f64.powf(d / (d - 1.0));
    let shortcut_floor = 2.0 * (2.0f64.sqrt() - 1.0);
    let shortcut = probs.shift(1).min_probability() >= shortcut_floor;

    let mut sup = 0.0f64;
    for k in 1..=QUASI_SHIFTS {
        let shifted = probs.shift(k);
        let p1 = shifted.p(1);
        let lam = lambda_scale(&shifted.shift(1), DEFAULT_PRODUCT_TOL)?;
        sup = sup.max(((1.0 - p1) / p1) * lam);
    }
    let rho = probs.shift(QUASI_SHIFTS + 1).min_probability();
    let tail_bound = (1.0 / rho - 1.0) * (1.0 / rho).powf(1.0 / (d - 1.0));

    let verdict = if shortcut || sup.max(tail_bound) < threshold {
        QuasicircleVerdict::GuaranteedQuasicircle
    } else {
        QuasicircleVerdict::CriterionFails
    };
    Ok(QuasicircleReport {
        verdict,
        threshold,
        sup_offset_checked: sup,
        tail_bound,
        shortcut,
    })
}

/// The probability floor at which the analytic offset bound meets the
/// quasicircle threshold: sequences with `inf p >= rho_threshold(d)` (from
/// index 2 on) pass the criterion. Equals `2(sqrt 2 - 1)` at `d = 2` and
/// decreases toward 1/2 as `d` grows.
pub fn rho_threshold(d: u32) -> f64 {
    let dd = d as f64;
    let target = 0.5f64.powf(dd / (dd - 1.0));
    let excess = |rho: f64| (1.0 / rho - 1.0) * (1.0 / rho).powf(1.0 / (dd - 1.0)) - target;
    let mut lo = 0.5;
    let mut hi = 1.0 - 1e-15;
    debug_assert!(excess(lo) > 0.0 && excess(hi) < 0.0);
    for _ in 0..200 {
        if hi - lo < 1e-16 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
