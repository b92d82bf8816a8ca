//! The transition operator of the chain and its finite truncations.
//!
//! Row `n` of the operator `S` is the one-step law out of state `n`:
//!
//! ```text
//! s(n, n)             = 1 - p_1
//! s(n, n - (d^r - 1)) = p_1 ... p_r (1 - p_{r+1})    1 <= r <= zeta(n) - 1
//! s(n, n + 1)         = p_1 ... p_{zeta(n)}
//! ```
//!
//! Rows always sum to 1. Columns `m >= 1` also sum to 1 (the contributors
//! telescope), while column 0 sums to `1 - prod_j p_j`, so `S` is doubly
//! stochastic exactly when the infinite product vanishes.
//!
//! The operator has a self-similar block structure: for
//! `d^(j-1) <= n <= d^j - 2` the row of `n` is the row of
//! `n - a_j(n) d^(j-1)` translated by `a_j(n) d^(j-1)`, and vanishes outside
//! the column window `[d^(j-1), d^j - 1]`.

use serde::Serialize;
use thiserror::Error;

use crate::adding_machine::{counter_zeta, digit_at, step_distribution};
use crate::probability::{IndicesBelow, ProbabilitySequence};

/// Hard cap on stored entries of a truncation (~64M; each entry is 16 bytes
/// of column+value plus row index overhead).
pub const MAX_TRUNCATION_ENTRIES: usize = 1 << 26;

#[derive(Debug, Error)]
pub enum TruncationError {
    #[error("truncation size must be at least 1")]
    Empty,
    #[error("truncation to {size} rows needs about {estimated} entries, over the {MAX_TRUNCATION_ENTRIES} cap")]
    TooLarge { size: usize, estimated: usize },
}

/// `s(n, m)` evaluated directly from the law above.
pub fn transition_prob(n: u64, m: u64, probs: &ProbabilitySequence) -> f64 {
    let d = probs.d() as u64;
    let zeta = counter_zeta(n, probs.d());
    if m == n {
        return 1.0 - probs.p(1);
    }
    if n.checked_add(1) == Some(m) {
        let mut running = 1.0f64;
        for j in 1..=zeta {
            running *= probs.p(j);
        }
        return running;
    }
    if m < n {
        // A wrap-back must cover exactly d^r - 1 for some 1 <= r <= zeta-1.
        let Some(span) = (n - m).checked_add(1) else {
            return 0.0;
        };
        if let Some(r) = span.checked_ilog(d) {
            let r = r as usize;
            if r >= 1 && r <= zeta.saturating_sub(1) && d.pow(r as u32) == span {
                let mut running = 1.0f64;
                for j in 1..=r {
                    running *= probs.p(j);
                }
                return running * (1.0 - probs.p(r + 1));
            }
        }
    }
    0.0
}

/// Finite section `(s(n, m))_{n, m < size}` in compressed sparse rows.
///
/// Only the final row is clipped by the truncation (its carry target is
/// `size`); every other row keeps its full support. Stored entries come from
/// the same running-product arithmetic as [`step_distribution`], so equal
/// expressions are equal floats.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    d: u32,
    size: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TruncatedOperator {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Whether row `n` lost mass to the truncation.
    pub fn is_boundary_row(&self, n: usize) -> bool {
        n + 1 == self.size
    }

    /// Stored `(column, value)` pairs of row `n`, by increasing column.
    pub fn row(&self, n: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[n]..self.row_start[n + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.row(n)
            .find(|&(col, _)| col == m)
            .map_or(0.0, |(_, v)| v)
    }

    pub fn row_sum(&self, n: usize) -> f64 {
        self.row(n).map(|(_, v)| v).sum()
    }

    pub fn entry_count(&self) -> usize {
        self.cols.len()
    }

    /// All stored entries as `(row, col, value)`, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.size).flat_map(move |n| self.row(n).map(move |(m, v)| (n, m, v)))
    }

    /// Adds `delta` to a stored entry; `false` if the entry is absent.
    /// Intended for negative controls in structure checks.
    pub fn perturb_entry(&mut self, n: usize, m: usize, delta: f64) -> bool {
        let span = self.row_start[n]..self.row_start[n + 1];
        for idx in span {
            if self.cols[idx] == m {
                self.vals[idx] += delta;
                return true;
            }
        }
        false
    }
}

/// Builds the finite section of rows and columns `0..size`.
pub fn build_truncated(
    probs: &ProbabilitySequence,
    size: usize,
) -> Result<TruncatedOperator, TruncationError> {
    if size == 0 {
        return Err(TruncationError::Empty);
    }
    let d = probs.d();
    // Row n holds at most zeta(n) + 1 <= log_d(n) + 2 entries.
    let estimated = size * ((size as u64).max(1).ilog(d as u64) as usize + 2);
    if estimated > MAX_TRUNCATION_ENTRIES {
        return Err(TruncationError::TooLarge { size, estimated });
    }

    let mut row_start = Vec::with_capacity(size + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_start.push(0);
    let mut row: Vec<(u64, f64)> = Vec::new();
    for n in 0..size {
        row.clear();
        row.extend(step_distribution(n as u64, probs).outcomes);
        row.sort_unstable_by_key(|&(m, _)| m);
        for &(m, v) in &row {
            if (m as usize) < size {
                cols.push(m as usize);
                vals.push(v);
            }
        }
        row_start.push(cols.len());
    }
    Ok(TruncatedOperator { d, size, row_start, cols, vals })
}

/// One mismatch against the self-similar block structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfSimilarityViolation {
    pub n: usize,
    pub m: usize,
    pub found: f64,
    pub expected: f64,
}

/// Verifies the block-translation identity on a built operator for digit
/// position `j`: every row `n` in `[d^(j-1), d^j - 2]` must equal the row of
/// `n - a_j(n) d^(j-1)` translated by `a_j(n) d^(j-1)`, and vanish outside
/// columns `[d^(j-1), d^j - 1]`. Entries must match exactly (they are the
/// same arithmetic), so any perturbation is flagged.
///
/// Requires `d^j <= op.size()` so the compared rows are never clipped.
pub fn verify_self_similarity(op: &TruncatedOperator, j: u32) -> Vec<SelfSimilarityViolation> {
    assert!(j >= 1, "digit positions are 1-based");
    let d = op.d() as u64;
    let lo = d.pow(j - 1) as usize;
    let hi = d.pow(j) as usize - 1;
    assert!(hi + 1 <= op.size(), "window [{lo}, {hi}] exceeds the truncation");

    let mut violations = Vec::new();
    for n in lo..hi {
        let a = digit_at(n as u64, op.d(), j as usize) as usize;
        let shift = a * lo;
        let reference = n - shift;
        let mut columns: Vec<usize> = op.row(n).map(|(m, _)| m).collect();
        columns.extend(op.row(reference).map(|(m, _)| m + shift));
        columns.sort_unstable();
        columns.dedup();
        for m in columns {
            let found = op.get(n, m);
            let expected = if (lo..=hi).contains(&m) {
                op.get(reference, m - shift)
            } else {
                0.0
            };
            if found != expected {
                violations.push(SelfSimilarityViolation { n, m, found, expected });
            }
        }
    }
    violations
}

/// Builds the truncation and checks the block structure at position `j`.
pub fn check_self_similarity(
    probs: &ProbabilitySequence,
    j: u32,
    size: usize,
) -> Result<Vec<SelfSimilarityViolation>, TruncationError> {
    let op = build_truncated(probs, size)?;
    Ok(verify_self_similarity(&op, j))
}

/// Long-run classification of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RecurrenceClass {
    /// irreducible with vanishing product of the `p_j`: recurrent, but the
    /// expected return time to any state is infinite
    NullRecurrent,
    /// irreducible with positive product: escapes to infinity
    Transient,
    /// `p_j = 1` for all but finitely many `j`: the chain is eventually a
    /// deterministic +1 conveyor and no state communicates backwards
    NotIrreducible,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceReport {
    pub class: RecurrenceClass,
    /// partial products `p_1 ... p_J` for `J = 1..=32`, as a diagnostic of
    /// where the infinite product is heading
    pub partial_products: Vec<f64>,
}

/// Classifies recurrence from the tail rule. The chain is irreducible iff
/// `p_j < 1` infinitely often; an irreducible chain is null recurrent iff
/// `prod_j p_j = 0`, i.e. iff `sum_j (1 - p_j)` diverges, and transient
/// otherwise. For random tails the answer is almost-sure.
pub fn classify_recurrence(probs: &ProbabilitySequence) -> RecurrenceReport {
    let class = if probs.eventually_all_one() {
        RecurrenceClass::NotIrreducible
    } else if probs.deficit_sum_diverges() {
        RecurrenceClass::NullRecurrent
    } else {
        RecurrenceClass::Transient
    };
    let mut partial_products = Vec::with_capacity(32);
    let mut running = 1.0f64;
    for j in 1..=32 {
        running *= probs.p(j);
        partial_products.push(running);
    }
    RecurrenceReport { class, partial_products }
}

/// Expected visit count to 0 and expected first passage time to `d^n`,
/// starting from 0:
///
/// ```text
/// E[N_n]   = 1 / (p_1 ... p_{n+1})
/// E[tau_n] = d^n / (p_1 ... p_{n+1})
/// ```
///
/// Long products switch to log space to avoid premature underflow.
pub fn expected_visits_and_hitting(n: u32, probs: &ProbabilitySequence) -> (f64, f64) {
    let d = probs.d() as f64;
    let terms = n as usize + 1;
    if terms <= 64 {
        let mut running = 1.0f64;
        for j in 1..=terms {
            running *= probs.p(j);
        }
        let visits = 1.0 / running;
        (visits, d.powi(n as i32) * visits)
    } else {
        let mut log_product = 0.0f64;
        for j in 1..=terms {
            log_product += probs.p(j).ln();
        }
        let visits = (-log_product).exp();
        let hitting = (n as f64 * d.ln() - log_product).exp();
        (visits, hitting)
    }
}

/// Whether the chain is irreducible, straight from the tail rule.
pub fn is_irreducible(probs: &ProbabilitySequence) -> bool {
    matches!(probs.indices_below(1.0, 1), IndicesBelow::Infinite)
}
