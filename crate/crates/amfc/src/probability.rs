//! Probability sequences `p̄ = (p_1, p_2, ...)` with finitely described tails.
//!
//! Every analysis in this crate is parameterized by a base `d >= 2` and a
//! sequence of success probabilities in `(0, 1]`. A sequence is stored as an
//! explicit finite prefix plus a tail rule that generates `p_j` for every
//! index past the prefix, so shifted sequences and tail-dependent
//! classifications stay exactly computable.
//!
//! Indices are 1-based throughout: `p(1)` is the first entry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tail rule generating `p_j` for indices past the explicit prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailRule {
    /// `p_j = value` for every generated index.
    Constant { value: f64 },
    /// Repeats the prefix forever; the prefix must be non-empty.
    Cycle,
    /// Independent uniform draws from `[lo, hi)` (degenerate at `lo == hi`),
    /// derived from a counter-based generator so that shifted sequences
    /// reproduce the same draws. `skip` counts tail draws consumed by
    /// [`ProbabilitySequence::shift`] and is 0 in hand-written configs.
    IidUniform {
        lo: f64,
        hi: f64,
        seed: u64,
        #[serde(default, skip_serializing_if = "is_zero_u64")]
        skip: u64,
    },
    /// `p_j = 1 - alpha * beta^(j + offset)`, an increasing tail converging
    /// to 1 with summable deficits. `offset` accumulates shifts and is 0 in
    /// hand-written configs.
    ConvergentDeficit {
        alpha: f64,
        beta: f64,
        #[serde(default, skip_serializing_if = "is_zero_u64")]
        offset: u64,
    },
}

fn is_zero_u64(v: &u64) -> bool {
    *v == 0
}

/// Base `d` together with the full probability sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(try_from = "RawConfig")]
pub struct ProbabilitySequence {
    d: u32,
    #[serde(default)]
    prefix: Vec<f64>,
    tail: TailRule,
}

/// Serde mirror of [`ProbabilitySequence`]; deserialization funnels through
/// [`ProbabilitySequence::new`] so no unvalidated value can be constructed.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    d: u32,
    #[serde(default)]
    prefix: Vec<f64>,
    tail: TailRule,
}

impl TryFrom<RawConfig> for ProbabilitySequence {
    type Error = ConfigError;

    fn try_from(raw: RawConfig) -> Result<Self, ConfigError> {
        ProbabilitySequence::new(raw.d, raw.prefix, raw.tail)
    }
}

impl<'de> Deserialize<'de> for ProbabilitySequence {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawConfig::deserialize(de)?;
        Self::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Rejection reason for an invalid base or probability sequence.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("base d must be at least 2, got {0}")]
    BadBase(u32),
    #[error("probability p_{index} = {value} lies outside (0, 1]")]
    BadProbability { index: usize, value: f64 },
    #[error("cycle tail needs a non-empty prefix")]
    EmptyCycle,
    #[error("iid_uniform bounds must satisfy 0 < lo <= hi <= 1, got lo = {lo}, hi = {hi}")]
    BadIidBounds { lo: f64, hi: f64 },
    #[error("convergent_deficit needs alpha > 0 and beta in (0, 1), got alpha = {alpha}, beta = {beta}")]
    BadDeficitShape { alpha: f64, beta: f64 },
    #[error("convergent_deficit entry p_{index} = {value} is not positive")]
    DeficitNotPositive { index: usize, value: f64 },
    #[error("invalid config JSON: {0}")]
    Parse(String),
}

/// Answer to "which indices `j >= from` satisfy `p_j < x`?".
///
/// For random tails the infinite answer is almost-sure rather than certain;
/// it is reported as definite because every realization of the tail rule
/// with positive mass below `x` crosses it infinitely often with
/// probability one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndicesBelow {
    Finite { count: usize, last: Option<usize> },
    Infinite,
}

impl ProbabilitySequence {
    /// Validates and builds a sequence. All other constructors funnel here.
    pub fn new(d: u32, prefix: Vec<f64>, tail: TailRule) -> Result<Self, ConfigError> {
        if d < 2 {
            return Err(ConfigError::BadBase(d));
        }
        for (i, &p) in prefix.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ConfigError::BadProbability { index: i + 1, value: p });
            }
        }
        match tail {
            TailRule::Constant { value } => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(ConfigError::BadProbability {
                        index: prefix.len() + 1,
                        value,
                    });
                }
            }
            TailRule::Cycle => {
                if prefix.is_empty() {
                    return Err(ConfigError::EmptyCycle);
                }
            }
            TailRule::IidUniform { lo, hi, .. } => {
                if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
                    return Err(ConfigError::BadIidBounds { lo, hi });
                }
            }
            TailRule::ConvergentDeficit { alpha, beta, offset } => {
                if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta < 1.0) {
                    return Err(ConfigError::BadDeficitShape { alpha, beta });
                }
                let first = prefix.len() + 1;
                let value = deficit_entry(alpha, beta, offset, first);
                if !(value > 0.0) {
                    return Err(ConfigError::DeficitNotPositive { index: first, value });
                }
            }
        }
        Ok(Self { d, prefix, tail })
    }

    /// Convenience constructor for the ubiquitous constant sequence.
    pub fn constant(d: u32, value: f64) -> Result<Self, ConfigError> {
        Self::new(d, Vec::new(), TailRule::Constant { value })
    }

    /// Parses and validates the JSON config format:
    /// `{"d": 3, "prefix": [0.5], "tail": {"kind": "constant", "value": 0.9}}`.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Serializes back to the JSON config format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("probability sequence serializes")
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// `p_j` for 1-based `j`.
    pub fn p(&self, j: usize) -> f64 {
        assert!(j >= 1, "probability indices are 1-based");
        let len = self.prefix.len();
        if j <= len {
            return self.prefix[j - 1];
        }
        match &self.tail {
            TailRule::Constant { value } => *value,
            TailRule::Cycle => self.prefix[(j - len - 1) % len],
            TailRule::IidUniform { lo, hi, seed, skip } => {
                let draw = (j - len) as u64 + skip;
                lo + (hi - lo) * unit_from(*seed, draw)
            }
            TailRule::ConvergentDeficit { alpha, beta, offset } => {
                deficit_entry(*alpha, *beta, *offset, j)
            }
        }
    }

    /// The shifted sequence `(p_{k+1}, p_{k+2}, ...)`. Entries agree bitwise
    /// with the unshifted sequence: `shift(k).p(j) == p(j + k)` exactly, for
    /// every tail rule.
    pub fn shift(&self, k: usize) -> Self {
        if k == 0 {
            return self.clone();
        }
        let len = self.prefix.len();
        if let TailRule::Cycle = self.tail {
            let r = k % len;
            let mut prefix = self.prefix[r..].to_vec();
            prefix.extend_from_slice(&self.prefix[..r]);
            return Self { d: self.d, prefix, tail: TailRule::Cycle };
        }
        let prefix = self.prefix.get(k..).unwrap_or(&[]).to_vec();
        let consumed = k.saturating_sub(len) as u64;
        let tail = match &self.tail {
            TailRule::Constant { value } => TailRule::Constant { value: *value },
            TailRule::IidUniform { lo, hi, seed, skip } => TailRule::IidUniform {
                lo: *lo,
                hi: *hi,
                seed: *seed,
                skip: skip + consumed,
            },
            TailRule::ConvergentDeficit { alpha, beta, offset } => TailRule::ConvergentDeficit {
                alpha: *alpha,
                beta: *beta,
                offset: offset + k as u64,
            },
            TailRule::Cycle => unreachable!(),
        };
        Self { d: self.d, prefix, tail }
    }

    /// Exact infimum of the sequence over all indices.
    pub fn min_probability(&self) -> f64 {
        let prefix_min = self.prefix.iter().copied().fold(f64::INFINITY, f64::min);
        let tail_inf = match &self.tail {
            TailRule::Constant { value } => *value,
            TailRule::Cycle => prefix_min,
            TailRule::IidUniform { lo, .. } => *lo,
            TailRule::ConvergentDeficit { alpha, beta, offset } => {
                // Increasing tail: the first generated entry is the smallest.
                deficit_entry(*alpha, *beta, *offset, self.prefix.len() + 1)
            }
        };
        tail_inf.min(prefix_min)
    }

    /// Whether `p_j = 1` for all but finitely many `j` (the chain then fails
    /// to be irreducible).
    pub fn eventually_all_one(&self) -> bool {
        match &self.tail {
            TailRule::Constant { value } => *value == 1.0,
            TailRule::Cycle => self.prefix.iter().all(|&p| p == 1.0),
            TailRule::IidUniform { lo, .. } => *lo == 1.0,
            TailRule::ConvergentDeficit { .. } => false,
        }
    }

    /// Whether `sum_j (1 - p_j)` diverges, i.e. the infinite product of the
    /// `p_j` vanishes. Almost-sure for random tails.
    pub fn deficit_sum_diverges(&self) -> bool {
        match &self.tail {
            TailRule::Constant { value } => *value < 1.0,
            TailRule::Cycle => self.prefix.iter().any(|&p| p < 1.0),
            TailRule::IidUniform { lo, .. } => *lo < 1.0,
            TailRule::ConvergentDeficit { .. } => false,
        }
    }

    /// Classifies the index set `{ j >= from : p_j < x }` as finite (with
    /// count and last element) or infinite.
    pub fn indices_below(&self, x: f64, from: usize) -> IndicesBelow {
        let from = from.max(1);
        let len = self.prefix.len();
        let mut count = 0usize;
        let mut last = None;
        for j in from..=len {
            if self.prefix[j - 1] < x {
                count += 1;
                last = Some(j);
            }
        }
        let tail_infinite = match &self.tail {
            TailRule::Constant { value } => *value < x,
            TailRule::Cycle => self.prefix.iter().any(|&p| p < x),
            TailRule::IidUniform { lo, .. } => *lo < x,
            TailRule::ConvergentDeficit { alpha, beta, offset } => {
                // Entries increase toward 1 but stay strictly below it, so
                // only x < 1 leaves finitely many below the threshold.
                if x >= 1.0 {
                    true
                } else {
                    let first = len.max(from.saturating_sub(1)) + 1;
                    let (tail_count, tail_last) =
                        deficit_indices_below(*alpha, *beta, *offset, first, x);
                    count += tail_count;
                    if tail_last.is_some() {
                        last = tail_last;
                    }
                    false
                }
            }
        };
        if tail_infinite {
            IndicesBelow::Infinite
        } else {
            IndicesBelow::Finite { count, last }
        }
    }
}

fn deficit_entry(alpha: f64, beta: f64, offset: u64, j: usize) -> f64 {
    let exp = (j as u64).saturating_add(offset).min(i32::MAX as u64) as i32;
    1.0 - alpha * beta.powi(exp)
}

/// Count and last element of `{ j >= first : 1 - alpha*beta^(j+offset) < x }`.
/// The analytic candidate from logarithms is refined by direct evaluation so
/// the boundary index is exact.
fn deficit_indices_below(
    alpha: f64,
    beta: f64,
    offset: u64,
    first: usize,
    x: f64,
) -> (usize, Option<usize>) {
    let gap = 1.0 - x;
    debug_assert!(gap > 0.0, "caller handles x >= 1");
    // p_j < x  <=>  alpha * beta^(j+offset) > gap.
    let bound = ((gap / alpha).ln() / beta.ln()) - offset as f64;
    if bound < first as f64 - 1.0 {
        return (0, None);
    }
    let mut jm = bound.floor() as usize;
    while jm >= first && !(deficit_entry(alpha, beta, offset, jm) < x) {
        jm -= 1;
    }
    while deficit_entry(alpha, beta, offset, jm + 1) < x {
        jm += 1;
    }
    if jm < first {
        (0, None)
    } else {
        (jm - first + 1, Some(jm))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based uniform in `[0, 1)`: draw `index` from stream `seed`.
fn unit_from(seed: u64, index: u64) -> f64 {
    let z = splitmix64(seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    (z >> 11) as f64 / (1u64 << 53) as f64
}
