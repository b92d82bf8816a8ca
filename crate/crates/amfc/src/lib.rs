//! Base-`d` stochastic adding machine: the Markov chain obtained by adding
//! 1 to a base-`d` counter whose carries each succeed independently with
//! probability `p_j` (digit position `j`), stopping the addition at the
//! first failed carry.
//!
//! The crate covers three layers of the object:
//!
//! * **Chain layer** ([`adding_machine`], [`transition`]): exact one-step
//!   transition distributions, sparse truncations of the transition
//!   operator with their self-similarity structure, recurrence and
//!   hitting-time formulas, and Monte Carlo simulation.
//! * **Spectral layer** ([`spectrum`]): the spectrum of the operator on
//!   `l^infinity` is the set of points whose orbit under the fibered
//!   cascade `f_j(z) = ((z - (1 - p_j)) / p_j)^d` stays bounded. Orbit
//!   iteration, membership tests, explicit eigenvector slices with residual
//!   checks, and the one-step spectral self-mapping are provided.
//! * **Geometry layer** ([`julia`], [`render`]): conjugating the cascade to
//!   monic form exposes the critical orbits that decide how many connected
//!   components the spectrum has (1, finitely many, infinitely many, or a
//!   Cantor set), a sequence-indexed Green function vanishing exactly on
//!   the set, a sufficient criterion for every fiber Julia set to be a
//!   quasicircle, and escape-level rasterization with component counting.
//!
//! Probability sequences ([`probability::ProbabilitySequence`]) pair a
//! finite prefix with a deterministic tail rule so that the shift map
//! `τ p̄ = (p_2, p_3, ...)`, which drives all the fibered dynamics, is exact
//! and reproducible.

pub mod adding_machine;
pub mod julia;
pub mod probability;
pub mod render;
pub mod spectrum;
pub mod transition;

pub use probability::{ConfigError, ProbabilitySequence, TailRule};
pub use spectrum::{iterate_f, membership_via_q, OrbitStatus};
pub use transition::{build_truncated, TruncatedOperator};
