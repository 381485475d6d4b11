//! Dueling-bandit simulation engine.
//!
//! The crate is organised around the life of one experiment:
//!
//! - [`preference`] holds validated win-probability matrices and the exact
//!   Copeland / Condorcet / Maximin / Borda winner oracles.
//! - [`environment`] builds synthetic utility-linked scenarios and realizes one
//!   binary outcome matrix per step.
//! - [`policy`] contains the Thompson-sampling, sparring exponential-weights and
//!   partial-monitoring learners behind the [`policy::DuelingPolicy`] contract;
//!   [`baselines`] adds the ISS and DTS comparison learners.
//! - [`regret`] implements the per-step regret definitions and the bound curves.
//! - [`runner`] drives seeded multi-run experiments, aggregates them and
//!   persists the results as CSV.
//!
//! All randomness flows through [`rng::SimRng`] (ChaCha8) seeded via a
//! splitmix64 derivation, so every experiment is bit-reproducible.

pub mod baselines;
pub mod environment;
pub mod error;
pub mod numfmt;
pub mod policy;
pub mod preference;
pub mod regret;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};
