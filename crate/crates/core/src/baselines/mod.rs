//! Comparison learners: ISS (independent self-sparring over per-action
//! Beta posteriors) and a DTS-style double Thompson sampler over pairwise
//! posteriors.

mod dts;
mod iss;

pub use dts::{Dts, DtsBounds, DEFAULT_A_DTS};
pub use iss::Iss;
