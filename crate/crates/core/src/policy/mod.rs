//! Sequential dueling policies.
//!
//! Every learner, including the [`crate::baselines`], implements
//! [`DuelingPolicy`]: `select` proposes an ordered pair `(I, J)`, `update`
//! feeds back the observed outcome `X_t(I, J)`, and `reset` restores the
//! initial state. Policies own their state and never see the realized outcome
//! matrix beyond the single observed cell.

mod exp3p;
mod hyper;
mod partial_monitoring;
mod thompson;
mod weights;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::baselines::{Dts, Iss, DEFAULT_A_DTS};

pub use exp3p::{exp3p_estimates, SparringExp3p};
pub use hyper::{
    alpha_schedule, exp3p_horizon_floor, exp3p_hyperparams, pm_horizon_floor, pm_hyperparams,
    Exp3pParams, HyperParamError, PmParams,
};
pub use partial_monitoring::{pm_estimate, PartialMonitoring};
pub use thompson::{
    maximin_choice, row_sum_choice, ts_sample_matrix, ts_sample_matrix_into, BetaPosterior, TsBorda, TsMaximin,
};
pub use weights::{sample_index, MixedWeights};

/// Ordered pair of actions chosen for one duel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Duel {
    pub first: usize,
    pub second: usize,
}

impl Duel {
    pub fn new(first: usize, second: usize) -> Self {
        Self { first, second }
    }

    pub fn is_self_duel(&self) -> bool {
        self.first == self.second
    }
}

/// Read-only view of an exponential-weights learner after its latest update.
#[derive(Debug, Clone, Copy)]
pub struct WeightsSnapshot<'a> {
    pub p: &'a [f64],
    pub q: Option<&'a [f64]>,
    pub log_weights_p: &'a [f64],
    pub log_weights_q: Option<&'a [f64]>,
    pub gamma: f64,
    /// Largest importance-weighted estimate produced by the latest update.
    pub max_estimate: f64,
    /// Pathwise cap on estimates implied by the exploration floor
    /// (`(1 + beta) A / gamma` or `A / gamma^2`).
    pub estimate_cap: f64,
}

/// Contract shared by all dueling learners.
pub trait DuelingPolicy: Send {
    fn algorithm(&self) -> Algorithm;

    fn actions(&self) -> usize;

    /// Proposes the next duel.
    fn select(&mut self, rng: &mut dyn RngCore) -> Duel;

    /// Feeds back `outcome = X_t(I, J)` for the duel returned by `select`.
    fn update(&mut self, duel: Duel, outcome: u8);

    fn reset(&mut self);

    /// Exponential-weights state, for the learners that have one.
    fn weights(&self) -> Option<WeightsSnapshot<'_>> {
        None
    }
}

/// Algorithms available to experiments.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum Algorithm {
    #[serde(rename = "ts-maximin")]
    TsMaximin,
    #[serde(rename = "ts-borda")]
    TsBorda,
    #[serde(rename = "exp3p")]
    SparringExp3p,
    #[serde(rename = "pm")]
    PartialMonitoring,
    #[serde(rename = "iss")]
    Iss,
    #[serde(rename = "dts")]
    Dts,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::TsMaximin,
        Algorithm::TsBorda,
        Algorithm::SparringExp3p,
        Algorithm::PartialMonitoring,
        Algorithm::Iss,
        Algorithm::Dts,
    ];

    /// Short machine tag used in CSV files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::TsMaximin => "ts-maximin",
            Algorithm::TsBorda => "ts-borda",
            Algorithm::SparringExp3p => "exp3p",
            Algorithm::PartialMonitoring => "pm",
            Algorithm::Iss => "iss",
            Algorithm::Dts => "dts",
        }
    }

    /// Human-readable label.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::TsMaximin => "TS-Maximin",
            Algorithm::TsBorda => "TS-Borda",
            Algorithm::SparringExp3p => "SparringExp3.P",
            Algorithm::PartialMonitoring => "PM",
            Algorithm::Iss => "ISS",
            Algorithm::Dts => "DTS (reimplementation)",
        }
    }

    /// Stable small integer used in seed derivation.
    pub fn seed_domain(self) -> u64 {
        match self {
            Algorithm::TsMaximin => 1,
            Algorithm::TsBorda => 2,
            Algorithm::SparringExp3p => 3,
            Algorithm::PartialMonitoring => 4,
            Algorithm::Iss => 5,
            Algorithm::Dts => 6,
        }
    }

    /// Checks that `horizon` satisfies this algorithm's tuning constraints.
    pub fn check_horizon(self, actions: usize, horizon: u64, alpha_c: f64) -> Result<(), HyperParamError> {
        match self {
            Algorithm::TsBorda => alpha_schedule(alpha_c, horizon).map(|_| ()),
            Algorithm::SparringExp3p => exp3p_hyperparams(actions, horizon).map(|_| ()),
            Algorithm::PartialMonitoring => pm_hyperparams(actions, horizon).map(|_| ()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| {
                let tags: Vec<_> = Algorithm::ALL.iter().map(|a| a.tag()).collect();
                format!("unknown algorithm `{s}` (expected one of {})", tags.join(", "))
            })
    }
}

/// Explicit hyperparameter values that replace the horizon-tuned ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

/// Everything needed to construct one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub algorithm: Algorithm,
    pub actions: usize,
    pub horizon: u64,
    /// Constant of the TS-Borda schedule `alpha = c T^(-1/3)`.
    pub alpha_c: f64,
    /// DTS confidence-radius constant.
    pub a_dts: f64,
    #[serde(default)]
    pub overrides: Overrides,
}

impl PolicyConfig {
    pub fn new(algorithm: Algorithm, actions: usize, horizon: u64) -> Self {
        Self {
            algorithm,
            actions,
            horizon,
            alpha_c: 1.0,
            a_dts: DEFAULT_A_DTS,
            overrides: Overrides::default(),
        }
    }

    /// Builds the learner, validating horizon floors unless every tuned
    /// parameter is overridden.
    pub fn build(&self) -> Result<Box<dyn DuelingPolicy>, HyperParamError> {
        let a = self.actions;
        if a == 0 {
            return Err(HyperParamError::TooFewActions {
                algorithm: self.algorithm,
                actions: a,
                min: 1,
            });
        }
        let o = &self.overrides;
        Ok(match self.algorithm {
            Algorithm::TsMaximin => Box::new(TsMaximin::new(a)),
            Algorithm::TsBorda => {
                let alpha = match o.alpha {
                    Some(alpha) => check_unit("alpha", alpha, 0.0, 0.5)?,
                    None => alpha_schedule(self.alpha_c, self.horizon)?,
                };
                Box::new(TsBorda::new(a, alpha))
            }
            Algorithm::SparringExp3p => {
                let params = match (o.beta, o.eta, o.gamma) {
                    (Some(beta), Some(eta), Some(gamma)) => Exp3pParams { beta, eta, gamma },
                    _ => {
                        let tuned = exp3p_hyperparams(a, self.horizon)?;
                        Exp3pParams {
                            beta: o.beta.unwrap_or(tuned.beta),
                            eta: o.eta.unwrap_or(tuned.eta),
                            gamma: o.gamma.unwrap_or(tuned.gamma),
                        }
                    }
                };
                check_unit("beta", params.beta, 0.0, 1.0)?;
                check_positive("eta", params.eta)?;
                check_open_unit("gamma", params.gamma)?;
                Box::new(SparringExp3p::new(a, params))
            }
            Algorithm::PartialMonitoring => {
                let params = match (o.eta, o.gamma) {
                    (Some(eta), Some(gamma)) => PmParams { eta, gamma },
                    _ => {
                        let tuned = pm_hyperparams(a, self.horizon)?;
                        PmParams {
                            eta: o.eta.unwrap_or(tuned.eta),
                            gamma: o.gamma.unwrap_or(tuned.gamma),
                        }
                    }
                };
                check_positive("eta", params.eta)?;
                check_open_unit("gamma", params.gamma)?;
                Box::new(PartialMonitoring::new(a, params))
            }
            Algorithm::Iss => Box::new(Iss::new(a)),
            Algorithm::Dts => {
                if !(self.a_dts > 0.5 && self.a_dts.is_finite()) {
                    return Err(HyperParamError::OutOfRange {
                        name: "a_dts",
                        value: self.a_dts,
                        expected: "a_dts > 0.5",
                    });
                }
                Box::new(Dts::new(a, self.a_dts))
            }
        })
    }
}

fn check_unit(name: &'static str, v: f64, lo: f64, hi: f64) -> Result<f64, HyperParamError> {
    if v.is_finite() && v >= lo && v < hi {
        Ok(v)
    } else {
        Err(HyperParamError::OutOfRange {
            name,
            value: v,
            expected: "within the admissible interval",
        })
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<f64, HyperParamError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(HyperParamError::OutOfRange {
            name,
            value: v,
            expected: "> 0",
        })
    }
}

fn check_open_unit(name: &'static str, v: f64) -> Result<f64, HyperParamError> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(HyperParamError::OutOfRange {
            name,
            value: v,
            expected: "0 < value < 1",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.tag().parse::<Algorithm>().unwrap(), a);
            let json = serde_json::to_string(&a).unwrap();
            assert_eq!(json, format!("\"{}\"", a.tag()));
        }
        assert!("ucb".parse::<Algorithm>().is_err());
    }

    #[test]
    fn build_checks_floors() {
        let err = PolicyConfig::new(Algorithm::PartialMonitoring, 10, 100)
            .build()
            .err()
            .unwrap();
        assert!(matches!(err, HyperParamError::HorizonTooSmall { .. }));
        assert!(PolicyConfig::new(Algorithm::PartialMonitoring, 10, 166).build().is_ok());
        let mut cfg = PolicyConfig::new(Algorithm::PartialMonitoring, 10, 100);
        cfg.overrides.eta = Some(0.01);
        cfg.overrides.gamma = Some(0.2);
        assert!(cfg.build().is_ok());
    }

    #[test]
    fn build_every_algorithm() {
        for a in Algorithm::ALL {
            let p = PolicyConfig::new(a, 10, 40_000).build().unwrap();
            assert_eq!(p.algorithm(), a);
            assert_eq!(p.actions(), 10);
        }
    }

    #[test]
    fn overrides_are_validated() {
        let mut cfg = PolicyConfig::new(Algorithm::TsBorda, 4, 1000);
        cfg.overrides.alpha = Some(0.7);
        assert!(cfg.build().is_err());
        let mut cfg = PolicyConfig::new(Algorithm::Dts, 4, 1000);
        cfg.a_dts = 0.4;
        assert!(cfg.build().is_err());
    }
}
