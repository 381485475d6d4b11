//! Regret definitions and regret bound curves.
//!
//! Per-step regret is computed from the full realized outcome matrix `X_t`,
//! including cells the learner never observes. All definitions are normalized
//! so that `|r_t| <= 1`. Realized regret can be negative; only its expectation
//! is nonnegative.

use std::f64::consts::{E, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::environment::{OutcomeMatrix, ScenarioKind};
use crate::policy::{
    alpha_schedule, exp3p_hyperparams, pm_hyperparams, Algorithm, Duel, HyperParamError,
};
use crate::preference::{borda_scores, maximin_winners, PreferenceMatrix};

/// Which notion of optimality the regret is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegretDefinition {
    /// `(1/2)(X_t(i*,I) - X_t(i*,i*) + X_t(i*,J) - X_t(i*,i*))`, `i*` the
    /// Maximin winner.
    #[serde(rename = "maximin-winner")]
    MaximinWinner,
    /// `(1/2)(X_t(i*,J) - X_t(I,J) + X_t(i*,I) - X_t(I,J))`, `i*` the Maximin
    /// winner.
    #[serde(rename = "maximin-duel")]
    MaximinDuel,
    /// `(1/2A) sum_k (2 X_t(i*,k) - X_t(I,k) - X_t(J,k))`, `i*` the Borda
    /// winner.
    #[serde(rename = "borda")]
    Borda,
}

impl RegretDefinition {
    pub const ALL: [RegretDefinition; 3] = [
        RegretDefinition::MaximinWinner,
        RegretDefinition::MaximinDuel,
        RegretDefinition::Borda,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            RegretDefinition::MaximinWinner => "maximin-winner",
            RegretDefinition::MaximinDuel => "maximin-duel",
            RegretDefinition::Borda => "borda",
        }
    }

    /// Definition under which `algorithm` is evaluated in a `scenario`.
    ///
    /// In the Condorcet scenario every learner is measured in its own sense
    /// (the baselines against the Condorcet, hence Maximin, winner). In the
    /// Borda scenario everyone is measured against the Borda winner.
    pub fn default_for(scenario: ScenarioKind, algorithm: Algorithm) -> Self {
        match scenario {
            ScenarioKind::Borda => RegretDefinition::Borda,
            ScenarioKind::Condorcet => match algorithm {
                Algorithm::TsBorda | Algorithm::PartialMonitoring => RegretDefinition::Borda,
                Algorithm::SparringExp3p => RegretDefinition::MaximinDuel,
                Algorithm::TsMaximin | Algorithm::Iss | Algorithm::Dts => {
                    RegretDefinition::MaximinWinner
                }
            },
        }
    }

    /// Lowest-index optimal action of `m` under this definition.
    pub fn reference_winner(self, m: &PreferenceMatrix) -> usize {
        match self {
            RegretDefinition::MaximinWinner | RegretDefinition::MaximinDuel => {
                maximin_winners(m)[0]
            }
            RegretDefinition::Borda => borda_scores(m).winners[0],
        }
    }

    /// Per-step regret of `duel` against `i_star` on the realized outcomes.
    pub fn instantaneous(self, o: &OutcomeMatrix, i_star: usize, duel: Duel) -> f64 {
        match self {
            RegretDefinition::MaximinWinner => {
                regret_maximin_winner_form(o, i_star, duel.first, duel.second)
            }
            RegretDefinition::MaximinDuel => {
                regret_maximin_duel_form(o, i_star, duel.first, duel.second)
            }
            RegretDefinition::Borda => regret_borda(o, i_star, duel.first, duel.second),
        }
    }
}

impl fmt::Display for RegretDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RegretDefinition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegretDefinition::ALL
            .into_iter()
            .find(|d| d.tag() == s)
            .ok_or_else(|| {
                format!("unknown regret definition `{s}` (expected maximin-winner, maximin-duel or borda)")
            })
    }
}

fn bit(o: &OutcomeMatrix, i: usize, j: usize) -> f64 {
    f64::from(o.get(i, j))
}

/// `(1/2)(X_t(i*,I) - X_t(i*,i*) + X_t(i*,J) - X_t(i*,i*))`; the diagonal bit
/// enters as drawn.
pub fn regret_maximin_winner_form(o: &OutcomeMatrix, i_star: usize, i: usize, j: usize) -> f64 {
    let d = bit(o, i_star, i_star);
    0.5 * (bit(o, i_star, i) - d + bit(o, i_star, j) - d)
}

/// `(1/2)(X_t(i*,J) - X_t(I,J) + X_t(i*,I) - X_t(I,J))`. Both subtracted terms
/// are the observed cell `X_t(I,J)`.
pub fn regret_maximin_duel_form(o: &OutcomeMatrix, i_star: usize, i: usize, j: usize) -> f64 {
    let seen = bit(o, i, j);
    0.5 * (bit(o, i_star, j) - seen + bit(o, i_star, i) - seen)
}

/// `(1/2A) sum_k (2 X_t(i*,k) - X_t(I,k) - X_t(J,k))`.
pub fn regret_borda(o: &OutcomeMatrix, i_star: usize, i: usize, j: usize) -> f64 {
    let a = o.size();
    let total = 2 * i64::from(o.row_sum(i_star)) - i64::from(o.row_sum(i)) - i64::from(o.row_sum(j));
    total as f64 / (2 * a) as f64
}

/// Running regret of one run under a fixed definition and reference winner.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    definition: RegretDefinition,
    i_star: usize,
    steps: u64,
    cumulative: f64,
    history: Option<Vec<f64>>,
}

impl RegretLedger {
    pub fn new(definition: RegretDefinition, i_star: usize) -> Self {
        Self {
            definition,
            i_star,
            steps: 0,
            cumulative: 0.0,
            history: None,
        }
    }

    /// Ledger that also keeps every per-step `r_t`.
    pub fn with_history(definition: RegretDefinition, i_star: usize) -> Self {
        Self {
            history: Some(Vec::new()),
            ..Self::new(definition, i_star)
        }
    }

    pub fn definition(&self) -> RegretDefinition {
        self.definition
    }

    pub fn reference_winner(&self) -> usize {
        self.i_star
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `R_t = sum_{s <= t} r_s`.
    pub fn cumulative(&self) -> f64 {
        self.cumulative
    }

    pub fn history(&self) -> Option<&[f64]> {
        self.history.as_deref()
    }

    /// Accounts one step and returns its `r_t`.
    pub fn record(&mut self, o: &OutcomeMatrix, duel: Duel) -> f64 {
        let r = self.definition.instantaneous(o, self.i_star, duel);
        self.steps += 1;
        self.cumulative += r;
        if let Some(h) = &mut self.history {
            h.push(r);
        }
        r
    }
}

/// Upper bounds on expected regret, one per learner with a guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegretBound {
    /// `(A / sqrt 2) sqrt(ln A) sqrt(t)`.
    #[serde(rename = "ts-maximin")]
    TsMaximin,
    /// `(c + sqrt((A / c) ln A)) t^(2/3)`.
    #[serde(rename = "ts-borda")]
    TsBorda,
    /// `(sqrt(A / ln A) + 4.2 sqrt(A ln A)) sqrt(t)`.
    #[serde(rename = "exp3p")]
    SparringExp3p,
    /// `2 (e - 2)^(1/4) sqrt(A sqrt(ln A)) t^(3/4)`.
    #[serde(rename = "pm")]
    PartialMonitoring,
}

impl RegretBound {
    pub const ALL: [RegretBound; 4] = [
        RegretBound::TsMaximin,
        RegretBound::TsBorda,
        RegretBound::SparringExp3p,
        RegretBound::PartialMonitoring,
    ];

    pub fn for_algorithm(algorithm: Algorithm) -> Option<Self> {
        match algorithm {
            Algorithm::TsMaximin => Some(RegretBound::TsMaximin),
            Algorithm::TsBorda => Some(RegretBound::TsBorda),
            Algorithm::SparringExp3p => Some(RegretBound::SparringExp3p),
            Algorithm::PartialMonitoring => Some(RegretBound::PartialMonitoring),
            Algorithm::Iss | Algorithm::Dts => None,
        }
    }

    pub fn algorithm(self) -> Algorithm {
        match self {
            RegretBound::TsMaximin => Algorithm::TsMaximin,
            RegretBound::TsBorda => Algorithm::TsBorda,
            RegretBound::SparringExp3p => Algorithm::SparringExp3p,
            RegretBound::PartialMonitoring => Algorithm::PartialMonitoring,
        }
    }

    /// Regret definition the bound is stated for.
    pub fn definition(self) -> RegretDefinition {
        match self {
            RegretBound::TsMaximin => RegretDefinition::MaximinWinner,
            RegretBound::SparringExp3p => RegretDefinition::MaximinDuel,
            RegretBound::TsBorda | RegretBound::PartialMonitoring => RegretDefinition::Borda,
        }
    }

    /// Bound for `algorithm` if it is stated for `definition`.
    pub fn applicable(algorithm: Algorithm, definition: RegretDefinition) -> Option<Self> {
        Self::for_algorithm(algorithm).filter(|b| b.definition() == definition)
    }

    pub fn tag(self) -> &'static str {
        self.algorithm().tag()
    }

    /// Closed-form value at time `t`; `c` is only read by the TS-Borda bound.
    pub fn value(self, actions: usize, t: f64, c: f64) -> f64 {
        let a = actions as f64;
        let ln_a = a.ln();
        match self {
            RegretBound::TsMaximin => a / SQRT_2 * ln_a.sqrt() * t.sqrt(),
            RegretBound::TsBorda => (c + (a / c * ln_a).sqrt()) * t.powf(2.0 / 3.0),
            RegretBound::SparringExp3p => ((a / ln_a).sqrt() + 4.2 * (a * ln_a).sqrt()) * t.sqrt(),
            RegretBound::PartialMonitoring => {
                2.0 * (E - 2.0).powf(0.25) * (a * ln_a.sqrt()).sqrt() * t.powf(0.75)
            }
        }
    }

    /// Checks that the bound's tuning is valid at `horizon`.
    pub fn check_floor(self, actions: usize, horizon: u64, c: f64) -> Result<(), HyperParamError> {
        match self {
            RegretBound::TsMaximin => Ok(()),
            RegretBound::TsBorda => alpha_schedule(c, horizon).map(|_| ()),
            RegretBound::SparringExp3p => exp3p_hyperparams(actions, horizon).map(|_| ()),
            RegretBound::PartialMonitoring => pm_hyperparams(actions, horizon).map(|_| ()),
        }
    }
}

impl fmt::Display for RegretBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A bound evaluated on a time grid for a fixed `(A, T, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub bound: RegretBound,
    pub actions: usize,
    pub horizon: u64,
    /// TS-Borda schedule constant; `None` for the other bounds.
    pub c: Option<f64>,
    pub grid: Vec<u64>,
    pub values: Vec<f64>,
}

/// Evaluates `bound` on `grid`. The horizon is the last grid point and must
/// meet the bound's floor.
pub fn bound_curve(
    bound: RegretBound,
    actions: usize,
    grid: &[u64],
    c: f64,
) -> Result<BoundCurve, HyperParamError> {
    if actions < 2 {
        return Err(HyperParamError::TooFewActions {
            algorithm: bound.algorithm(),
            actions,
            min: 2,
        });
    }
    let horizon = grid.last().copied().unwrap_or(0);
    bound.check_floor(actions, horizon, c)?;
    Ok(BoundCurve {
        bound,
        actions,
        horizon,
        c: (bound == RegretBound::TsBorda).then_some(c),
        grid: grid.to_vec(),
        values: grid.iter().map(|&t| bound.value(actions, t as f64, c)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn outcomes(rows: &[&[u8]]) -> OutcomeMatrix {
        OutcomeMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn maximin_winner_form_examples() {
        let o = outcomes(&[&[1, 0, 1], &[1, 0, 0], &[0, 1, 1]]);
        assert_eq!(regret_maximin_winner_form(&o, 0, 0, 0), 0.0);
        let o = outcomes(&[&[0, 1, 1], &[0, 0, 0], &[0, 1, 1]]);
        assert_eq!(regret_maximin_winner_form(&o, 0, 1, 2), 1.0);
        let o = outcomes(&[&[1, 0, 0], &[1, 0, 0], &[1, 1, 1]]);
        assert_eq!(regret_maximin_winner_form(&o, 0, 1, 2), -1.0);
    }

    #[test]
    fn maximin_duel_form_examples() {
        for b in [0, 1] {
            let o = outcomes(&[&[b, 1], &[0, 1]]);
            assert_eq!(regret_maximin_duel_form(&o, 0, 0, 0), 0.0);
        }
        // i* = 0, I = 1, J = 2.
        let o = outcomes(&[&[0, 1, 1], &[0, 1, 0], &[0, 1, 0]]);
        assert_eq!(regret_maximin_duel_form(&o, 0, 1, 2), 1.0);
        let o = outcomes(&[&[0, 0, 0], &[1, 1, 1], &[1, 0, 0]]);
        assert_eq!(regret_maximin_duel_form(&o, 0, 1, 2), -1.0);
    }

    #[test]
    fn borda_examples() {
        let o = outcomes(&[&[0, 1], &[0, 1]]);
        assert_eq!(regret_borda(&o, 0, 1, 1), 0.0);
        assert_eq!(regret_borda(&o, 0, 0, 0), 0.0);
        let o = outcomes(&[&[1, 1], &[0, 0]]);
        assert_eq!(regret_borda(&o, 0, 1, 1), 1.0);
    }

    #[test]
    fn ledger_accumulates() {
        let o = outcomes(&[&[1, 1], &[0, 0]]);
        let mut ledger = RegretLedger::with_history(RegretDefinition::Borda, 0);
        ledger.record(&o, Duel::new(1, 1));
        ledger.record(&o, Duel::new(0, 1));
        assert_eq!(ledger.history().unwrap(), &[1.0, 0.5]);
        assert_eq!(ledger.cumulative(), 1.5);
        assert_eq!(ledger.steps(), 2);
    }

    #[test]
    fn bound_values_at_reference_point() {
        let t = 40_000.0;
        let cases = [
            (RegretBound::TsMaximin, 2_145.966_026_945_7),
            (RegretBound::TsBorda, 6_781.997_054_066),
            (RegretBound::SparringExp3p, 4_447.556_146_924),
            (RegretBound::PartialMonitoring, 20_286.290_693_57),
        ];
        for (bound, expected) in cases {
            let v = bound.value(10, t, 1.0);
            assert!((v - expected).abs() < 1e-6 * expected, "{bound}: {v}");
        }
    }

    #[test]
    fn bound_curve_rejects_short_horizons() {
        let grid: Vec<u64> = (1..=10).collect();
        assert!(bound_curve(RegretBound::TsMaximin, 2, &grid, 1.0).is_ok());
        assert!(bound_curve(RegretBound::SparringExp3p, 2, &grid, 1.0).is_err());
        assert!(bound_curve(RegretBound::PartialMonitoring, 10, &[100], 1.0).is_err());
        assert!(bound_curve(RegretBound::PartialMonitoring, 10, &[166], 1.0).is_ok());
    }

    #[test]
    fn applicability_follows_definition() {
        assert_eq!(
            RegretBound::applicable(Algorithm::PartialMonitoring, RegretDefinition::Borda),
            Some(RegretBound::PartialMonitoring)
        );
        assert_eq!(
            RegretBound::applicable(Algorithm::SparringExp3p, RegretDefinition::Borda),
            None
        );
        assert_eq!(RegretBound::applicable(Algorithm::Dts, RegretDefinition::MaximinWinner), None);
        for a in Algorithm::ALL {
            let d = RegretDefinition::default_for(ScenarioKind::Condorcet, a);
            if let Some(b) = RegretBound::for_algorithm(a) {
                assert_eq!(b.definition(), d);
            }
        }
    }

    fn outcome_strategy() -> impl Strategy<Value = (OutcomeMatrix, usize, usize, usize)> {
        (1usize..7).prop_flat_map(|a| {
            (
                proptest::collection::vec(proptest::collection::vec(0u8..2, a), a),
                0..a,
                0..a,
                0..a,
            )
                .prop_map(move |(mut rows, s, i, j)| {
                    #[allow(clippy::needless_range_loop)]
                    for r in 0..a {
                        for c in 0..r {
                            rows[r][c] = 1 - rows[c][r];
                        }
                    }
                    (OutcomeMatrix::from_rows(&rows).unwrap(), s, i, j)
                })
        })
    }

    proptest! {
        #[test]
        fn regret_is_normalized((o, s, i, j) in outcome_strategy()) {
            for d in RegretDefinition::ALL {
                let r = d.instantaneous(&o, s, Duel::new(i, j));
                prop_assert!(r.abs() <= 1.0, "{d}: {r}");
            }
        }

        #[test]
        fn bounds_monotone(a in 2usize..64, t in 1u64..1_000_000, c in 0.1f64..10.0) {
            for b in RegretBound::ALL {
                let v = b.value(a, t as f64, c);
                prop_assert!(v <= b.value(a, (t + 1) as f64, c));
                prop_assert!(v <= b.value(a + 1, t as f64, c));
            }
        }
    }
}
