//! Sparring exponential weights with optimistic importance weighting.
//!
//! Two independent forecasters, one per duel seat, each run exponential
//! weights mixed with uniform exploration. The row player `p` is rewarded
//! with `X_t(I, J)`, the column player `q` with `X_t(J, I)`.

use rand::{Rng, RngCore};

use super::weights::MixedWeights;
use super::{Algorithm, Duel, DuelingPolicy, Exp3pParams, WeightsSnapshot};

/// Importance-weighted gain estimates for both players:
///
/// `x_p(i) = (X_t(i, J) 1(i = I) + beta) / p(i)` and
/// `x_q(j) = (X_t(j, I) 1(j = J) + beta) / q(j)`,
///
/// where `X_t(J, I) = 1 - outcome` unless `I = J`, in which case both seats
/// observe the same diagonal cell.
pub fn exp3p_estimates(
    outcome: u8,
    duel: Duel,
    p: &[f64],
    q: &[f64],
    beta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut xp = vec![0.0; p.len()];
    let mut xq = vec![0.0; q.len()];
    fill_estimates(outcome, duel, p, q, beta, &mut xp, &mut xq);
    (xp, xq)
}

fn fill_estimates(
    outcome: u8,
    duel: Duel,
    p: &[f64],
    q: &[f64],
    beta: f64,
    xp: &mut [f64],
    xq: &mut [f64],
) {
    let forward = f64::from(outcome);
    let reverse = if duel.is_self_duel() {
        forward
    } else {
        1.0 - forward
    };
    for (i, (x, &pi)) in xp.iter_mut().zip(p).enumerate() {
        let hit = if i == duel.first { forward } else { 0.0 };
        *x = (hit + beta) / pi;
    }
    for (j, (x, &qj)) in xq.iter_mut().zip(q).enumerate() {
        let hit = if j == duel.second { reverse } else { 0.0 };
        *x = (hit + beta) / qj;
    }
}

#[derive(Debug, Clone)]
pub struct SparringExp3p {
    params: Exp3pParams,
    row: MixedWeights,
    col: MixedWeights,
    est_p: Vec<f64>,
    est_q: Vec<f64>,
    max_estimate: f64,
}

impl SparringExp3p {
    pub fn new(actions: usize, params: Exp3pParams) -> Self {
        Self {
            params,
            row: MixedWeights::uniform(actions, params.gamma),
            col: MixedWeights::uniform(actions, params.gamma),
            est_p: vec![0.0; actions],
            est_q: vec![0.0; actions],
            max_estimate: 0.0,
        }
    }

    pub fn params(&self) -> Exp3pParams {
        self.params
    }

    pub fn p(&self) -> &[f64] {
        self.row.probs()
    }

    pub fn q(&self) -> &[f64] {
        self.col.probs()
    }

    /// Estimates used by the latest update.
    pub fn last_estimates(&self) -> (&[f64], &[f64]) {
        (&self.est_p, &self.est_q)
    }

    /// Draws `I ~ p` then `J ~ q`, independently.
    pub fn select_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Duel {
        let first = self.row.sample(rng);
        let second = self.col.sample(rng);
        Duel::new(first, second)
    }

    /// Applies the log-weight update with externally supplied estimates.
    pub fn apply_estimates(&mut self, xp: &[f64], xq: &[f64]) {
        self.row.apply_gains(self.params.eta, xp);
        self.col.apply_gains(self.params.eta, xq);
    }
}

impl DuelingPolicy for SparringExp3p {
    fn algorithm(&self) -> Algorithm {
        Algorithm::SparringExp3p
    }

    fn actions(&self) -> usize {
        self.est_p.len()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Duel {
        self.select_with(rng)
    }

    fn update(&mut self, duel: Duel, outcome: u8) {
        fill_estimates(
            outcome,
            duel,
            self.row.probs(),
            self.col.probs(),
            self.params.beta,
            &mut self.est_p,
            &mut self.est_q,
        );
        self.max_estimate = self
            .est_p
            .iter()
            .chain(&self.est_q)
            .copied()
            .fold(0.0, f64::max);
        self.row.apply_gains(self.params.eta, &self.est_p);
        self.col.apply_gains(self.params.eta, &self.est_q);
    }

    fn reset(&mut self) {
        *self = Self::new(self.est_p.len(), self.params);
    }

    fn weights(&self) -> Option<WeightsSnapshot<'_>> {
        let a = self.est_p.len() as f64;
        Some(WeightsSnapshot {
            p: self.row.probs(),
            q: Some(self.col.probs()),
            log_weights_p: self.row.log_weights(),
            log_weights_q: Some(self.col.log_weights()),
            gamma: self.params.gamma,
            max_estimate: self.max_estimate,
            estimate_cap: (1.0 + self.params.beta) * a / self.params.gamma,
        })
    }
}
