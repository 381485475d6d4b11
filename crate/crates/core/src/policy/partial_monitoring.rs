//! Partial-monitoring forecaster over Borda scores.
//!
//! Both seats are drawn from one distribution `p`. The only observed cell
//! `X_t(I, J)` gives an unbiased estimate of every action's realized Borda
//! score `g_t(i) = (1/A) sum_k X_t(i, k)`.

use rand::{Rng, RngCore};

use super::weights::MixedWeights;
use super::{Algorithm, Duel, DuelingPolicy, PmParams, WeightsSnapshot};

/// `g(i) = (1/A) X_t(I, J) 1(i = I) / (p(I) p(J))`.
pub fn pm_estimate(outcome: u8, duel: Duel, p: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; p.len()];
    fill_estimate(outcome, duel, p, &mut g);
    g
}

fn fill_estimate(outcome: u8, duel: Duel, p: &[f64], g: &mut [f64]) {
    g.fill(0.0);
    let a = p.len() as f64;
    g[duel.first] = f64::from(outcome) / (a * p[duel.first] * p[duel.second]);
}

#[derive(Debug, Clone)]
pub struct PartialMonitoring {
    params: PmParams,
    weights: MixedWeights,
    estimate: Vec<f64>,
}

impl PartialMonitoring {
    pub fn new(actions: usize, params: PmParams) -> Self {
        Self {
            params,
            weights: MixedWeights::uniform(actions, params.gamma),
            estimate: vec![0.0; actions],
        }
    }

    pub fn params(&self) -> PmParams {
        self.params
    }

    pub fn p(&self) -> &[f64] {
        self.weights.probs()
    }

    pub fn last_estimate(&self) -> &[f64] {
        &self.estimate
    }

    /// Draws `I` and `J` independently from `p`; `I = J` is allowed.
    pub fn select_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Duel {
        let first = self.weights.sample(rng);
        let second = self.weights.sample(rng);
        Duel::new(first, second)
    }

    pub fn apply_estimate(&mut self, g: &[f64]) {
        self.weights.apply_gains(self.params.eta, g);
    }
}

impl DuelingPolicy for PartialMonitoring {
    fn algorithm(&self) -> Algorithm {
        Algorithm::PartialMonitoring
    }

    fn actions(&self) -> usize {
        self.estimate.len()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Duel {
        self.select_with(rng)
    }

    fn update(&mut self, duel: Duel, outcome: u8) {
        fill_estimate(outcome, duel, self.weights.probs(), &mut self.estimate);
        self.weights.apply_gains(self.params.eta, &self.estimate);
    }

    fn reset(&mut self) {
        *self = Self::new(self.estimate.len(), self.params);
    }

    fn weights(&self) -> Option<WeightsSnapshot<'_>> {
        let a = self.estimate.len() as f64;
        Some(WeightsSnapshot {
            p: self.weights.probs(),
            q: None,
            log_weights_p: self.weights.log_weights(),
            log_weights_q: None,
            gamma: self.params.gamma,
            max_estimate: self.estimate.iter().copied().fold(0.0, f64::max),
            estimate_cap: a / (self.params.gamma * self.params.gamma),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn estimate_examples() {
        let g = pm_estimate(1, Duel::new(1, 3), &[0.25; 4]);
        assert_eq!(g, vec![0.0, 4.0, 0.0, 0.0]);
        let g = pm_estimate(0, Duel::new(1, 3), &[0.25; 4]);
        assert_eq!(g, vec![0.0; 4]);
    }

    #[test]
    fn zero_estimate_leaves_p_unchanged() {
        let mut pm = PartialMonitoring::new(
            3,
            PmParams {
                eta: 0.3,
                gamma: 0.2,
            },
        );
        pm.apply_estimate(&[0.0; 3]);
        assert!(pm.p().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn mirrors_exp3p_update_algebra() {
        let mut pm = PartialMonitoring::new(
            2,
            PmParams {
                eta: 0.5,
                gamma: 0.1,
            },
        );
        pm.apply_estimate(&[2.0, 0.0]);
        assert!((pm.p()[0] - 0.707_952_720_767_004_4).abs() < 1e-9);
        assert!((pm.p()[1] - 0.292_047_279_232_995_6).abs() < 1e-9);
    }

    #[test]
    fn self_duel_frequency_under_uniform_p() {
        let mut pm = PartialMonitoring::new(
            3,
            PmParams {
                eta: 0.1,
                gamma: 0.5,
            },
        );
        let mut rng = stream(10, 0);
        let n = 100_000;
        let same = (0..n).filter(|_| pm.select_with(&mut rng).is_self_duel()).count();
        let freq = same as f64 / n as f64;
        assert!((freq - 1.0 / 3.0).abs() < 0.01, "{freq}");
    }
}
