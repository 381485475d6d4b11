use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution};

use crate::policy::{Algorithm, Duel, DuelingPolicy};

/// Self-sparring over one `Beta(1, 1)` prior per action: each seat draws a
/// value for every action from the shared posterior and plays the argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Iss {
    wins: Vec<f64>,
    losses: Vec<f64>,
}

impl Iss {
    pub fn new(actions: usize) -> Self {
        Self {
            wins: vec![0.0; actions],
            losses: vec![0.0; actions],
        }
    }

    pub fn wins(&self) -> &[f64] {
        &self.wins
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    /// Posterior mean of action `n`'s win probability.
    pub fn mean(&self, n: usize) -> f64 {
        (self.wins[n] + 1.0) / (self.wins[n] + self.losses[n] + 2.0)
    }

    fn draw_argmax<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for n in 0..self.wins.len() {
            let theta = Beta::new(self.wins[n] + 1.0, self.losses[n] + 1.0)
                .expect("beta parameters are at least 1")
                .sample(rng);
            if theta > best_val {
                best = n;
                best_val = theta;
            }
        }
        best
    }

    pub fn select_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Duel {
        let first = self.draw_argmax(rng);
        let second = self.draw_argmax(rng);
        Duel::new(first, second)
    }
}

impl DuelingPolicy for Iss {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Iss
    }

    fn actions(&self) -> usize {
        self.wins.len()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Duel {
        self.select_with(rng)
    }

    /// A self-duel is a fair coin and teaches nothing about either action.
    fn update(&mut self, duel: Duel, outcome: u8) {
        if duel.is_self_duel() {
            return;
        }
        let (winner, loser) = if outcome == 1 {
            (duel.first, duel.second)
        } else {
            (duel.second, duel.first)
        };
        self.wins[winner] += 1.0;
        self.losses[loser] += 1.0;
    }

    fn reset(&mut self) {
        self.wins.fill(0.0);
        self.losses.fill(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn conjugate_update() {
        let mut iss = Iss::new(3);
        iss.update(Duel::new(0, 1), 1);
        assert!((iss.mean(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((iss.mean(1) - 1.0 / 3.0).abs() < 1e-15);
        iss.update(Duel::new(2, 2), 1);
        assert_eq!(iss.wins()[2] + iss.losses()[2], 0.0);
    }

    #[test]
    fn fresh_state_selects_uniformly() {
        let mut iss = Iss::new(4);
        let mut rng = stream(12, 0);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            counts[iss.select_with(&mut rng).first] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.25).abs() < 0.05, "{counts:?}");
        }
    }
}
