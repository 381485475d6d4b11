use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution};

use crate::policy::{ts_sample_matrix_into, Algorithm, BetaPosterior, Duel, DuelingPolicy};
use crate::preference::argmax_set;

/// Default confidence-radius constant.
pub const DEFAULT_A_DTS: f64 = 0.51;

/// Empirical means and confidence bounds over ordered pairs at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DtsBounds {
    actions: usize,
    pub mean: Vec<f64>,
    pub radius: Vec<f64>,
}

impl DtsBounds {
    /// `mean(i,j) = wins / (wins + losses)` (0.5 without data) and
    /// `radius(i,j) = sqrt(a ln t / max(1, wins + losses))`. The diagonal is
    /// pinned to mean 0.5 with zero radius.
    pub fn new(post: &BetaPosterior, a_dts: f64, t: u64) -> Self {
        let a = post.actions();
        let mut mean = vec![0.5; a * a];
        let mut radius = vec![0.0; a * a];
        for i in 0..a {
            for j in 0..a {
                if i == j {
                    continue;
                }
                let n = post.wins(i, j) + post.losses(i, j);
                if n > 0.0 {
                    mean[i * a + j] = post.wins(i, j) / n;
                }
                radius[i * a + j] = confidence_radius(a_dts, t, n);
            }
        }
        Self {
            actions: a,
            mean,
            radius,
        }
    }

    pub fn upper(&self, i: usize, j: usize) -> f64 {
        let k = i * self.actions + j;
        self.mean[k] + self.radius[k]
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        let k = i * self.actions + j;
        self.mean[k] - self.radius[k]
    }

    /// Optimistic Copeland counts `|{j != i : upper(i, j) > 0.5}|`.
    pub fn upper_copeland(&self) -> Vec<usize> {
        (0..self.actions)
            .map(|i| {
                (0..self.actions)
                    .filter(|&j| j != i && self.upper(i, j) > 0.5)
                    .count()
            })
            .collect()
    }
}

/// `sqrt(a ln t / max(1, n))`.
pub fn confidence_radius(a_dts: f64, t: u64, n: f64) -> f64 {
    (a_dts * (t.max(1) as f64).ln() / n.max(1.0)).sqrt()
}

/// Double Thompson sampling over pairwise Beta posteriors, pruned by
/// confidence bounds and aimed at the Copeland winner.
///
/// The first seat is the optimistic-Copeland candidate with the most sampled
/// pairwise wins. The second seat is the strongest sampled challenger of the
/// first among actions not yet confidently beaten by it; the first seat
/// itself competes with value 0.5, so once every challenger is sampled below
/// 0.5 the learner duels its candidate against itself.
#[derive(Debug, Clone)]
pub struct Dts {
    posterior: BetaPosterior,
    a_dts: f64,
    steps: u64,
    scratch: Vec<f64>,
}

impl Dts {
    pub fn new(actions: usize, a_dts: f64) -> Self {
        Self {
            posterior: BetaPosterior::new(actions),
            a_dts,
            steps: 0,
            scratch: Vec::new(),
        }
    }

    pub fn posterior(&self) -> &BetaPosterior {
        &self.posterior
    }

    pub fn a_dts(&self) -> f64 {
        self.a_dts
    }

    /// Optimistic-Copeland candidates for the first seat at time `t`.
    pub fn candidates(&self, t: u64) -> Vec<usize> {
        let bounds = DtsBounds::new(&self.posterior, self.a_dts, t);
        argmax_set(&bounds.upper_copeland())
    }

    /// Selection at explicit time `t >= 1`.
    pub fn select_at<R: Rng + ?Sized>(&mut self, t: u64, rng: &mut R) -> Duel {
        let a = self.posterior.actions();
        let bounds = DtsBounds::new(&self.posterior, self.a_dts, t);
        let candidates = argmax_set(&bounds.upper_copeland());

        ts_sample_matrix_into(&self.posterior, rng, &mut self.scratch);
        let sampled_wins = |i: usize| {
            (0..a)
                .filter(|&j| j != i && self.scratch[i * a + j] > 0.5)
                .count()
        };
        let mut first = candidates[0];
        let mut best = sampled_wins(first);
        for &c in &candidates[1..] {
            let w = sampled_wins(c);
            if w > best {
                first = c;
                best = w;
            }
        }

        // Challenger draw: theta(j, first) for every j != first in index
        // order; the candidate itself competes with 0.5.
        let mut second = None::<(usize, f64)>;
        for j in 0..a {
            let theta = if j == first {
                0.5
            } else {
                let (wins, losses) = self.posterior.params(j, first);
                Beta::new(wins, losses)
                    .expect("beta parameters are at least 1")
                    .sample(rng)
            };
            let eligible = j == first || bounds.lower(j, first) <= 0.5;
            if eligible && second.is_none_or(|(_, best)| theta > best) {
                second = Some((j, theta));
            }
        }
        let second = second.map_or(first, |(j, _)| j);
        Duel::new(first, second)
    }
}

impl DuelingPolicy for Dts {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Dts
    }

    fn actions(&self) -> usize {
        self.posterior.actions()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Duel {
        self.steps += 1;
        let t = self.steps;
        self.select_at(t, rng)
    }

    fn update(&mut self, duel: Duel, outcome: u8) {
        self.posterior.observe(duel.first, duel.second, outcome);
    }

    fn reset(&mut self) {
        self.posterior.reset();
        self.steps = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn radius_examples() {
        assert_eq!(confidence_radius(0.51, 1, 0.0), 0.0);
        assert!((confidence_radius(0.51, 100, 4.0) - 0.766_263_139_341_493_9).abs() < 1e-6);
    }

    #[test]
    fn fresh_state_everyone_is_a_candidate() {
        let dts = Dts::new(5, DEFAULT_A_DTS);
        assert_eq!(dts.candidates(1), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn candidate_set_never_empty() {
        let mut dts = Dts::new(4, DEFAULT_A_DTS);
        let mut rng = stream(13, 0);
        for t in 1..=500u64 {
            assert!(!dts.candidates(t).is_empty());
            let d = dts.select(&mut rng);
            dts.update(d, u8::from(d.first <= d.second));
        }
    }

    #[test]
    fn confidently_beaten_challengers_are_pruned() {
        let mut dts = Dts::new(3, DEFAULT_A_DTS);
        // Action 0 has crushed action 1 and barely met action 2.
        dts.posterior.set_counts(0, 1, 200.0, 0.0);
        dts.posterior.set_counts(0, 2, 1.0, 1.0);
        dts.posterior.set_counts(1, 2, 0.0, 200.0);
        let mut rng = stream(14, 0);
        for _ in 0..200 {
            let d = dts.select_at(100, &mut rng);
            if d.first == 0 {
                assert_ne!(d.second, 1);
            }
        }
    }
}
