//! Thompson sampling over independent pairwise Beta posteriors.

use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution};

use super::{Algorithm, Duel, DuelingPolicy};

/// Independent `Beta(1, 1)` priors on every off-diagonal `X(i, j)`, updated
/// with observed duel outcomes. Counts are stored for both orientations and
/// kept mirrored: `wins(i, j) == losses(j, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPosterior {
    actions: usize,
    wins: Vec<f64>,
    losses: Vec<f64>,
}

impl BetaPosterior {
    pub fn new(actions: usize) -> Self {
        Self {
            actions,
            wins: vec![0.0; actions * actions],
            losses: vec![0.0; actions * actions],
        }
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn wins(&self, i: usize, j: usize) -> f64 {
        self.wins[i * self.actions + j]
    }

    pub fn losses(&self, i: usize, j: usize) -> f64 {
        self.losses[i * self.actions + j]
    }

    /// Sets the counts for `(i, j)` and mirrors them onto `(j, i)`.
    pub fn set_counts(&mut self, i: usize, j: usize, wins: f64, losses: f64) {
        assert!(i != j, "diagonal carries no posterior");
        let a = self.actions;
        self.wins[i * a + j] = wins;
        self.losses[i * a + j] = losses;
        self.wins[j * a + i] = losses;
        self.losses[j * a + i] = wins;
    }

    /// Records `outcome = X_t(i, j)`. Self-duels are ignored.
    pub fn observe(&mut self, i: usize, j: usize, outcome: u8) {
        if i == j {
            return;
        }
        let a = self.actions;
        if outcome == 1 {
            self.wins[i * a + j] += 1.0;
            self.losses[j * a + i] += 1.0;
        } else {
            self.losses[i * a + j] += 1.0;
            self.wins[j * a + i] += 1.0;
        }
    }

    /// Posterior parameters `(wins + 1, losses + 1)` for the pair.
    pub fn params(&self, i: usize, j: usize) -> (f64, f64) {
        (self.wins(i, j) + 1.0, self.losses(i, j) + 1.0)
    }

    /// Posterior mean of `X(i, j)`.
    pub fn mean(&self, i: usize, j: usize) -> f64 {
        let (a, b) = self.params(i, j);
        a / (a + b)
    }

    pub fn reset(&mut self) {
        self.wins.fill(0.0);
        self.losses.fill(0.0);
    }

    fn beta(&self, i: usize, j: usize) -> Beta<f64> {
        let (a, b) = self.params(i, j);
        Beta::new(a, b).expect("beta parameters are at least 1")
    }
}

/// Draws one matrix from the posterior into `out` (row-major `A x A`):
/// `out(i,j) ~ Beta` for `i < j`, `out(j,i) = 1 - out(i,j)`, diagonal 0.5.
pub fn ts_sample_matrix_into<R: Rng + ?Sized>(post: &BetaPosterior, rng: &mut R, out: &mut Vec<f64>) {
    let a = post.actions;
    out.clear();
    out.resize(a * a, 0.5);
    for i in 0..a {
        for j in (i + 1)..a {
            let s = post.beta(i, j).sample(rng);
            out[i * a + j] = s;
            out[j * a + i] = 1.0 - s;
        }
    }
}

pub fn ts_sample_matrix<R: Rng + ?Sized>(post: &BetaPosterior, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    ts_sample_matrix_into(post, rng, &mut out);
    out
}

/// `argmax_i min_j sample(i, j)` with the diagonal included; lowest index wins ties.
pub fn maximin_choice(sample: &[f64], actions: usize) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, row) in sample.chunks_exact(actions).enumerate() {
        let m = row.iter().copied().fold(f64::INFINITY, f64::min);
        if m > best_val {
            best = i;
            best_val = m;
        }
    }
    best
}

/// `argmax_i sum_j sample(i, j)`; lowest index wins ties.
pub fn row_sum_choice(sample: &[f64], actions: usize) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, row) in sample.chunks_exact(actions).enumerate() {
        let s: f64 = row.iter().sum();
        if s > best_val {
            best = i;
            best_val = s;
        }
    }
    best
}

/// Thompson sampling towards the Maximin winner: each player acts
/// maximin-optimally under its own independent posterior draw.
#[derive(Debug, Clone)]
pub struct TsMaximin {
    posterior: BetaPosterior,
    scratch: Vec<f64>,
}

impl TsMaximin {
    pub fn new(actions: usize) -> Self {
        Self {
            posterior: BetaPosterior::new(actions),
            scratch: Vec::new(),
        }
    }

    pub fn posterior(&self) -> &BetaPosterior {
        &self.posterior
    }

    pub fn posterior_mut(&mut self) -> &mut BetaPosterior {
        &mut self.posterior
    }

    pub fn select_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Duel {
        let a = self.posterior.actions;
        ts_sample_matrix_into(&self.posterior, rng, &mut self.scratch);
        let first = maximin_choice(&self.scratch, a);
        ts_sample_matrix_into(&self.posterior, rng, &mut self.scratch);
        let second = maximin_choice(&self.scratch, a);
        Duel::new(first, second)
    }
}

impl DuelingPolicy for TsMaximin {
    fn algorithm(&self) -> Algorithm {
        Algorithm::TsMaximin
    }

    fn actions(&self) -> usize {
        self.posterior.actions
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Duel {
        self.select_with(rng)
    }

    fn update(&mut self, duel: Duel, outcome: u8) {
        self.posterior.observe(duel.first, duel.second, outcome);
    }

    fn reset(&mut self) {
        self.posterior.reset();
    }
}

/// Thompson sampling towards the Borda winner with uniform exploration at
/// rate `alpha`.
#[derive(Debug, Clone)]
pub struct TsBorda {
    posterior: BetaPosterior,
    alpha: f64,
    scratch: Vec<f64>,
    last_explored: bool,
}

impl TsBorda {
    pub fn new(actions: usize, alpha: f64) -> Self {
        Self {
            posterior: BetaPosterior::new(actions),
            alpha,
            scratch: Vec::new(),
            last_explored: false,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn posterior(&self) -> &BetaPosterior {
        &self.posterior
    }

    pub fn posterior_mut(&mut self) -> &mut BetaPosterior {
        &mut self.posterior
    }

    /// Whether the most recent selection took the exploration branch.
    pub fn last_explored(&self) -> bool {
        self.last_explored
    }

    /// The exploration coin is always drawn, so exploit-path variates line up
    /// across runs that differ only in `alpha`.
    pub fn select_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (Duel, bool) {
        let a = self.posterior.actions;
        let explore = rng.random::<f64>() < self.alpha;
        self.last_explored = explore;
        if explore {
            let first = rng.random_range(0..a);
            let second = rng.random_range(0..a);
            return (Duel::new(first, second), true);
        }
        ts_sample_matrix_into(&self.posterior, rng, &mut self.scratch);
        let first = row_sum_choice(&self.scratch, a);
        ts_sample_matrix_into(&self.posterior, rng, &mut self.scratch);
        let second = row_sum_choice(&self.scratch, a);
        (Duel::new(first, second), false)
    }
}

impl DuelingPolicy for TsBorda {
    fn algorithm(&self) -> Algorithm {
        Algorithm::TsBorda
    }

    fn actions(&self) -> usize {
        self.posterior.actions
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Duel {
        self.select_with(rng).0
    }

    fn update(&mut self, duel: Duel, outcome: u8) {
        self.posterior.observe(duel.first, duel.second, outcome);
    }

    fn reset(&mut self) {
        self.posterior.reset();
        self.last_explored = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn conjugate_update() {
        let mut p = BetaPosterior::new(3);
        p.observe(0, 1, 1);
        assert_eq!(p.params(0, 1), (2.0, 1.0));
        assert!((p.mean(0, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.params(1, 0), (1.0, 2.0));
    }

    #[test]
    fn self_duel_is_ignored() {
        let mut p = BetaPosterior::new(3);
        p.observe(0, 0, 1);
        assert_eq!(p, BetaPosterior::new(3));
    }

    #[test]
    fn mirrored_increments() {
        let mut p = BetaPosterior::new(2);
        p.observe(0, 1, 0);
        p.observe(1, 0, 1);
        assert_eq!(p.wins(1, 0), 2.0);
        assert_eq!(p.losses(1, 0), 0.0);
        assert_eq!(p.losses(0, 1), 2.0);
    }

    #[test]
    fn sampled_matrix_is_complementary() {
        let mut p = BetaPosterior::new(4);
        p.observe(0, 2, 1);
        let mut rng = stream(3, 0);
        for _ in 0..100 {
            let s = ts_sample_matrix(&p, &mut rng);
            for i in 0..4 {
                assert_eq!(s[i * 4 + i], 0.5);
                for j in 0..4 {
                    if i != j {
                        assert_eq!(s[i * 4 + j] + s[j * 4 + i], 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn beta_two_one_mean() {
        let mut p = BetaPosterior::new(2);
        p.set_counts(0, 1, 1.0, 0.0);
        let mut rng = stream(4, 0);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| ts_sample_matrix(&p, &mut rng)[1]).sum::<f64>() / n as f64;
        assert!((mean - 2.0 / 3.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn choices_break_ties_low() {
        let s = vec![0.5; 9];
        assert_eq!(maximin_choice(&s, 3), 0);
        assert_eq!(row_sum_choice(&s, 3), 0);
        let s = vec![0.5, 0.6, 0.2, 0.4, 0.5, 0.9, 0.8, 0.1, 0.5];
        assert_eq!(maximin_choice(&s, 3), 1);
        assert_eq!(row_sum_choice(&s, 3), 1);
    }

    #[test]
    fn single_action() {
        let mut ts = TsMaximin::new(1);
        assert_eq!(ts.select_with(&mut stream(0, 0)), Duel::new(0, 0));
    }

    #[test]
    fn zero_alpha_never_explores() {
        let mut ts = TsBorda::new(4, 0.0);
        let mut rng = stream(5, 0);
        for _ in 0..1000 {
            assert!(!ts.select_with(&mut rng).1);
        }
    }

    #[test]
    fn concentrated_maximin_posterior_picks_winner() {
        let mut ts = TsMaximin::new(3);
        for j in 1..3 {
            ts.posterior_mut().set_counts(0, j, 999.0, 1.0);
        }
        let mut rng = stream(6, 0);
        let hits = (0..1000)
            .filter(|_| ts.select_with(&mut rng) == Duel::new(0, 0))
            .count();
        assert!(hits >= 950, "{hits}");
    }
}
