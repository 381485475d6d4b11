//! Log-domain exponential weights mixed with the uniform distribution.

use rand::Rng;

/// Exponential weights kept as logarithms, re-centred so the largest is zero.
/// The mixed distribution is `p = (1 - gamma) softmax(log_w) + gamma / A`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedWeights {
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    gamma: f64,
}

impl MixedWeights {
    /// Unit weights, hence the uniform distribution.
    pub fn uniform(actions: usize, gamma: f64) -> Self {
        Self {
            log_weights: vec![0.0; actions],
            probs: vec![1.0 / actions as f64; actions],
            gamma,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Log-weights relative to the current maximum.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `log_w(i) += eta * gains(i)` followed by renormalization.
    pub fn apply_gains(&mut self, eta: f64, gains: &[f64]) {
        debug_assert_eq!(gains.len(), self.log_weights.len());
        for (lw, g) in self.log_weights.iter_mut().zip(gains) {
            *lw += eta * g;
        }
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (lw, p) in self.log_weights.iter_mut().zip(self.probs.iter_mut()) {
            *lw -= max;
            *p = lw.exp();
            total += *p;
        }
        let floor = self.gamma / self.probs.len() as f64;
        let keep = 1.0 - self.gamma;
        for p in &mut self.probs {
            *p = keep * (*p / total) + floor;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probs, rng)
    }
}

/// Inverse-CDF draw from a probability vector. Consumes exactly one variate.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left the cumulative sum just below u; fall back to the last
    // action with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weights_stay_uniform() {
        let mut w = MixedWeights::uniform(4, 0.3);
        w.apply_gains(0.7, &[2.0, 2.0, 2.0, 2.0]);
        for p in w.probs() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_evaluated_update() {
        // w = (1, 1), eta = 0.5, gains = (2, 0), gamma = 0.1:
        // softmax = (e/(e+1), 1/(e+1)), p = 0.9 softmax + 0.05.
        let mut w = MixedWeights::uniform(2, 0.1);
        w.apply_gains(0.5, &[2.0, 0.0]);
        assert!((w.probs()[0] - 0.707_952_720_767_004_4).abs() < 1e-9);
        assert!((w.probs()[1] - 0.292_047_279_232_995_6).abs() < 1e-9);
    }

    #[test]
    fn large_gains_stay_finite() {
        let mut w = MixedWeights::uniform(3, 0.05);
        for _ in 0..10_000 {
            w.apply_gains(1.0, &[1e3, 0.0, 5e2]);
        }
        assert!(w.log_weights().iter().all(|x| x.is_finite()));
        let s: f64 = w.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(w.probs().iter().all(|&p| p >= 0.05 / 3.0));
    }
}
