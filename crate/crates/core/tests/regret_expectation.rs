use duelbench_core::environment::sample_outcomes;
use duelbench_core::policy::Duel;
use duelbench_core::preference::PreferenceMatrix;
use duelbench_core::regret::{RegretDefinition, RegretLedger};
use duelbench_core::rng::stream;
use rand::Rng;

fn instance() -> PreferenceMatrix {
    PreferenceMatrix::from_rows(vec![
        vec![0.5, 0.7, 0.9],
        vec![0.3, 0.5, 0.6],
        vec![0.1, 0.4, 0.5],
    ])
    .unwrap()
}

/// Each definition with the realized bits replaced by `X`, averaged over all
/// nine equally likely duels.
fn analytic_mean(def: RegretDefinition, x: &PreferenceMatrix, s: usize) -> f64 {
    let a = x.size();
    let mut total = 0.0;
    for i in 0..a {
        for j in 0..a {
            total += match def {
                RegretDefinition::MaximinWinner => {
                    0.5 * (x.get(s, i) - x.get(s, s) + x.get(s, j) - x.get(s, s))
                }
                RegretDefinition::MaximinDuel => {
                    0.5 * (x.get(s, j) - x.get(i, j) + x.get(s, i) - x.get(i, j))
                }
                RegretDefinition::Borda => {
                    (0..a)
                        .map(|k| 2.0 * x.get(s, k) - x.get(i, k) - x.get(j, k))
                        .sum::<f64>()
                        / (2 * a) as f64
                }
            };
        }
    }
    total / (a * a) as f64
}

#[test]
fn realized_regret_is_unbiased_for_random_duels() {
    let x = instance();
    let steps = 200_000;
    for (k, def) in RegretDefinition::ALL.into_iter().enumerate() {
        let s = def.reference_winner(&x);
        assert_eq!(s, 0);
        let mut env = stream(5, k as u64);
        let mut pick = stream(6, k as u64);
        let mut ledger = RegretLedger::with_history(def, s);
        for _ in 0..steps {
            let o = sample_outcomes(&x, &mut env);
            let duel = Duel::new(pick.random_range(0..3), pick.random_range(0..3));
            ledger.record(&o, duel);
        }
        let h = ledger.history().unwrap();
        let n = h.len() as f64;
        let mean = h.iter().sum::<f64>() / n;
        let var = h.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let want = analytic_mean(def, &x, s);
        assert!(want > 0.0, "{def}: {want}");
        assert!((mean - want).abs() <= 3.0 * se, "{def}: {mean} vs {want} (se {se})");
        assert!((ledger.cumulative() / n - mean).abs() < 1e-9);
    }
}

#[test]
fn playing_the_winner_costs_nothing_on_average() {
    let x = instance();
    for def in RegretDefinition::ALL {
        let s = def.reference_winner(&x);
        let mut env = stream(7, 0);
        let mut ledger = RegretLedger::new(def, s);
        for _ in 0..100_000 {
            let o = sample_outcomes(&x, &mut env);
            ledger.record(&o, Duel::new(s, s));
        }
        assert!((ledger.cumulative() / 100_000.0).abs() <= 0.01, "{def}");
    }
}
