//! Helpers shared by the integration tests: random preference matrices and
//! brute-force winner enumeration written independently of the library.

#![allow(dead_code)]

use duelbench_core::preference::PreferenceMatrix;
use rand::Rng;

/// Random valid matrix. With `dyadic`, entries are multiples of 1/16 so that
/// ties are frequent and every row sum is exact.
pub fn random_matrix<R: Rng>(a: usize, dyadic: bool, rng: &mut R) -> PreferenceMatrix {
    let mut rows = vec![vec![0.5; a]; a];
    #[allow(clippy::needless_range_loop)]
    for i in 0..a {
        for j in (i + 1)..a {
            let x = if dyadic {
                f64::from(rng.random_range(0..=16u8)) / 16.0
            } else {
                rng.random::<f64>()
            };
            rows[i][j] = x;
            rows[j][i] = 1.0 - x;
        }
    }
    PreferenceMatrix::from_rows(rows).expect("mirrored construction is valid")
}

pub struct BruteWinners {
    pub copeland: Vec<usize>,
    pub condorcet: Option<usize>,
    pub maximin: Vec<usize>,
    pub borda: Vec<usize>,
}

pub fn brute_winners(m: &PreferenceMatrix) -> BruteWinners {
    let a = m.size();
    let beats = |i: usize, j: usize| i != j && m.get(i, j) > 0.5;
    let wins = |i: usize| (0..a).filter(|&j| beats(i, j)).count();

    let condorcet = (0..a).find(|&i| (0..a).all(|j| j == i || beats(i, j)));
    let copeland = (0..a).filter(|&i| (0..a).all(|k| wins(k) <= wins(i))).collect();
    // i is a Maximin winner iff every other row has some entry no larger than
    // every entry of row i.
    let maximin = (0..a)
        .filter(|&i| {
            (0..a).all(|k| (0..a).any(|j| (0..a).all(|l| m.get(k, j) <= m.get(i, l))))
        })
        .collect();
    let row_sum = |i: usize| (0..a).map(|j| m.get(i, j)).sum::<f64>();
    let borda = (0..a).filter(|&i| (0..a).all(|k| row_sum(k) <= row_sum(i))).collect();
    BruteWinners {
        copeland,
        condorcet,
        maximin,
        borda,
    }
}
