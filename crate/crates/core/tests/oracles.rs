mod common;

use duelbench_core::preference::{
    borda_scores, copeland_report, maximin_winners, row_minima, IssueKind, MatrixError,
    PreferenceMatrix,
};
use duelbench_core::rng::stream;
use proptest::prelude::*;

use common::{brute_winners, random_matrix};

fn matrix_strategy() -> impl Strategy<Value = PreferenceMatrix> {
    (2usize..=7, any::<u64>(), any::<bool>())
        .prop_map(|(a, seed, dyadic)| random_matrix(a, dyadic, &mut stream(seed, 0)))
}

fn permutation_strategy() -> impl Strategy<Value = (PreferenceMatrix, Vec<usize>)> {
    matrix_strategy().prop_flat_map(|m| {
        let a = m.size();
        (Just(m), Just((0..a).collect::<Vec<_>>()).prop_shuffle())
    })
}

proptest! {
    #[test]
    fn oracles_match_enumeration(m in matrix_strategy()) {
        let brute = brute_winners(&m);
        let cop = copeland_report(&m);
        prop_assert_eq!(cop.winners, brute.copeland);
        prop_assert_eq!(cop.condorcet, brute.condorcet);
        prop_assert_eq!(maximin_winners(&m), brute.maximin);
        prop_assert_eq!(borda_scores(&m).winners, brute.borda);
    }

    #[test]
    fn condorcet_winner_is_maximin_and_copeland(m in matrix_strategy()) {
        if let Some(c) = copeland_report(&m).condorcet {
            prop_assert_eq!(copeland_report(&m).winners, vec![c]);
            prop_assert_eq!(maximin_winners(&m), vec![c]);
        }
    }

    #[test]
    fn winners_follow_relabeling((m, perm) in permutation_strategy()) {
        // Action i of `m` is action perm[i] of `p`.
        let p = m.permuted(&perm);
        let relabel = |w: Vec<usize>| {
            let mut v: Vec<usize> = w.into_iter().map(|i| perm[i]).collect();
            v.sort_unstable();
            v
        };
        prop_assert_eq!(relabel(copeland_report(&m).winners), copeland_report(&p).winners);
        prop_assert_eq!(copeland_report(&m).condorcet.map(|c| perm[c]), copeland_report(&p).condorcet);
        prop_assert_eq!(relabel(maximin_winners(&m)), maximin_winners(&p));
        prop_assert_eq!(relabel(borda_scores(&m).winners), borda_scores(&p).winners);
        let (rm, rp) = (row_minima(&m), row_minima(&p));
        for i in 0..m.size() {
            prop_assert_eq!(rm[i], rp[perm[i]]);
        }
    }

    #[test]
    fn json_round_trip(m in matrix_strategy()) {
        let json = serde_json::to_string(&m).unwrap();
        let back: PreferenceMatrix = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn invalid_matrices_are_rejected_with_locations() {
    let err = PreferenceMatrix::from_rows(vec![vec![0.5, 0.7], vec![0.4, 0.5]]).unwrap_err();
    assert!(err
        .issues()
        .iter()
        .any(|i| i.kind == IssueKind::Asymmetry));
    let err = PreferenceMatrix::from_rows(vec![vec![0.4, 0.5], vec![0.5, 0.5]]).unwrap_err();
    assert!(err.issues().iter().any(|i| i.kind == IssueKind::Diagonal));
    assert!(matches!(
        PreferenceMatrix::from_rows(vec![]),
        Err(MatrixError::Empty)
    ));
    let bad: Result<PreferenceMatrix, _> = serde_json::from_str("[[0.5,1.2],[-0.2,0.5]]");
    assert!(bad.is_err());
}
