//! Preference matrices and winner oracles.
//!
//! Entry `(i, j)` of a [`PreferenceMatrix`] is the probability that action
//! `i` beats action `j` in a duel. Actions are indexed from zero throughout
//! the crate.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Tolerance on `X(i,j) + X(j,i) = 1`.
pub const COMPLEMENT_TOL: f64 = 1e-12;

/// Reason a matrix cell was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    /// `|X(i,j) + X(j,i) - 1| > 1e-12`; reported once per unordered pair, on `(i, j)` with `i < j`.
    Asymmetry,
    /// `X(i,i) != 0.5`.
    Diagonal,
    /// Entry outside `[0, 1]` or not finite.
    Range,
}

/// A single violated cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixIssue {
    pub row: usize,
    pub col: usize,
    pub kind: IssueKind,
    pub value: f64,
}

impl fmt::Display for MatrixIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            IssueKind::Asymmetry => write!(
                f,
                "({r},{c})/({c},{r}): entries sum to {v} instead of 1",
                r = self.row,
                c = self.col,
                v = self.value
            ),
            IssueKind::Diagonal => write!(
                f,
                "({r},{r}): diagonal is {v}, must be 0.5",
                r = self.row,
                v = self.value
            ),
            IssueKind::Range => write!(
                f,
                "({},{}): {} is not a probability",
                self.row, self.col, self.value
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("preference matrix must have at least one action")]
    Empty,
    #[error("preference matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("invalid preference matrix: {}", format_issues(.0))]
    Invalid(Vec<MatrixIssue>),
}

impl MatrixError {
    /// The violated cells, empty for shape errors.
    pub fn issues(&self) -> &[MatrixIssue] {
        match self {
            MatrixError::Invalid(issues) => issues,
            _ => &[],
        }
    }
}

fn format_issues(issues: &[MatrixIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A validated square matrix of win probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<Vec<f64>>")]
pub struct PreferenceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl PreferenceMatrix {
    /// Validates `rows` and builds the matrix. Every violated cell is reported.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let size = rows.len();
        if size == 0 {
            return Err(MatrixError::Empty);
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != size) {
            return Err(MatrixError::NotSquare {
                row,
                len: r.len(),
                expected: size,
            });
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(size, entries)
    }

    /// Validates a row-major `size * size` buffer.
    pub fn from_flat(size: usize, entries: Vec<f64>) -> Result<Self, MatrixError> {
        if size == 0 {
            return Err(MatrixError::Empty);
        }
        if entries.len() != size * size {
            return Err(MatrixError::NotSquare {
                row: entries.len() / size,
                len: entries.len() % size,
                expected: size,
            });
        }
        let issues = collect_issues(size, &entries);
        if issues.is_empty() {
            Ok(Self { size, entries })
        } else {
            Err(MatrixError::Invalid(issues))
        }
    }

    /// The all-0.5 matrix: every duel is a fair coin.
    pub fn uniform(size: usize) -> Result<Self, MatrixError> {
        Self::from_flat(size, vec![0.5; size * size])
    }

    /// Number of actions `A`.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.size).map(<[f64]>::to_vec).collect()
    }

    /// Sets `X(i,j) = value` and `X(j,i) = 1 - value`, then revalidates.
    pub(crate) fn with_pair(&self, i: usize, j: usize, value: f64) -> Result<Self, MatrixError> {
        let mut entries = self.entries.clone();
        entries[i * self.size + j] = value;
        entries[j * self.size + i] = 1.0 - value;
        Self::from_flat(self.size, entries)
    }

    /// Relabels actions: entry `(perm[i], perm[j])` of the result equals entry
    /// `(i, j)` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.size, "permutation length");
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.size {
            for j in 0..self.size {
                entries[perm[i] * self.size + perm[j]] = self.get(i, j);
            }
        }
        Self {
            size: self.size,
            entries,
        }
    }
}

impl From<PreferenceMatrix> for Vec<Vec<f64>> {
    fn from(m: PreferenceMatrix) -> Self {
        m.to_rows()
    }
}

impl<'de> Deserialize<'de> for PreferenceMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        PreferenceMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

fn collect_issues(size: usize, entries: &[f64]) -> Vec<MatrixIssue> {
    let at = |i: usize, j: usize| entries[i * size + j];
    let mut issues = Vec::new();
    let mut bad_range = vec![false; entries.len()];
    for i in 0..size {
        for j in 0..size {
            let v = at(i, j);
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                bad_range[i * size + j] = true;
                issues.push(MatrixIssue {
                    row: i,
                    col: j,
                    kind: IssueKind::Range,
                    value: v,
                });
            }
        }
    }
    for i in 0..size {
        let d = at(i, i);
        if d != 0.5 && !bad_range[i * size + i] {
            issues.push(MatrixIssue {
                row: i,
                col: i,
                kind: IssueKind::Diagonal,
                value: d,
            });
        }
        for j in (i + 1)..size {
            let sum = at(i, j) + at(j, i);
            let complementary = (sum - 1.0).abs() <= COMPLEMENT_TOL;
            if !complementary {
                issues.push(MatrixIssue {
                    row: i,
                    col: j,
                    kind: IssueKind::Asymmetry,
                    value: sum,
                });
            }
        }
    }
    issues
}

/// Indices attaining the maximum of `values` (exact comparison), ascending.
pub fn argmax_set<T: PartialOrd + Copy>(values: &[T]) -> Vec<usize> {
    let Some(best) = values
        .iter()
        .copied()
        .reduce(|a, b| if b > a { b } else { a })
    else {
        return Vec::new();
    };
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == best)
        .map(|(i, _)| i)
        .collect()
}

/// Lowest index attaining the maximum. Panics on an empty slice.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopelandReport {
    /// `counts[i] = |{j : X(i,j) > 0.5}|`.
    pub counts: Vec<usize>,
    pub winners: Vec<usize>,
    pub condorcet: Option<usize>,
}

/// Copeland counts, Copeland winners and the Condorcet winner if one exists.
pub fn copeland_report(m: &PreferenceMatrix) -> CopelandReport {
    let a = m.size();
    let counts: Vec<usize> = (0..a)
        .map(|i| m.row(i).iter().filter(|&&x| x > 0.5).count())
        .collect();
    let winners = argmax_set(&counts);
    // A lone action vacuously beats every other action.
    let condorcet = counts.iter().position(|&c| c == a - 1);
    CopelandReport {
        counts,
        winners,
        condorcet,
    }
}

/// Row minimum `min_j X(i,j)`, diagonal included.
pub fn row_minima(m: &PreferenceMatrix) -> Vec<f64> {
    (0..m.size())
        .map(|i| m.row(i).iter().copied().fold(f64::INFINITY, f64::min))
        .collect()
}

/// Argmax set of the row minima.
pub fn maximin_winners(m: &PreferenceMatrix) -> Vec<usize> {
    argmax_set(&row_minima(m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BordaReport {
    /// `scores[i] = (1/A) * sum_j X(i,j)`, diagonal included.
    pub scores: Vec<f64>,
    pub winners: Vec<usize>,
}

pub fn borda_scores(m: &PreferenceMatrix) -> BordaReport {
    let a = m.size() as f64;
    let scores: Vec<f64> = (0..m.size())
        .map(|i| m.row(i).iter().sum::<f64>() / a)
        .collect();
    let winners = argmax_set(&scores);
    BordaReport { scores, winners }
}

/// Every winner notion for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerReport {
    pub copeland_winners: Vec<usize>,
    pub condorcet_winner: Option<usize>,
    pub maximin_winners: Vec<usize>,
    pub borda_winners: Vec<usize>,
    pub borda_scores: Vec<f64>,
    pub copeland_counts: Vec<usize>,
}

impl WinnerReport {
    pub fn new(m: &PreferenceMatrix) -> Self {
        let copeland = copeland_report(m);
        let borda = borda_scores(m);
        Self {
            copeland_winners: copeland.winners,
            condorcet_winner: copeland.condorcet,
            maximin_winners: maximin_winners(m),
            borda_winners: borda.winners,
            borda_scores: borda.scores,
            copeland_counts: copeland.counts,
        }
    }
}

impl fmt::Display for WinnerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let condorcet = self
            .condorcet_winner
            .map_or_else(|| "none".to_string(), |c| c.to_string());
        writeln!(f, "condorcet winner: {condorcet}")?;
        writeln!(f, "copeland winners: {:?} (counts {:?})", self.copeland_winners, self.copeland_counts)?;
        writeln!(f, "maximin winners:  {:?}", self.maximin_winners)?;
        let scores: Vec<String> = self.borda_scores.iter().map(|s| format!("{s:.5}")).collect();
        write!(f, "borda winners:    {:?} (scores [{}])", self.borda_winners, scores.join(", "))
    }
}
