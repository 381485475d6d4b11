//! Synthetic preference environments.
//!
//! A scenario links a latent utility per action to win probabilities through
//! the logistic function. The Condorcet scenario pins one action to the top of
//! the utility scale; the Borda variant then boosts the runner-up so that it
//! becomes the unique Borda winner while the Condorcet winner is unchanged.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numfmt::to_json_sig17;
use crate::preference::{MatrixError, PreferenceMatrix, WinnerReport};

/// Win probability assigned to the runner-up against every action other than
/// the Condorcet winner in the Borda variant.
pub const BORDA_BOOST: f64 = 0.95;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("need at least {min} actions, got {actions}")]
    TooFewActions { actions: usize, min: usize },
    #[error("utility scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("gap must satisfy 0 < gap < scale ({scale}), got {gap}")]
    InvalidGap { gap: f64, scale: f64 },
    #[error("expected a condorcet scenario, got {0}")]
    NotCondorcet(ScenarioKind),
    #[error("scenario winner check failed: {0}")]
    WinnerCheck(String),
    #[error("no Borda variant with a lone Borda winner found for A = {actions}, c = {scale}, gap = {gap} in {attempts} draws")]
    BordaUnattainable {
        actions: usize,
        scale: f64,
        gap: f64,
        attempts: usize,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("scenario file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario file {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl ScenarioError {
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            ScenarioError::TooFewActions { .. }
                | ScenarioError::InvalidScale(_)
                | ScenarioError::InvalidGap { .. }
                | ScenarioError::NotCondorcet(_)
                | ScenarioError::BordaUnattainable { .. }
                | ScenarioError::Matrix(_)
                | ScenarioError::Json { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Condorcet,
    Borda,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Condorcet => "condorcet",
            ScenarioKind::Borda => "borda",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "condorcet" => Ok(ScenarioKind::Condorcet),
            "borda" => Ok(ScenarioKind::Borda),
            other => Err(format!("unknown scenario kind `{other}` (expected condorcet or borda)")),
        }
    }
}

/// Latent utilities on `[0, scale]` with one designated top action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityVector {
    pub values: Vec<f64>,
    pub scale: f64,
    pub top: usize,
}

/// `X(i,j) = 1 / (1 + exp(u(j) - u(i)))`, diagonal 0.5.
pub fn link_logistic(utilities: &[f64]) -> Result<PreferenceMatrix, MatrixError> {
    let a = utilities.len();
    let mut entries = vec![0.5; a * a];
    for i in 0..a {
        for j in (i + 1)..a {
            let x = 1.0 / (1.0 + (utilities[j] - utilities[i]).exp());
            entries[i * a + j] = x;
            // Complement rather than re-evaluating keeps X(i,j) + X(j,i) = 1.
            entries[j * a + i] = 1.0 - x;
        }
    }
    PreferenceMatrix::from_flat(a, entries)
}

/// A generated environment together with the winners it was built around.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub matrix: PreferenceMatrix,
    pub utilities: UtilityVector,
    pub gap: f64,
    pub designated_condorcet: usize,
    pub designated_borda: usize,
}

impl Scenario {
    pub fn actions(&self) -> usize {
        self.matrix.size()
    }

    pub fn winners(&self) -> WinnerReport {
        WinnerReport::new(&self.matrix)
    }

    /// Checks the designated winners against the oracles.
    pub fn verify(&self) -> Result<(), ScenarioError> {
        let report = self.winners();
        let c = self.designated_condorcet;
        if report.condorcet_winner != Some(c) {
            return Err(ScenarioError::WinnerCheck(format!(
                "designated condorcet winner {c} but oracle reports {:?}",
                report.condorcet_winner
            )));
        }
        if report.maximin_winners != [c] {
            return Err(ScenarioError::WinnerCheck(format!(
                "maximin winners {:?}, expected [{c}]",
                report.maximin_winners
            )));
        }
        let b = self.designated_borda;
        if report.borda_winners != [b] {
            return Err(ScenarioError::WinnerCheck(format!(
                "borda winners {:?}, expected [{b}]",
                report.borda_winners
            )));
        }
        match self.kind {
            ScenarioKind::Condorcet if b != c => Err(ScenarioError::WinnerCheck(
                "condorcet scenario must share one winner".into(),
            )),
            ScenarioKind::Borda if b == c => Err(ScenarioError::WinnerCheck(
                "borda scenario must separate the borda and condorcet winners".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        to_json_sig17(&ScenarioDocument::from(self)).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let doc: ScenarioDocument = serde_json::from_str(text)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_json(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ScenarioError::Json {
            path: path.display().to_string(),
            source,
        })
    }
}

/// On-disk scenario layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
struct ScenarioDocument {
    kind: ScenarioKind,
    #[serde(rename = "A")]
    actions: usize,
    c: f64,
    gap: f64,
    utilities: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    designated_condorcet: usize,
    designated_borda: usize,
}

impl From<&Scenario> for ScenarioDocument {
    fn from(s: &Scenario) -> Self {
        Self {
            kind: s.kind,
            actions: s.actions(),
            c: s.utilities.scale,
            gap: s.gap,
            utilities: s.utilities.values.clone(),
            matrix: s.matrix.to_rows(),
            designated_condorcet: s.designated_condorcet,
            designated_borda: s.designated_borda,
        }
    }
}

impl TryFrom<ScenarioDocument> for Scenario {
    type Error = ScenarioError;
    fn try_from(doc: ScenarioDocument) -> Result<Self, ScenarioError> {
        let matrix = PreferenceMatrix::from_rows(doc.matrix)?;
        if matrix.size() != doc.actions || doc.utilities.len() != doc.actions {
            return Err(ScenarioError::WinnerCheck(format!(
                "A = {} but matrix is {}x{} with {} utilities",
                doc.actions,
                matrix.size(),
                matrix.size(),
                doc.utilities.len()
            )));
        }
        let top = crate::preference::argmax_first(&doc.utilities);
        let scenario = Scenario {
            kind: doc.kind,
            matrix,
            utilities: UtilityVector {
                values: doc.utilities,
                scale: doc.c,
                top,
            },
            gap: doc.gap,
            designated_condorcet: doc.designated_condorcet,
            designated_borda: doc.designated_borda,
        };
        scenario.verify()?;
        Ok(scenario)
    }
}

/// Draws a Condorcet scenario: the top action (chosen uniformly) gets utility
/// exactly `scale`, every other action is uniform on `[0, scale - gap]`.
pub fn gen_condorcet_scenario<R: Rng + ?Sized>(
    actions: usize,
    scale: f64,
    gap: f64,
    rng: &mut R,
) -> Result<Scenario, ScenarioError> {
    if actions < 2 {
        return Err(ScenarioError::TooFewActions { actions, min: 2 });
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(ScenarioError::InvalidScale(scale));
    }
    if !(gap.is_finite() && gap > 0.0 && gap < scale) {
        return Err(ScenarioError::InvalidGap { gap, scale });
    }
    let top = rng.random_range(0..actions);
    let ceiling = scale - gap;
    let values: Vec<f64> = (0..actions)
        .map(|i| {
            if i == top {
                scale
            } else {
                rng.random::<f64>() * ceiling
            }
        })
        .collect();
    let matrix = link_logistic(&values)?;
    let scenario = Scenario {
        kind: ScenarioKind::Condorcet,
        matrix,
        utilities: UtilityVector {
            values,
            scale,
            top,
        },
        gap,
        designated_condorcet: top,
        designated_borda: top,
    };
    scenario.verify()?;
    Ok(scenario)
}

/// Turns a Condorcet scenario into the Borda variant by setting
/// `X(i2, j) = 0.95` for every `j` other than `i2` and the Condorcet winner,
/// where `i2` has the second-largest utility.
pub fn make_borda_variant(base: &Scenario) -> Result<Scenario, ScenarioError> {
    if base.kind != ScenarioKind::Condorcet {
        return Err(ScenarioError::NotCondorcet(base.kind));
    }
    let a = base.actions();
    if a < 3 {
        return Err(ScenarioError::TooFewActions { actions: a, min: 3 });
    }
    let winner = base.designated_condorcet;
    let runner_up = (0..a)
        .filter(|&i| i != winner)
        .fold(None::<usize>, |best, i| match best {
            Some(b) if base.utilities.values[b] >= base.utilities.values[i] => Some(b),
            _ => Some(i),
        })
        .expect("at least two non-winning actions");
    let mut matrix = base.matrix.clone();
    for j in (0..a).filter(|&j| j != runner_up && j != winner) {
        matrix = matrix.with_pair(runner_up, j, BORDA_BOOST)?;
    }
    let scenario = Scenario {
        kind: ScenarioKind::Borda,
        matrix,
        utilities: base.utilities.clone(),
        gap: base.gap,
        designated_condorcet: winner,
        designated_borda: runner_up,
    };
    scenario.verify()?;
    Ok(scenario)
}

/// Draws allowed by [`gen_borda_scenario`] before giving up.
pub const BORDA_ATTEMPTS: usize = 1000;

/// Draws Condorcet scenarios from `rng` until one admits a Borda variant
/// whose lone Borda winner is the runner-up, and returns that variant.
pub fn gen_borda_scenario<R: Rng + ?Sized>(
    actions: usize,
    scale: f64,
    gap: f64,
    rng: &mut R,
) -> Result<Scenario, ScenarioError> {
    if actions < 3 {
        return Err(ScenarioError::TooFewActions { actions, min: 3 });
    }
    for _ in 0..BORDA_ATTEMPTS {
        let base = gen_condorcet_scenario(actions, scale, gap, rng)?;
        match make_borda_variant(&base) {
            Ok(variant) => return Ok(variant),
            Err(ScenarioError::WinnerCheck(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(ScenarioError::BordaUnattainable {
        actions,
        scale,
        gap,
        attempts: BORDA_ATTEMPTS,
    })
}

/// One realized binary duel-outcome matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeMatrix {
    size: usize,
    bits: Vec<u8>,
}

impl OutcomeMatrix {
    /// Builds an outcome matrix from explicit rows, checking antisymmetry off the diagonal.
    pub fn from_rows(rows: &[Vec<u8>]) -> Option<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return None;
        }
        let bits: Vec<u8> = rows.iter().flatten().copied().collect();
        if bits.iter().any(|&b| b > 1) {
            return None;
        }
        for i in 0..size {
            for j in (i + 1)..size {
                if bits[i * size + j] + bits[j * size + i] != 1 {
                    return None;
                }
            }
        }
        Some(Self { size, bits })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[i * self.size + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[i * self.size..(i + 1) * self.size]
    }

    /// Number of ones in row `i`.
    pub fn row_sum(&self, i: usize) -> u32 {
        self.row(i).iter().map(|&b| u32::from(b)).sum()
    }

    /// The outcome of `i` against `j`.
    pub fn duel(&self, i: usize, j: usize) -> Result<u8, IndexError> {
        if i >= self.size || j >= self.size {
            return Err(IndexError {
                i,
                j,
                size: self.size,
            });
        }
        Ok(self.get(i, j))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("duel ({i}, {j}) out of range for {size} actions")]
pub struct IndexError {
    pub i: usize,
    pub j: usize,
    pub size: usize,
}

/// Realizes one outcome matrix. Draw order is row-major: the diagonal cell
/// `(i,i) ~ Bernoulli(0.5)` followed by `(i,j) ~ Bernoulli(X(i,j))` for `j > i`;
/// `(j,i)` is the complement.
pub fn sample_outcomes<R: Rng + ?Sized>(m: &PreferenceMatrix, rng: &mut R) -> OutcomeMatrix {
    let mut out = OutcomeMatrix {
        size: m.size(),
        bits: Vec::new(),
    };
    sample_outcomes_into(m, rng, &mut out);
    out
}

/// Like [`sample_outcomes`], reusing `out`'s allocation.
pub fn sample_outcomes_into<R: Rng + ?Sized>(
    m: &PreferenceMatrix,
    rng: &mut R,
    out: &mut OutcomeMatrix,
) {
    let a = m.size();
    out.size = a;
    out.bits.clear();
    out.bits.resize(a * a, 0);
    for i in 0..a {
        out.bits[i * a + i] = u8::from(rng.random::<f64>() < 0.5);
        for j in (i + 1)..a {
            let win = u8::from(rng.random::<f64>() < m.get(i, j));
            out.bits[i * a + j] = win;
            out.bits[j * a + i] = 1 - win;
        }
    }
}
