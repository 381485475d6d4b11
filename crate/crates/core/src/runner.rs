//! Seeded multi-run experiments, aggregation and CSV persistence.
//!
//! An [`Experiment`] fixes one scenario (or one per run index when
//! `redraw_scenario` is set) and runs every selected algorithm `runs` times.
//! Each `(algorithm, run)` pair gets its own seed
//! `derive_seed(base_seed, algorithm.seed_domain(), run)`; the environment
//! draws from ChaCha stream 0 of that seed and the policy from stream 1.
//! Scenarios are generated from `derive_seed(base_seed, 0, k)` with `k = 0`
//! for the shared scenario and `k = run + 1` for redraws.
//!
//! Results are ordered by `(algorithm position, run)` whatever the worker
//! count, so output files are byte-identical across thread pools.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::DEFAULT_A_DTS;
use crate::environment::{
    gen_borda_scenario, gen_condorcet_scenario, sample_outcomes, sample_outcomes_into, Scenario,
    ScenarioError, ScenarioKind,
};
use crate::numfmt::{fmt17, to_json_sig17};
use crate::policy::{Algorithm, Duel, DuelingPolicy, HyperParamError, PolicyConfig};
use crate::regret::{bound_curve, RegretBound, RegretDefinition, RegretLedger};
use crate::rng::{derive_seed, stream, RNG_NAME, SEED_MIX_NAME};

/// Default number of logging checkpoints.
pub const DEFAULT_GRID_POINTS: usize = 400;

/// Seed domain reserved for scenario generation.
const SCENARIO_DOMAIN: u64 = 0;
const ENV_STREAM: u64 = 0;
const POLICY_STREAM: u64 = 1;

pub const AGGREGATE_HEADER: [&str; 6] = ["scenario", "algorithm", "t", "mean", "std", "bound"];
pub const RUNS_HEADER: [&str; 5] = ["scenario", "algorithm", "run", "t", "cum_regret"];
pub const SELECTIONS_HEADER: [&str; 8] = [
    "scenario",
    "algorithm",
    "run",
    "action",
    "count_first",
    "count_second",
    "p",
    "q",
];

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    HyperParam(#[from] HyperParamError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("cannot aggregate: {0}")]
    Mismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl RunnerError {
    pub fn is_validation(&self) -> bool {
        match self {
            RunnerError::InvalidConfig(_) | RunnerError::HyperParam(_) => true,
            RunnerError::Scenario(e) => e.is_validation(),
            _ => false,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        RunnerError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn csv(path: &Path, source: csv::Error) -> Self {
        RunnerError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

type Result<T, E = RunnerError> = std::result::Result<T, E>;

fn default_alpha_c() -> f64 {
    1.0
}

fn default_a_dts() -> f64 {
    DEFAULT_A_DTS
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    #[serde(rename = "A")]
    pub actions: usize,
    /// Utility of the top action.
    pub c: f64,
    pub gap: f64,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub runs: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Per-algorithm regret definition; missing entries use
    /// [`RegretDefinition::default_for`].
    #[serde(default)]
    pub definitions: BTreeMap<Algorithm, RegretDefinition>,
    /// Constant of the TS-Borda schedule `alpha = alpha_c T^(-1/3)`; also the
    /// `c` of the TS-Borda bound.
    #[serde(default = "default_alpha_c")]
    pub alpha_c: f64,
    #[serde(default = "default_a_dts")]
    pub a_dts: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Log every step instead of `grid_points` checkpoints.
    #[serde(default)]
    pub full_series: bool,
    /// Draw a fresh scenario for every run index.
    #[serde(default)]
    pub redraw_scenario: bool,
}

impl ExperimentConfig {
    /// Defaults of the reference experiment: A = 10, c = 3, gap = 1,
    /// T = 40000, 100 runs, all algorithms.
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            actions: 10,
            c: 3.0,
            gap: 1.0,
            horizon: 40_000,
            runs: 100,
            base_seed: 1,
            algorithms: Algorithm::ALL.to_vec(),
            definitions: BTreeMap::new(),
            alpha_c: default_alpha_c(),
            a_dts: DEFAULT_A_DTS,
            grid_points: DEFAULT_GRID_POINTS,
            full_series: false,
            redraw_scenario: false,
        }
    }

    pub fn definition(&self, algorithm: Algorithm) -> RegretDefinition {
        self.definitions
            .get(&algorithm)
            .copied()
            .unwrap_or_else(|| RegretDefinition::default_for(self.scenario, algorithm))
    }

    pub fn policy_config(&self, algorithm: Algorithm) -> PolicyConfig {
        let mut cfg = PolicyConfig::new(algorithm, self.actions, self.horizon);
        cfg.alpha_c = self.alpha_c;
        cfg.a_dts = self.a_dts;
        cfg
    }

    /// Checks sizes and every selected algorithm's horizon floor.
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(RunnerError::InvalidConfig(m));
        if self.runs == 0 {
            return invalid("runs must be at least 1".into());
        }
        if self.horizon == 0 {
            return invalid("horizon must be at least 1".into());
        }
        if self.grid_points == 0 {
            return invalid("grid_points must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return invalid("no algorithms selected".into());
        }
        for (k, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..k].contains(a) {
                return invalid(format!("algorithm `{}` listed twice", a.tag()));
            }
        }
        let min_actions = match self.scenario {
            ScenarioKind::Condorcet => 2,
            ScenarioKind::Borda => 3,
        };
        if self.actions < min_actions {
            return Err(ScenarioError::TooFewActions {
                actions: self.actions,
                min: min_actions,
            }
            .into());
        }
        for &a in &self.algorithms {
            self.policy_config(a).build()?;
        }
        Ok(())
    }

    /// Checkpoints at which cumulative regret is recorded.
    pub fn grid(&self) -> Vec<u64> {
        if self.full_series {
            (1..=self.horizon).collect()
        } else {
            logging_grid(self.horizon, self.grid_points)
        }
    }
}

/// `t_k = ceil(k T / n)` for `k = 1..=n`, deduplicated; strictly increasing
/// and ending at `T`.
pub fn logging_grid(horizon: u64, points: usize) -> Vec<u64> {
    let n = points.max(1) as u128;
    let t = u128::from(horizon);
    let mut grid: Vec<u64> = (1..=n).map(|k| (k * t).div_ceil(n) as u64).collect();
    grid.dedup();
    grid.retain(|&x| x > 0);
    grid
}

/// One seeded run of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    pub definition: RegretDefinition,
    pub reference_winner: usize,
    pub grid: Vec<u64>,
    pub cum_regret: Vec<f64>,
    /// How often each action occupied the first seat.
    pub count_first: Vec<u64>,
    /// How often each action occupied the second seat.
    pub count_second: Vec<u64>,
    pub final_p: Option<Vec<f64>>,
    pub final_q: Option<Vec<f64>>,
}

impl RunRecord {
    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }
}

/// What an observer sees after each step's update.
pub struct StepView<'a> {
    pub t: u64,
    pub duel: Duel,
    pub outcome: u8,
    pub regret: f64,
    pub cumulative: f64,
    pub policy: &'a dyn DuelingPolicy,
}

/// Pointwise mean and population standard deviation across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSeries {
    pub scenario: ScenarioKind,
    pub algorithm: Algorithm,
    pub grid: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Bound values on `grid` when the algorithm's bound matches its regret
    /// definition.
    pub bound: Option<Vec<f64>>,
}

impl AggregateSeries {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    /// Mean cumulative regret at the last grid point not after `t`.
    pub fn mean_at(&self, t: u64) -> Option<f64> {
        let k = self.grid.partition_point(|&g| g <= t);
        k.checked_sub(1).map(|k| self.mean[k])
    }
}

/// Aggregates runs of one algorithm that share a grid.
pub fn aggregate(scenario: ScenarioKind, records: &[RunRecord]) -> Result<AggregateSeries> {
    let first = records
        .first()
        .ok_or_else(|| RunnerError::Mismatch("no records".into()))?;
    for r in records {
        if r.algorithm != first.algorithm {
            return Err(RunnerError::Mismatch(format!(
                "records mix algorithms `{}` and `{}`",
                first.algorithm.tag(),
                r.algorithm.tag()
            )));
        }
        if r.grid != first.grid || r.cum_regret.len() != first.grid.len() {
            return Err(RunnerError::Mismatch(format!(
                "run {} of `{}` has a different logging grid",
                r.run,
                r.algorithm.tag()
            )));
        }
    }
    let n = records.len() as f64;
    let len = first.grid.len();
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for k in 0..len {
        let m = records.iter().map(|r| r.cum_regret[k]).sum::<f64>() / n;
        let var = records
            .iter()
            .map(|r| (r.cum_regret[k] - m).powi(2))
            .sum::<f64>()
            / n;
        mean[k] = m;
        std[k] = var.sqrt();
    }
    Ok(AggregateSeries {
        scenario,
        algorithm: first.algorithm,
        grid: first.grid.clone(),
        mean,
        std,
        bound: None,
    })
}

/// A validated configuration bound to its scenario.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    scenario: Scenario,
    grid: Vec<u64>,
}

impl Experiment {
    /// Validates `config` and generates the shared scenario.
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let scenario = generate_scenario(&config, 0)?;
        let grid = config.grid();
        Ok(Self {
            config,
            scenario,
            grid,
        })
    }

    /// Uses a prepared scenario; its kind and size override the config's.
    pub fn with_scenario(mut config: ExperimentConfig, scenario: Scenario) -> Result<Self> {
        if config.redraw_scenario {
            return Err(RunnerError::InvalidConfig(
                "a fixed scenario cannot be combined with per-run redraws".into(),
            ));
        }
        config.scenario = scenario.kind;
        config.actions = scenario.actions();
        config.c = scenario.utilities.scale;
        config.gap = scenario.gap;
        config.validate()?;
        let grid = config.grid();
        Ok(Self {
            config,
            scenario,
            grid,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// The shared scenario (run 0's scenario under redraws).
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn grid(&self) -> &[u64] {
        &self.grid
    }

    pub fn run_seed(&self, algorithm: Algorithm, run: usize) -> u64 {
        derive_seed(self.config.base_seed, algorithm.seed_domain(), run as u64)
    }

    fn scenario_for(&self, run: usize) -> Result<std::borrow::Cow<'_, Scenario>> {
        if self.config.redraw_scenario {
            Ok(std::borrow::Cow::Owned(generate_scenario(
                &self.config,
                run as u64 + 1,
            )?))
        } else {
            Ok(std::borrow::Cow::Borrowed(&self.scenario))
        }
    }

    pub fn run_one(&self, algorithm: Algorithm, run: usize) -> Result<RunRecord> {
        self.run_one_observed(algorithm, run, |_| {})
    }

    /// Runs one `(algorithm, run)` pair, calling `observe` after every update.
    pub fn run_one_observed<F>(&self, algorithm: Algorithm, run: usize, mut observe: F) -> Result<RunRecord>
    where
        F: FnMut(&StepView<'_>),
    {
        let scenario = self.scenario_for(run)?;
        let matrix = &scenario.matrix;
        let a = matrix.size();
        let definition = self.config.definition(algorithm);
        let i_star = definition.reference_winner(matrix);
        let mut policy = self.config.policy_config(algorithm).build()?;

        let seed = self.run_seed(algorithm, run);
        let mut env_rng = stream(seed, ENV_STREAM);
        let mut policy_rng = stream(seed, POLICY_STREAM);

        let mut ledger = RegretLedger::new(definition, i_star);
        let mut outcomes = sample_outcomes(matrix, &mut env_rng);
        let mut count_first = vec![0u64; a];
        let mut count_second = vec![0u64; a];
        let mut cum_regret = Vec::with_capacity(self.grid.len());
        let mut next = 0;

        for t in 1..=self.config.horizon {
            if t > 1 {
                sample_outcomes_into(matrix, &mut env_rng, &mut outcomes);
            }
            let duel = policy.select(&mut policy_rng);
            let outcome = outcomes.get(duel.first, duel.second);
            policy.update(duel, outcome);
            let regret = ledger.record(&outcomes, duel);
            count_first[duel.first] += 1;
            count_second[duel.second] += 1;
            observe(&StepView {
                t,
                duel,
                outcome,
                regret,
                cumulative: ledger.cumulative(),
                policy: policy.as_ref(),
            });
            if self.grid.get(next) == Some(&t) {
                cum_regret.push(ledger.cumulative());
                next += 1;
            }
        }

        let (final_p, final_q) = match policy.weights() {
            Some(w) => (Some(w.p.to_vec()), w.q.map(<[f64]>::to_vec)),
            None => (None, None),
        };
        Ok(RunRecord {
            algorithm,
            run,
            seed,
            definition,
            reference_winner: i_star,
            grid: self.grid.clone(),
            cum_regret,
            count_first,
            count_second,
            final_p,
            final_q,
        })
    }

    /// Runs every `(algorithm, run)` pair on a pool of `threads` workers
    /// (0 means rayon's default) and aggregates per algorithm.
    pub fn run_all(&self, threads: usize) -> Result<ExperimentResults> {
        let tasks: Vec<(Algorithm, usize)> = self
            .config
            .algorithms
            .iter()
            .flat_map(|&alg| (0..self.config.runs).map(move |r| (alg, r)))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RunnerError::Pool(e.to_string()))?;
        let records: Vec<RunRecord> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&(alg, run)| self.run_one(alg, run))
                .collect::<Result<_>>()
        })?;

        let mut series = Vec::with_capacity(self.config.algorithms.len());
        for (k, &alg) in self.config.algorithms.iter().enumerate() {
            let runs = &records[k * self.config.runs..(k + 1) * self.config.runs];
            let mut s = aggregate(self.config.scenario, runs)?;
            s.bound = self.bound_for(alg)?;
            series.push(s);
        }
        Ok(ExperimentResults {
            config: self.config.clone(),
            scenario: self.scenario.clone(),
            records,
            series,
        })
    }

    /// Bound values on the grid when `algorithm`'s bound matches its
    /// configured regret definition.
    pub fn bound_for(&self, algorithm: Algorithm) -> Result<Option<Vec<f64>>> {
        match RegretBound::applicable(algorithm, self.config.definition(algorithm)) {
            Some(b) => Ok(Some(
                bound_curve(b, self.config.actions, &self.grid, self.config.alpha_c)?.values,
            )),
            None => Ok(None),
        }
    }
}

fn generate_scenario(config: &ExperimentConfig, index: u64) -> Result<Scenario> {
    Ok(derive_scenario(
        config.scenario,
        config.actions,
        config.c,
        config.gap,
        config.base_seed,
        index,
    )?)
}

/// Scenario number `index` of an experiment with `base_seed`; index 0 is the
/// shared scenario.
pub fn derive_scenario(
    kind: ScenarioKind,
    actions: usize,
    c: f64,
    gap: f64,
    base_seed: u64,
    index: u64,
) -> Result<Scenario, ScenarioError> {
    let seed = derive_seed(base_seed, SCENARIO_DOMAIN, index);
    let mut rng = stream(seed, ENV_STREAM);
    match kind {
        ScenarioKind::Condorcet => gen_condorcet_scenario(actions, c, gap, &mut rng),
        ScenarioKind::Borda => gen_borda_scenario(actions, c, gap, &mut rng),
    }
}

/// Output of [`Experiment::run_all`].
#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub scenario: Scenario,
    /// Ordered by `(algorithm position, run)`.
    pub records: Vec<RunRecord>,
    /// One per algorithm, in configuration order.
    pub series: Vec<AggregateSeries>,
}

/// File names written by [`ExperimentResults::write_dir`].
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const RUNS_FILE: &str = "runs.csv";
pub const SELECTIONS_FILE: &str = "selections.csv";
pub const SCENARIO_FILE: &str = "scenario.json";
pub const METADATA_FILE: &str = "experiment.json";

#[derive(Serialize)]
struct Metadata<'a> {
    config: &'a ExperimentConfig,
    rng: &'static str,
    seed_mix: &'static str,
    std: &'static str,
    grid_len: usize,
    runs: Vec<RunMeta>,
}

#[derive(Serialize)]
struct RunMeta {
    algorithm: Algorithm,
    run: usize,
    seed: u64,
    definition: RegretDefinition,
    reference_winner: usize,
}

impl ExperimentResults {
    /// Writes the aggregate, per-run and selection CSVs, the scenario and the
    /// experiment metadata into `dir`, creating it if needed.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;
        let meta = self.metadata_line();
        write_series_with(&dir.join(AGGREGATE_FILE), &self.series, &meta)?;
        write_runs(&dir.join(RUNS_FILE), self.config.scenario, &self.records, &meta)?;
        write_selections(&dir.join(SELECTIONS_FILE), self.config.scenario, &self.records, &meta)?;
        if !self.config.redraw_scenario {
            self.scenario
                .write_json(&dir.join(SCENARIO_FILE))
                .map_err(RunnerError::Scenario)?;
        }
        let metadata = Metadata {
            config: &self.config,
            rng: RNG_NAME,
            seed_mix: SEED_MIX_NAME,
            std: "population",
            grid_len: self.series.first().map_or(0, |s| s.grid.len()),
            runs: self
                .records
                .iter()
                .map(|r| RunMeta {
                    algorithm: r.algorithm,
                    run: r.run,
                    seed: r.seed,
                    definition: r.definition,
                    reference_winner: r.reference_winner,
                })
                .collect(),
        };
        let path = dir.join(METADATA_FILE);
        let json = to_json_sig17(&metadata).map_err(|source| RunnerError::Json {
            path: path.clone(),
            source,
        })?;
        fs::write(&path, json + "\n").map_err(|e| RunnerError::io(&path, e))
    }

    fn metadata_line(&self) -> String {
        let c = &self.config;
        let defs: Vec<String> = c
            .algorithms
            .iter()
            .map(|&a| format!("{}:{}", a.tag(), c.definition(a)))
            .collect();
        format!(
            "std=population; rng={RNG_NAME}; seed_mix={SEED_MIX_NAME}; base_seed={}; A={}; T={}; runs={}; c={}; gap={}; alpha_c={}; regret={}",
            c.base_seed,
            c.actions,
            c.horizon,
            c.runs,
            fmt17(c.c),
            fmt17(c.gap),
            fmt17(c.alpha_c),
            defs.join(",")
        )
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| RunnerError::io(path, e))
}

/// Writes a `#` metadata line and hands the rest of the file to a CSV writer.
fn csv_writer(path: &Path, meta: &str) -> Result<csv::Writer<BufWriter<fs::File>>> {
    let mut out = create(path)?;
    writeln!(out, "# {meta}").map_err(|e| RunnerError::io(path, e))?;
    Ok(csv::Writer::from_writer(out))
}

fn finish(path: &Path, w: csv::Writer<BufWriter<fs::File>>) -> Result<()> {
    let mut inner = w
        .into_inner()
        .map_err(|e| RunnerError::io(path, e.into_error()))?;
    inner.flush().map_err(|e| RunnerError::io(path, e))
}

/// Writes aggregate series with the default metadata line.
pub fn write_series(path: &Path, series: &[AggregateSeries]) -> Result<()> {
    write_series_with(path, series, "std=population")
}

fn write_series_with(path: &Path, series: &[AggregateSeries], meta: &str) -> Result<()> {
    let mut w = csv_writer(path, meta)?;
    let err = |e| RunnerError::csv(path, e);
    w.write_record(AGGREGATE_HEADER).map_err(err)?;
    for s in series {
        for k in 0..s.grid.len() {
            let bound = s.bound.as_ref().map_or(String::new(), |b| fmt17(b[k]));
            w.write_record([
                s.scenario.as_str(),
                s.algorithm.tag(),
                &s.grid[k].to_string(),
                &fmt17(s.mean[k]),
                &fmt17(s.std[k]),
                &bound,
            ])
            .map_err(err)?;
        }
    }
    finish(path, w)
}

/// Writes the per-run cumulative regret trajectories.
pub fn write_runs(path: &Path, scenario: ScenarioKind, records: &[RunRecord], meta: &str) -> Result<()> {
    let mut w = csv_writer(path, meta)?;
    let err = |e| RunnerError::csv(path, e);
    w.write_record(RUNS_HEADER).map_err(err)?;
    for r in records {
        for (t, v) in r.grid.iter().zip(&r.cum_regret) {
            w.write_record([
                scenario.as_str(),
                r.algorithm.tag(),
                &r.run.to_string(),
                &t.to_string(),
                &fmt17(*v),
            ])
            .map_err(err)?;
        }
    }
    finish(path, w)
}

/// Writes final seat-selection histograms and strategy vectors.
pub fn write_selections(
    path: &Path,
    scenario: ScenarioKind,
    records: &[RunRecord],
    meta: &str,
) -> Result<()> {
    let mut w = csv_writer(path, meta)?;
    let err = |e| RunnerError::csv(path, e);
    w.write_record(SELECTIONS_HEADER).map_err(err)?;
    let prob = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map_or(String::new(), |v| fmt17(v[i]));
    for r in records {
        for i in 0..r.count_first.len() {
            w.write_record([
                scenario.as_str(),
                r.algorithm.tag(),
                &r.run.to_string(),
                &i.to_string(),
                &r.count_first[i].to_string(),
                &r.count_second[i].to_string(),
                &prob(&r.final_p, i),
                &prob(&r.final_q, i),
            ])
            .map_err(err)?;
        }
    }
    finish(path, w)
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| RunnerError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file))
}

/// Column positions for `names`, failing on the first one absent from the
/// header.
fn column_indices<const N: usize>(
    path: &Path,
    headers: &csv::StringRecord,
    names: [&str; N],
) -> Result<[usize; N]> {
    let mut idx = [0; N];
    for (k, name) in names.iter().enumerate() {
        idx[k] = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| RunnerError::MissingColumn {
                path: path.to_path_buf(),
                column: (*name).to_string(),
            })?;
    }
    Ok(idx)
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    rec: &csv::StringRecord,
    col: usize,
    name: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let line = rec.position().map_or(0, csv::Position::line);
    rec[col].parse().map_err(|e: T::Err| RunnerError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("column `{name}`: {e}"),
    })
}

/// Reads an aggregate CSV back into series, grouped by consecutive
/// `(scenario, algorithm)` rows.
pub fn read_series(path: &Path) -> Result<Vec<AggregateSeries>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| RunnerError::csv(path, e))?.clone();
    let [c_sc, c_alg, c_t, c_mean, c_std, c_bound] = column_indices(path, &headers, AGGREGATE_HEADER)?;
    let mut out: Vec<AggregateSeries> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RunnerError::csv(path, e))?;
        let line = rec.position().map_or(0, csv::Position::line);
        let scenario: ScenarioKind = parse_field(path, &rec, c_sc, "scenario")?;
        let algorithm: Algorithm = parse_field(path, &rec, c_alg, "algorithm")?;
        let t: u64 = parse_field(path, &rec, c_t, "t")?;
        let mean: f64 = parse_field(path, &rec, c_mean, "mean")?;
        let std: f64 = parse_field(path, &rec, c_std, "std")?;
        let bound: Option<f64> = if rec[c_bound].is_empty() {
            None
        } else {
            Some(parse_field(path, &rec, c_bound, "bound")?)
        };
        let same = out
            .last()
            .is_some_and(|s| s.scenario == scenario && s.algorithm == algorithm);
        if !same {
            out.push(AggregateSeries {
                scenario,
                algorithm,
                grid: Vec::new(),
                mean: Vec::new(),
                std: Vec::new(),
                bound: bound.map(|_| Vec::new()),
            });
        }
        let s = out.last_mut().expect("series pushed above");
        if s.grid.last().is_some_and(|&prev| t <= prev) {
            return Err(RunnerError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("t = {t} does not increase"),
            });
        }
        match (&mut s.bound, bound) {
            (Some(b), Some(v)) => b.push(v),
            (None, None) => {}
            _ => {
                return Err(RunnerError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: "bound column must be filled on every row of a series or on none".into(),
                })
            }
        }
        s.grid.push(t);
        s.mean.push(mean);
        s.std.push(std);
    }
    Ok(out)
}

/// One row of a per-run CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub scenario: ScenarioKind,
    pub algorithm: Algorithm,
    pub run: usize,
    pub t: u64,
    pub cum_regret: f64,
}

/// Reads a per-run CSV.
pub fn read_runs(path: &Path) -> Result<Vec<RunRow>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| RunnerError::csv(path, e))?.clone();
    let [c_sc, c_alg, c_run, c_t, c_r] = column_indices(path, &headers, RUNS_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| RunnerError::csv(path, e))?;
            Ok(RunRow {
                scenario: parse_field(path, &rec, c_sc, "scenario")?,
                algorithm: parse_field(path, &rec, c_alg, "algorithm")?,
                run: parse_field(path, &rec, c_run, "run")?,
                t: parse_field(path, &rec, c_t, "t")?,
                cum_regret: parse_field(path, &rec, c_r, "cum_regret")?,
            })
        })
        .collect()
}

/// Rebuilds aggregate series from a per-run CSV, one per
/// `(scenario, algorithm)` in order of first appearance. Bounds are not
/// attached.
pub fn aggregate_runs_file(path: &Path) -> Result<Vec<AggregateSeries>> {
    let rows = read_runs(path)?;
    let mut order: Vec<(ScenarioKind, Algorithm)> = Vec::new();
    let mut groups: BTreeMap<(ScenarioKind, Algorithm), BTreeMap<usize, RunRecord>> = BTreeMap::new();
    for row in rows {
        let key = (row.scenario, row.algorithm);
        if !order.contains(&key) {
            order.push(key);
        }
        let rec = groups.entry(key).or_default().entry(row.run).or_insert_with(|| RunRecord {
            algorithm: row.algorithm,
            run: row.run,
            seed: 0,
            definition: RegretDefinition::default_for(row.scenario, row.algorithm),
            reference_winner: 0,
            grid: Vec::new(),
            cum_regret: Vec::new(),
            count_first: Vec::new(),
            count_second: Vec::new(),
            final_p: None,
            final_q: None,
        });
        rec.grid.push(row.t);
        rec.cum_regret.push(row.cum_regret);
    }
    order
        .into_iter()
        .map(|key| {
            let records: Vec<RunRecord> = groups.remove(&key).unwrap_or_default().into_values().collect();
            aggregate(key.0, &records)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(alg: Algorithm, run: usize, grid: Vec<u64>, cum: Vec<f64>) -> RunRecord {
        RunRecord {
            algorithm: alg,
            run,
            seed: 0,
            definition: RegretDefinition::Borda,
            reference_winner: 0,
            grid,
            cum_regret: cum,
            count_first: vec![],
            count_second: vec![],
            final_p: None,
            final_q: None,
        }
    }

    #[test]
    fn grid_shape() {
        let g = logging_grid(40_000, 400);
        assert_eq!(g.len(), 400);
        assert_eq!(g[0], 100);
        assert_eq!(*g.last().unwrap(), 40_000);
        let g = logging_grid(7, 400);
        assert_eq!(g, (1..=7).collect::<Vec<_>>());
        let g = logging_grid(1000, 3);
        assert_eq!(g, vec![334, 667, 1000]);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn aggregate_examples() {
        let g = vec![1, 2];
        let s = aggregate(
            ScenarioKind::Condorcet,
            &[
                record(Algorithm::Iss, 0, g.clone(), vec![10.0, 100.0]),
                record(Algorithm::Iss, 1, g.clone(), vec![10.0, 200.0]),
            ],
        )
        .unwrap();
        assert_eq!(s.mean, vec![10.0, 150.0]);
        assert_eq!(s.std, vec![0.0, 50.0]);

        let single = aggregate(
            ScenarioKind::Condorcet,
            &[record(Algorithm::Iss, 0, g.clone(), vec![3.0, 4.0])],
        )
        .unwrap();
        assert_eq!(single.mean, vec![3.0, 4.0]);
        assert_eq!(single.std, vec![0.0, 0.0]);

        let err = aggregate(
            ScenarioKind::Condorcet,
            &[
                record(Algorithm::Iss, 0, g.clone(), vec![1.0, 2.0]),
                record(Algorithm::Iss, 1, vec![1, 3], vec![1.0, 2.0]),
            ],
        );
        assert!(matches!(err, Err(RunnerError::Mismatch(_))));
        assert!(aggregate(ScenarioKind::Condorcet, &[]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(ScenarioKind::Condorcet);
        cfg.horizon = 100;
        cfg.algorithms = vec![Algorithm::PartialMonitoring];
        let err = cfg.validate().unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("165.39"), "{err}");

        let mut cfg = ExperimentConfig::new(ScenarioKind::Condorcet);
        cfg.runs = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(ScenarioKind::Borda);
        cfg.actions = 2;
        assert!(cfg.validate().is_err());
        cfg.actions = 3;
        cfg.algorithms = vec![Algorithm::Iss, Algorithm::Iss];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let mut cfg = ExperimentConfig::new(ScenarioKind::Borda);
        cfg.definitions
            .insert(Algorithm::Iss, RegretDefinition::MaximinWinner);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"A\":10"));
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<ExperimentConfig>(&json.replace("\"runs\"", "\"rns\"")).is_err());
    }

    #[test]
    fn seeds_differ_across_algorithms_and_runs() {
        let mut cfg = ExperimentConfig::new(ScenarioKind::Condorcet);
        cfg.horizon = 50;
        cfg.algorithms = vec![Algorithm::TsMaximin];
        let exp = Experiment::new(cfg).unwrap();
        assert_ne!(exp.run_seed(Algorithm::TsMaximin, 0), exp.run_seed(Algorithm::TsMaximin, 1));
        assert_ne!(exp.run_seed(Algorithm::TsMaximin, 0), exp.run_seed(Algorithm::Dts, 0));
    }
}
