use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use duelbench_core::environment::{Scenario, ScenarioKind};
use duelbench_core::numfmt::fmt17;
use duelbench_core::policy::Algorithm;
use duelbench_core::preference::{PreferenceMatrix, WinnerReport};
use duelbench_core::regret::{bound_curve, RegretBound, RegretDefinition};
use duelbench_core::runner::{
    aggregate_runs_file, derive_scenario, logging_grid, write_series, Experiment, ExperimentConfig,
    ExperimentResults, DEFAULT_GRID_POINTS,
};
use duelbench_core::Error;

/// Environment variable capping the number of worker threads.
const THREADS_ENV: &str = "DUELBENCH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "duelbench", version, about = "Dueling-bandit experiments and regret bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a scenario and write it as JSON.
    Generate(GenerateArgs),
    /// Run an experiment and write per-run and aggregate CSVs.
    Run(RunArgs),
    /// Evaluate the regret bound curves on a time grid.
    Bounds(BoundsArgs),
    /// Report Copeland, Condorcet, Maximin and Borda winners of a matrix.
    Winners(WinnersArgs),
    /// Rebuild an aggregate CSV from a per-run CSV.
    Aggregate(AggregateArgs),
}

#[derive(Args, Debug)]
struct ScenarioFlags {
    /// Number of actions.
    #[arg(long, default_value_t = 10)]
    actions: usize,
    /// Utility of the top action.
    #[arg(long, default_value_t = 3.0)]
    scale: f64,
    /// Utility gap between the top action and every other action.
    #[arg(long, default_value_t = 1.0)]
    gap: f64,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Scenario kind: condorcet or borda.
    #[arg(long, default_value = "condorcet")]
    scenario: ScenarioKind,
    #[command(flatten)]
    flags: ScenarioFlags,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario JSON file; without it a scenario is generated from the
    /// generation flags and the seed.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Scenario kind to generate when no file is given.
    #[arg(long, default_value = "condorcet")]
    kind: ScenarioKind,
    #[command(flatten)]
    flags: ScenarioFlags,
    /// Comma-separated algorithm tags.
    #[arg(long, value_delimiter = ',', default_value = "ts-maximin,ts-borda,exp3p,pm,iss,dts")]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 40_000)]
    horizon: u64,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Constant of the TS-Borda exploration schedule.
    #[arg(long, default_value_t = 1.0)]
    alpha_c: f64,
    /// DTS confidence-radius constant.
    #[arg(long, default_value_t = duelbench_core::baselines::DEFAULT_A_DTS)]
    a_dts: f64,
    /// Regret definition override, as `algorithm=definition`; repeatable.
    #[arg(long = "definition", value_parser = parse_definition)]
    definitions: Vec<(Algorithm, RegretDefinition)>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Record cumulative regret at every step.
    #[arg(long)]
    full_series: bool,
    /// Draw a fresh scenario for every run index.
    #[arg(long, conflicts_with = "scenario")]
    redraw: bool,
    /// Worker threads (0 uses every core); capped by DUELBENCH_THREADS.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Experiment config JSON; replaces every experiment flag above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, default_value_t = 10)]
    actions: usize,
    #[arg(long, default_value_t = 40_000)]
    horizon: u64,
    /// Constant `c` of the TS-Borda bound.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WinnersArgs {
    /// Scenario JSON, or a JSON array of matrix rows.
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Args, Debug)]
struct AggregateArgs {
    /// Per-run CSV.
    #[arg(long)]
    runs: PathBuf,
    /// Aggregate CSV to write.
    #[arg(long)]
    out: PathBuf,
}

fn parse_definition(s: &str) -> Result<(Algorithm, RegretDefinition), String> {
    let (alg, def) = s
        .split_once('=')
        .ok_or_else(|| format!("expected `algorithm=definition`, got `{s}`"))?;
    Ok((alg.parse()?, def.parse()?))
}

/// Failure of a subcommand, split by exit status.
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn fail<E: Into<Error>>(e: E) -> Failure {
    Failure::from(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Winners(a) => cmd_winners(a),
        Command::Aggregate(a) => cmd_aggregate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let f = &args.flags;
    let scenario =
        derive_scenario(args.scenario, f.actions, f.scale, f.gap, args.seed, 0).map_err(fail)?;
    scenario.write_json(&args.out).map_err(fail)?;
    println!("wrote {} scenario to {}", scenario.kind, args.out.display());
    println!(
        "designated condorcet winner: {}, designated borda winner: {}",
        scenario.designated_condorcet, scenario.designated_borda
    );
    println!("{}", scenario.winners());
    Ok(())
}

fn worker_count(requested: usize) -> Result<usize, Failure> {
    let cap = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::Validation(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))
        })?),
        Err(_) => None,
    };
    let wanted = if requested == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        requested
    };
    Ok(cap.map_or(wanted, |c| wanted.min(c)))
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let threads = worker_count(args.threads)?;
    let experiment = if let Some(path) = &args.config {
        Experiment::new(read_config(path)?).map_err(fail)?
    } else {
        let mut config = ExperimentConfig::new(args.kind);
        config.actions = args.flags.actions;
        config.c = args.flags.scale;
        config.gap = args.flags.gap;
        config.horizon = args.horizon;
        config.runs = args.runs;
        config.base_seed = args.seed;
        config.algorithms = args.algos.clone();
        config.definitions = args.definitions.iter().copied().collect::<BTreeMap<_, _>>();
        config.alpha_c = args.alpha_c;
        config.a_dts = args.a_dts;
        config.grid_points = args.grid_points;
        config.full_series = args.full_series;
        config.redraw_scenario = args.redraw;
        match &args.scenario {
            Some(path) => {
                let scenario = Scenario::read_json(path).map_err(fail)?;
                Experiment::with_scenario(config, scenario).map_err(fail)?
            }
            None => Experiment::new(config).map_err(fail)?,
        }
    };
    let results = experiment.run_all(threads).map_err(fail)?;
    results.write_dir(&args.out).map_err(fail)?;
    print!("{}", summary_table(&results));
    println!("results written to {}", args.out.display());
    Ok(())
}

fn summary_table(results: &ExperimentResults) -> String {
    let c = &results.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} scenario, A = {}, T = {}, runs = {}, seed = {}",
        c.scenario, c.actions, c.horizon, c.runs, c.base_seed
    );
    let _ = writeln!(
        out,
        "{:<24} {:<15} {:>14} {:>12} {:>14}",
        "algorithm", "regret", "mean R(T)", "std", "bound(T)"
    );
    for s in &results.series {
        let bound = s
            .bound
            .as_ref()
            .and_then(|b| b.last())
            .map_or_else(|| "-".to_string(), |b| format!("{b:.2}"));
        let _ = writeln!(
            out,
            "{:<24} {:<15} {:>14.2} {:>12.2} {:>14}",
            s.algorithm.label(),
            c.definition(s.algorithm).tag(),
            s.final_mean(),
            s.std.last().copied().unwrap_or(0.0),
            bound
        );
    }
    out
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), Failure> {
    if args.actions < 2 {
        return Err(Failure::Validation(format!(
            "need at least 2 actions, got {}",
            args.actions
        )));
    }
    if args.horizon == 0 || args.grid_points == 0 {
        return Err(Failure::Validation(
            "horizon and grid points must be positive".into(),
        ));
    }
    if !(args.c.is_finite() && args.c > 0.0) {
        return Err(Failure::Validation(format!("c must be positive, got {}", args.c)));
    }
    let grid = logging_grid(args.horizon, args.grid_points);
    let mut curves = Vec::new();
    for bound in RegretBound::ALL {
        match bound_curve(bound, args.actions, &grid, args.c) {
            Ok(curve) => curves.push(curve),
            Err(e) => eprintln!("warning: omitting {bound} bound: {e}"),
        }
    }
    let mut csv = String::from("t");
    for c in &curves {
        csv.push(',');
        csv.push_str(c.bound.tag());
    }
    csv.push('\n');
    for (k, t) in grid.iter().enumerate() {
        csv.push_str(&t.to_string());
        for c in &curves {
            csv.push(',');
            csv.push_str(&fmt17(c.values[k]));
        }
        csv.push('\n');
    }
    match &args.out {
        Some(path) => fs::write(path, csv)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_winners(args: WinnersArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.scenario)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", args.scenario.display())))?;
    let matrix = match Scenario::from_json(&text) {
        Ok(s) => s.matrix,
        Err(scenario_err) => serde_json::from_str::<PreferenceMatrix>(&text).map_err(|e| {
            Failure::Validation(format!(
                "{}: neither a scenario ({scenario_err}) nor a matrix ({e})",
                args.scenario.display()
            ))
        })?,
    };
    println!("{}", WinnerReport::new(&matrix));
    Ok(())
}

fn cmd_aggregate(args: AggregateArgs) -> Result<(), Failure> {
    let series = aggregate_runs_file(&args.runs).map_err(fail)?;
    write_series(&args.out, &series).map_err(fail)?;
    println!("wrote {} series to {}", series.len(), args.out.display());
    Ok(())
}
