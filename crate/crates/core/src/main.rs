use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use metanorms::backend::{
    evaluate_accuracy, BackendError, DecisionBackend, LlmBackend, RuleOracle, ScenarioSuite,
};
use metanorms::config::{
    preset_config, BackendKind, Combination, PresetPunishment, SimulationConfig,
};
use metanorms::report::{self, convergence_stats, batch_summary_csv, read_event_log, CensusSeries};
use metanorms::runner::{
    read_seed_list, run_replications, run_simulation, BatchOptions, RunOptions, RunStatus,
};
use metanorms::StrategyKind;

#[derive(Parser)]
#[command(name = "metanorms", version, about = "Diner's Dilemma simulations with punishment norms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a TOML config.
    Simulate(SimulateArgs),
    /// Write a reference configuration as TOML.
    Preset(PresetArgs),
    /// Run many seeds of a reference setting and aggregate the outcomes.
    Replicate(ReplicateArgs),
    /// Score a decision backend against the rule oracle.
    EvalBackend(EvalArgs),
    /// Rebuild the census table and chart from an event log.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Oracle,
    Llm,
}

impl From<BackendArg> for BackendKind {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Oracle => BackendKind::Oracle,
            BackendArg::Llm => BackendKind::Llm,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the backend named in the config.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Stop as soon as one strategy holds the whole population.
    #[arg(long)]
    early_stop: bool,
    /// Keep each group at its starting location.
    #[arg(long)]
    no_rotation: bool,
    /// Write redacted LLM request/response pairs to this file.
    #[arg(long)]
    trace_llm: Option<PathBuf>,
}

#[derive(Args)]
struct PresetArgs {
    /// Starting population: 1 or 2.
    #[arg(long, value_parser = parse_combination)]
    combination: Combination,
    /// none, 3:1 or 6:1.
    #[arg(long)]
    punishment: PresetPunishment,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplicateArgs {
    #[arg(long, value_parser = parse_combination)]
    combination: Combination,
    #[arg(long)]
    punishment: PresetPunishment,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Runs seeds 1..=N.
    #[arg(long, conflicts_with = "seed_list", required_unless_present = "seed_list")]
    seeds: Option<u64>,
    /// File with one seed per line.
    #[arg(long)]
    seed_list: Option<PathBuf>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    early_stop: bool,
    /// Skip per-run artifacts and write only the batch tables.
    #[arg(long)]
    summary_only: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum, default_value = "oracle")]
    backend: BackendArg,
    /// Scenario suite as JSON; the built-in suite when omitted.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long, default_value = "accuracy.csv")]
    out: PathBuf,
    #[arg(long)]
    trace_llm: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "Strategy shares")]
    title: String,
}

fn parse_combination(s: &str) -> Result<Combination, String> {
    let n: u8 = s.parse().map_err(|_| format!("combination must be 1 or 2 (got `{s}`)"))?;
    Combination::try_from(n)
}

enum Failure {
    Io(String),
    Config(String),
    Backend(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Backend(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Config(m) | Failure::Backend(m) => m,
        }
    }
}

fn io_err(context: &str, path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{context} {}: {e}", path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Preset(a) => preset(a),
        Command::Replicate(a) => replicate(a),
        Command::EvalBackend(a) => eval_backend(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn checked(config: SimulationConfig) -> Result<SimulationConfig, Failure> {
    for w in config.warnings() {
        log::warn!("{w}");
    }
    config.validate().map_err(|e| Failure::Config(e.to_string()))
}

fn build_backend(
    config: &SimulationConfig,
    seed: u64,
    trace: Option<&Path>,
) -> Result<Box<dyn DecisionBackend>, Failure> {
    match config.backend.kind {
        BackendKind::Oracle => Ok(Box::new(RuleOracle)),
        BackendKind::Llm => {
            let mut llm = LlmBackend::from_env(config.backend.llm.clone(), seed)
                .map_err(|e| Failure::Backend(e.to_string()))?;
            if let Some(path) = trace {
                llm = llm
                    .with_trace_file(path.to_path_buf())
                    .map_err(|e| io_err("cannot create trace", path, e))?;
            }
            Ok(Box::new(llm))
        }
    }
}

fn census_line(census: &metanorms::Census) -> String {
    StrategyKind::REPORT_ORDER
        .iter()
        .map(|s| format!("{}={}", s.label(), census.count(*s)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut config =
        SimulationConfig::load(&args.config).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(b) = args.backend {
        config.backend.kind = b.into();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let config = checked(config)?;
    let backend = build_backend(&config, config.seed, args.trace_llm.as_deref())?;
    let options = RunOptions {
        early_stop: args.early_stop,
        rotate_locations: !args.no_rotation,
    };
    let result = run_simulation(&config, backend.as_ref(), options);
    let dir = args.out.join(&result.handle.run_id);
    report::write_run_outputs(&dir, &result, &format!("Strategy shares, seed {}", config.seed))
        .map_err(|e| io_err("cannot write outputs to", &dir, e))?;
    println!("run_id {}", result.handle.run_id);
    println!("status {}", result.handle.status);
    println!("iterations {}", result.handle.iterations_executed);
    println!("final {}", census_line(&result.final_census));
    println!("output {}", dir.display());
    match (result.handle.status, result.error) {
        (RunStatus::Aborted, Some(e)) => Err(Failure::Backend(e)),
        _ => Ok(()),
    }
}

fn preset(args: PresetArgs) -> Result<(), Failure> {
    let config = preset_config(args.combination, args.punishment, args.seed);
    let text = config.to_toml_string();
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_err("cannot write", path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn replicate(args: ReplicateArgs) -> Result<(), Failure> {
    let mut config = preset_config(args.combination, args.punishment, 0);
    if let Some(b) = args.backend {
        config.backend.kind = b.into();
    }
    let config = checked(config)?;
    let seeds: Vec<u64> = match (&args.seed_list, args.seeds) {
        (Some(path), _) => read_seed_list(path).map_err(|e| io_err("cannot read seeds", path, e))?,
        (None, Some(n)) => (1..=n).collect(),
        (None, None) => unreachable!("clap requires one of --seeds or --seed-list"),
    };
    let factory = |seed: u64| -> Result<Box<dyn DecisionBackend>, BackendError> {
        build_backend(&config, seed, None).map_err(|f| BackendError::Fault(f.message().to_string()))
    };
    let options = BatchOptions {
        run: RunOptions {
            early_stop: args.early_stop,
            ..RunOptions::default()
        },
        jobs: args.jobs,
        out_dir: (!args.summary_only).then(|| args.out.clone()),
        title: None,
    };
    let batch = run_replications(&config, &factory, &seeds, &options);
    for w in &batch.warnings {
        log::warn!("{w}");
    }
    std::fs::create_dir_all(&args.out).map_err(|e| io_err("cannot create", &args.out, e))?;
    let summary = args.out.join("summary.csv");
    std::fs::write(&summary, batch_summary_csv(&batch.rows))
        .map_err(|e| io_err("cannot write", &summary, e))?;
    let stats = convergence_stats(&batch.rows);
    let aggregate = args.out.join("aggregate.csv");
    std::fs::write(&aggregate, stats.to_csv()).map_err(|e| io_err("cannot write", &aggregate, e))?;
    println!(
        "runs {} completed {} converged {} aborted {}",
        batch.rows.len(),
        batch.count(RunStatus::Completed),
        batch.count(RunStatus::Converged),
        batch.count(RunStatus::Aborted)
    );
    for s in StrategyKind::REPORT_ORDER {
        println!(
            "{} converged {:.3} mean_final_share {:.3}",
            s.label(),
            stats.fraction_converged_to(s),
            stats.final_share(s)
        );
    }
    println!("output {}", args.out.display());
    if !batch.rows.is_empty() && batch.count(RunStatus::Aborted) == batch.rows.len() {
        return Err(Failure::Backend("every run aborted".into()));
    }
    Ok(())
}

fn eval_backend(args: EvalArgs) -> Result<(), Failure> {
    let suite = match &args.suite {
        Some(path) => ScenarioSuite::load(path).map_err(|e| io_err("cannot read suite", path, e))?,
        None => ScenarioSuite::generate(),
    };
    let mut config = preset_config(Combination::First, PresetPunishment::SixToOne, 0);
    config.backend.kind = args.backend.into();
    let backend = build_backend(&config, 0, args.trace_llm.as_deref())?;
    let report = evaluate_accuracy(backend.as_ref(), &suite);
    std::fs::write(&args.out, report.to_csv()).map_err(|e| io_err("cannot write", &args.out, e))?;
    println!(
        "backend {} accuracy {:.4} ({}/{})",
        report.backend, report.overall.accuracy(), report.overall.matched, report.overall.total
    );
    if !report.errors.is_empty() {
        log::warn!("{} scenarios failed with backend errors", report.errors.len());
        if report.errors.len() == suite.scenarios.len() {
            let (id, e) = &report.errors[0];
            return Err(Failure::Backend(format!("scenario {id}: {e}")));
        }
    }
    Ok(())
}

fn report_cmd(args: ReportArgs) -> Result<(), Failure> {
    let (header, records) = read_event_log(&args.events).map_err(|e| match e {
        report::ReportError::Io(_) => io_err("cannot read", &args.events, e),
        other => Failure::Config(format!("{}: {other}", args.events.display())),
    })?;
    let series = CensusSeries::from_run(&header.initial_census, &records);
    report::write_series_outputs(&args.out, &series, &args.title)
        .map_err(|e| io_err("cannot write outputs to", &args.out, e))?;
    println!("iterations {}", records.len());
    println!("output {}", args.out.display());
    Ok(())
}
