//! Iteration loop, location rotation and replication batches.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::{BackendError, DecisionBackend};
use crate::config::SimulationConfig;
use crate::dynamics::imitation_step;
use crate::engine::{play_group, StageSettings};
use crate::model::{AgentState, Census, IterationRecord};
use crate::report;
use crate::rng::{stream, StreamPurpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Stop after the first iteration that ends with a homogeneous census.
    pub early_stop: bool,
    /// Swap group locations every iteration. Locations are cosmetic for the oracle.
    pub rotate_locations: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            early_stop: false,
            rotate_locations: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Running,
    Converged,
    Completed,
    Aborted,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunHandle {
    pub run_id: String,
    pub seed: u64,
    pub status: RunStatus,
    pub iterations_executed: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub handle: RunHandle,
    pub initial_census: Census,
    pub records: Vec<IterationRecord>,
    pub final_census: Census,
    pub agents: Vec<AgentState>,
    pub error: Option<String>,
}

impl RunResult {
    /// First iteration boundary (0 = start) with a single-strategy census.
    pub fn convergence_iteration(&self) -> Option<u32> {
        if self.initial_census.homogeneous().is_some() {
            return Some(0);
        }
        self.records
            .iter()
            .find(|r| r.strategy_census.homogeneous().is_some())
            .map(|r| r.iteration)
    }
}

/// Stable identifier: hash of the serialized config, which includes the seed.
pub fn run_id(config: &SimulationConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    format!("run-{}-s{}", &hex::encode(digest)[..12], config.seed)
}

fn location_for(config: &SimulationConfig, group: usize, iteration: u32, rotate: bool) -> &str {
    let n = config.locations.len();
    let base = config
        .locations
        .iter()
        .position(|l| *l == config.groups[group].location)
        .unwrap_or(group % n.max(1));
    let shift = if rotate {
        (iteration.saturating_sub(1) as usize) % n.max(1)
    } else {
        0
    };
    &config.locations[(base + shift) % n]
}

/// Runs one simulation. `config` is expected to have passed validation.
///
/// Backend or dynamics failures end the run as `Aborted`; records up to the
/// failing iteration are kept.
pub fn run_simulation(
    config: &SimulationConfig,
    backend: &dyn DecisionBackend,
    options: RunOptions,
) -> RunResult {
    let mut population = config.initial_agents();
    let index: BTreeMap<String, usize> = population
        .iter()
        .enumerate()
        .map(|(i, a)| (a.agent_id.clone(), i))
        .collect();
    let initial_census = Census::of_agents(&population);
    let mut imitation_rng = stream(config.seed, StreamPurpose::Imitation);
    let mut handle = RunHandle {
        run_id: run_id(config),
        seed: config.seed,
        status: RunStatus::Running,
        iterations_executed: 0,
    };
    let mut records = Vec::new();
    let mut error = None;

    'iterations: for iteration in 1..=config.iterations {
        let mut groups = Vec::with_capacity(config.groups.len());
        let mut events = Vec::new();
        for (gi, group) in config.groups.iter().enumerate() {
            let stage = StageSettings {
                iteration,
                location: location_for(config, gi, iteration, options.rotate_locations),
                menu: &config.menu,
                punishment: &config.punishment,
                error_policy: config.backend.error_policy,
            };
            let mut members: Vec<AgentState> = group
                .members
                .iter()
                .map(|id| population[index[id]].clone())
                .collect();
            match play_group(group, &mut members, &stage, backend) {
                Ok(outcome) => {
                    for m in members {
                        let slot = index[&m.agent_id];
                        population[slot] = m;
                    }
                    groups.push(outcome.record);
                    events.extend(outcome.ledger.events);
                }
                Err(e) => {
                    error = Some(e.to_string());
                    break 'iterations;
                }
            }
        }
        let utilities = population
            .iter()
            .map(|a| crate::model::UtilityEntry {
                agent_id: a.agent_id.clone(),
                iteration_utility: a.iteration_utility,
                cumulative_utility: a.cumulative_utility,
            })
            .collect();
        let imitation = match imitation_step(&mut population, &config.imitation, &mut imitation_rng) {
            Ok(outcomes) => outcomes,
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        };
        let census = Census::of_agents(&population);
        records.push(IterationRecord {
            iteration,
            groups,
            punishment_events: events,
            utilities,
            imitation_outcomes: imitation,
            strategy_census: census,
        });
        handle.iterations_executed = iteration;
        if options.early_stop && census.homogeneous().is_some() {
            handle.status = RunStatus::Converged;
            break;
        }
    }

    handle.status = match (&error, handle.status) {
        (Some(_), _) => RunStatus::Aborted,
        (None, RunStatus::Converged) => RunStatus::Converged,
        (None, _) => RunStatus::Completed,
    };
    if let Some(e) = &error {
        log::error!("run {} aborted: {e}", handle.run_id);
    }
    RunResult {
        handle,
        initial_census,
        final_census: Census::of_agents(&population),
        records,
        agents: population,
        error,
    }
}

/// One row of a replication batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub run_id: String,
    pub status: RunStatus,
    pub iterations_executed: u32,
    pub convergence_iteration: Option<u32>,
    pub final_census: Census,
    pub output_dir: Option<PathBuf>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub rows: Vec<RunSummary>,
    pub warnings: Vec<String>,
}

impl BatchSummary {
    pub fn count(&self, status: RunStatus) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }
}

pub type BackendFactory<'a> =
    dyn Fn(u64) -> Result<Box<dyn DecisionBackend + 'a>, BackendError> + Sync + 'a;

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    pub run: RunOptions,
    /// Worker threads; 0 or 1 runs serially.
    pub jobs: usize,
    /// When set, each run writes `<out>/<run_id>/`.
    pub out_dir: Option<PathBuf>,
    pub title: Option<String>,
}

/// Runs one independent simulation per seed. Rows come back in seed-list order.
pub fn run_replications(
    config: &SimulationConfig,
    factory: &BackendFactory<'_>,
    seeds: &[u64],
    options: &BatchOptions,
) -> BatchSummary {
    let mut warnings = Vec::new();
    let mut seen = BTreeMap::new();
    for (i, s) in seeds.iter().enumerate() {
        if let Some(first) = seen.insert(*s, i) {
            warnings.push(format!(
                "duplicate seed {s} at positions {first} and {i}; runs will be identical"
            ));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let one = |seed: u64| -> RunResult {
        let mut cfg = config.clone();
        cfg.seed = seed;
        match factory(seed) {
            Ok(backend) => run_simulation(&cfg, backend.as_ref(), options.run),
            Err(e) => {
                let agents = cfg.initial_agents();
                let census = Census::of_agents(&agents);
                RunResult {
                    handle: RunHandle {
                        run_id: run_id(&cfg),
                        seed,
                        status: RunStatus::Aborted,
                        iterations_executed: 0,
                    },
                    initial_census: census,
                    records: Vec::new(),
                    final_census: census,
                    agents,
                    error: Some(e.to_string()),
                }
            }
        }
    };

    let results: Vec<RunResult> = if options.jobs > 1 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
        {
            Ok(pool) => pool.install(|| seeds.par_iter().map(|s| one(*s)).collect()),
            Err(e) => {
                warnings.push(format!("thread pool unavailable ({e}); running serially"));
                seeds.iter().map(|s| one(*s)).collect()
            }
        }
    } else {
        seeds.iter().map(|s| one(*s)).collect()
    };

    let mut rows = Vec::with_capacity(results.len());
    for result in &results {
        let mut error = result.error.clone();
        let output_dir = match &options.out_dir {
            Some(out) => {
                let dir = out.join(&result.handle.run_id);
                let title = options
                    .title
                    .clone()
                    .unwrap_or_else(|| format!("Strategy shares, seed {}", result.handle.seed));
                match report::write_run_outputs(&dir, result, &title) {
                    Ok(()) => Some(dir),
                    Err(e) => {
                        let msg = format!("writing outputs: {e}");
                        error = Some(match error {
                            Some(prev) => format!("{prev}; {msg}"),
                            None => msg,
                        });
                        None
                    }
                }
            }
            None => None,
        };
        rows.push(RunSummary {
            seed: result.handle.seed,
            run_id: result.handle.run_id.clone(),
            status: result.handle.status,
            iterations_executed: result.handle.iterations_executed,
            convergence_iteration: result.convergence_iteration(),
            final_census: result.final_census,
            output_dir,
            error,
        });
    }
    BatchSummary { rows, warnings }
}

/// Reads one seed per non-empty line; `#` starts a comment.
pub fn read_seed_list(path: &Path) -> std::io::Result<Vec<u64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<u64>().map_err(|e| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("bad seed `{l}`: {e}"),
                )
            })
        })
        .collect()
}
