//! Agent-based n-player Diner's Dilemma with graded punishment norms.
//!
//! A population is split into dining groups. Each iteration every group orders,
//! splits the bill, runs up to three punishment rounds (defectors, agents who
//! failed to punish them, agents who failed to punish those), and then the
//! whole population updates strategies by pairwise Fermi imitation.
//!
//! Decisions come from a [`backend::DecisionBackend`]: a deterministic rule
//! oracle or an OpenAI-compatible chat endpoint.

pub mod backend;
pub mod config;
pub mod dynamics;
pub mod engine;
pub mod model;
pub mod report;
pub mod rng;
pub mod runner;

pub use backend::{DecisionBackend, LlmBackend, RuleOracle};
pub use config::{preset_config, SimulationConfig};
pub use model::{Census, StrategyKind};
pub use runner::{run_replications, run_simulation, RunOptions, RunResult, RunStatus};
