//! Pluggable decision making: the rule oracle, the LLM client and the accuracy harness.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{MenuConfig, PunishmentMode, PunishmentParams};
use crate::model::{MealChoice, StrategyKind};

pub mod accuracy;
pub mod llm;
pub mod oracle;
pub mod prompt;

pub use accuracy::{evaluate_accuracy, AccuracyReport, Scenario, ScenarioSuite};
pub use llm::LlmBackend;
pub use oracle::{oracle_decide, RuleOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecisionKind {
    Order,
    PunishDefector,
    PunishNonPunisher,
    PunishMetaNonPunisher,
}

impl DecisionKind {
    pub const ALL: [DecisionKind; 4] = [
        DecisionKind::Order,
        DecisionKind::PunishDefector,
        DecisionKind::PunishNonPunisher,
        DecisionKind::PunishMetaNonPunisher,
    ];

    pub fn is_punishment(self) -> bool {
        self != DecisionKind::Order
    }
}

impl fmt::Display for DecisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DecisionKind::Order => "Order",
            DecisionKind::PunishDefector => "PunishDefector",
            DecisionKind::PunishNonPunisher => "PunishNonPunisher",
            DecisionKind::PunishMetaNonPunisher => "PunishMetaNonPunisher",
        };
        f.write_str(s)
    }
}

/// The agent being asked to decide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorView {
    pub agent_id: String,
    pub name: String,
    pub strategy: StrategyKind,
    pub strategy_description: String,
    pub lifestyle: String,
    pub r1_punished: bool,
}

/// A fellow diner and what they have visibly done so far this iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub agent_id: String,
    pub name: String,
    pub actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetView {
    pub agent_id: String,
    pub name: String,
    /// Why the target is up for punishment.
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionContext {
    pub kind: DecisionKind,
    pub iteration: u32,
    pub location: String,
    pub actor: ActorView,
    pub roster: Vec<RosterEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu: Option<MenuConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetView>,
    pub punishment: PunishmentParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    Budget,
    Premium,
    Punish,
    Abstain,
}

impl Choice {
    pub fn meal(self) -> Option<MealChoice> {
        match self {
            Choice::Budget => Some(MealChoice::Budget),
            Choice::Premium => Some(MealChoice::Premium),
            _ => None,
        }
    }

    pub fn is_valid_for(self, kind: DecisionKind) -> bool {
        match kind {
            DecisionKind::Order => matches!(self, Choice::Budget | Choice::Premium),
            _ => matches!(self, Choice::Punish | Choice::Abstain),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Choice::Budget => "Budget",
            Choice::Premium => "Premium",
            Choice::Punish => "Punish",
            Choice::Abstain => "Abstain",
        }
    }
}

impl From<MealChoice> for Choice {
    fn from(m: MealChoice) -> Self {
        match m {
            MealChoice::Budget => Choice::Budget,
            MealChoice::Premium => Choice::Premium,
        }
    }
}

/// Cost pair chosen by the backend when punishment is backend-decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Severity {
    pub p: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub choice: Choice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<Severity>,
    #[serde(default)]
    pub rationale: String,
}

impl Decision {
    pub fn new(choice: Choice) -> Self {
        Self {
            choice,
            severity: None,
            rationale: String::new(),
        }
    }

    /// A severity is required exactly for a Punish under backend-decided costs.
    pub fn severity_required(ctx: &DecisionContext, choice: Choice) -> bool {
        choice == Choice::Punish && ctx.punishment.mode == PunishmentMode::BackendDecided
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("TransportError: {0}")]
    Transport(String),
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("SchemaError: {0}")]
    Schema(String),
    #[error("RenderError: {0}")]
    Render(String),
    #[error("UnsupportedMode: {0}")]
    UnsupportedMode(String),
    #[error("backend fault: {0}")]
    Fault(String),
}

/// Source of agent decisions.
pub trait DecisionBackend: Send + Sync {
    fn name(&self) -> &str;

    fn decide(&self, ctx: &DecisionContext) -> Result<Decision, BackendError>;

    /// Decides a stage's worth of contexts; results are returned in input order.
    fn decide_batch(&self, contexts: &[DecisionContext]) -> Vec<Result<Decision, BackendError>> {
        contexts.iter().map(|c| self.decide(c)).collect()
    }
}

impl<T: DecisionBackend + ?Sized> DecisionBackend for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn decide(&self, ctx: &DecisionContext) -> Result<Decision, BackendError> {
        (**self).decide(ctx)
    }
    fn decide_batch(&self, contexts: &[DecisionContext]) -> Vec<Result<Decision, BackendError>> {
        (**self).decide_batch(contexts)
    }
}

impl<T: DecisionBackend + ?Sized> DecisionBackend for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn decide(&self, ctx: &DecisionContext) -> Result<Decision, BackendError> {
        (**self).decide(ctx)
    }
    fn decide_batch(&self, contexts: &[DecisionContext]) -> Vec<Result<Decision, BackendError>> {
        (**self).decide_batch(contexts)
    }
}
