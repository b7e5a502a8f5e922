//! Domain types shared by the engine, the imitation dynamics and the reports.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four behavioural strategies an agent can carry.
///
/// The wire and CSV encoding is the short label: `P`, `R1`, `E`, `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "P")]
    CooperatorPunisher,
    #[serde(rename = "R1")]
    ReluctantCooperator,
    #[serde(rename = "E")]
    EasyGoingCooperator,
    #[serde(rename = "M")]
    Moralist,
}

impl StrategyKind {
    /// Report order used by the census CSV and the charts.
    pub const REPORT_ORDER: [StrategyKind; 4] = [
        StrategyKind::Moralist,
        StrategyKind::CooperatorPunisher,
        StrategyKind::EasyGoingCooperator,
        StrategyKind::ReluctantCooperator,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::CooperatorPunisher => "P",
            StrategyKind::ReluctantCooperator => "R1",
            StrategyKind::EasyGoingCooperator => "E",
            StrategyKind::Moralist => "M",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            StrategyKind::CooperatorPunisher => "Cooperator-Punisher",
            StrategyKind::ReluctantCooperator => "Reluctant Cooperator",
            StrategyKind::EasyGoingCooperator => "Easy Going Cooperator",
            StrategyKind::Moralist => "Moralist",
        }
    }

    /// Natural-language behaviour given to decision backends.
    pub fn description(self) -> &'static str {
        match self {
            StrategyKind::CooperatorPunisher => {
                "You always order the budget meal. You punish every diner who orders the \
                 premium meal. You do not punish diners for failing to punish others."
            }
            StrategyKind::ReluctantCooperator => {
                "You order the premium meal until someone punishes you for doing so. Once you \
                 have been punished for ordering premium, you order the budget meal from then on. \
                 You never punish anyone."
            }
            StrategyKind::EasyGoingCooperator => {
                "You always order the budget meal. You never punish anyone, for any reason."
            }
            StrategyKind::Moralist => {
                "You always order the budget meal. You punish every diner who orders the premium \
                 meal, every diner who fails to punish such a defector, and every diner who fails \
                 to punish those non-punishers."
            }
        }
    }

    /// True for the strategies that sanction defectors in round 1.
    pub fn punishes_defectors(self) -> bool {
        matches!(
            self,
            StrategyKind::CooperatorPunisher | StrategyKind::Moralist
        )
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy label `{0}` (expected one of P, R1, E, M)")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyKind {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "P" => Ok(StrategyKind::CooperatorPunisher),
            "R1" => Ok(StrategyKind::ReluctantCooperator),
            "E" => Ok(StrategyKind::EasyGoingCooperator),
            "M" => Ok(StrategyKind::Moralist),
            other => Err(UnknownStrategy(other.to_string())),
        }
    }
}

/// A meal order. Premium is the defecting choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MealChoice {
    Budget,
    Premium,
}

impl MealChoice {
    pub fn is_defection(self) -> bool {
        self == MealChoice::Premium
    }
}

impl fmt::Display for MealChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MealChoice::Budget => f.write_str("Budget"),
            MealChoice::Premium => f.write_str("Premium"),
        }
    }
}

/// Mutable per-run state of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub agent_id: String,
    pub name: String,
    pub strategy: StrategyKind,
    pub lifestyle: String,
    pub r1_punished: bool,
    pub iteration_utility: f64,
    pub cumulative_utility: f64,
}

impl AgentState {
    pub fn new(
        agent_id: impl Into<String>,
        name: impl Into<String>,
        strategy: StrategyKind,
        lifestyle: impl Into<String>,
    ) -> Self {
        Self {
            agent_id: agent_id.into(),
            name: name.into(),
            strategy,
            lifestyle: lifestyle.into(),
            r1_punished: false,
            iteration_utility: 0.0,
            cumulative_utility: 0.0,
        }
    }

    /// An R1 agent that has not yet been punished for defecting.
    pub fn is_fresh_r1(&self) -> bool {
        self.strategy == StrategyKind::ReluctantCooperator && !self.r1_punished
    }

    /// Replaces the strategy label. Private punishment history never transfers.
    pub fn adopt(&mut self, strategy: StrategyKind) {
        self.strategy = strategy;
        self.r1_punished = false;
    }
}

/// Which offence a punishment sanctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PunishmentLevel {
    Defection,
    NonPunisher,
    MetaNonPunisher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PunishmentEvent {
    pub iteration: u32,
    pub punisher_id: String,
    pub target_id: String,
    pub level: PunishmentLevel,
    pub cost_to_punisher: f64,
    pub cost_to_target: f64,
}

/// Strategy head-count at an iteration boundary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Census {
    #[serde(rename = "M")]
    pub moralist: usize,
    #[serde(rename = "P")]
    pub cooperator_punisher: usize,
    #[serde(rename = "E")]
    pub easy_going: usize,
    #[serde(rename = "R1")]
    pub reluctant: usize,
}

impl Census {
    pub fn from_strategies<I: IntoIterator<Item = StrategyKind>>(strategies: I) -> Self {
        let mut census = Census::default();
        for s in strategies {
            *census.slot_mut(s) += 1;
        }
        census
    }

    pub fn of_agents(agents: &[AgentState]) -> Self {
        Self::from_strategies(agents.iter().map(|a| a.strategy))
    }

    pub fn count(&self, strategy: StrategyKind) -> usize {
        match strategy {
            StrategyKind::Moralist => self.moralist,
            StrategyKind::CooperatorPunisher => self.cooperator_punisher,
            StrategyKind::EasyGoingCooperator => self.easy_going,
            StrategyKind::ReluctantCooperator => self.reluctant,
        }
    }

    fn slot_mut(&mut self, strategy: StrategyKind) -> &mut usize {
        match strategy {
            StrategyKind::Moralist => &mut self.moralist,
            StrategyKind::CooperatorPunisher => &mut self.cooperator_punisher,
            StrategyKind::EasyGoingCooperator => &mut self.easy_going,
            StrategyKind::ReluctantCooperator => &mut self.reluctant,
        }
    }

    pub fn total(&self) -> usize {
        self.moralist + self.cooperator_punisher + self.easy_going + self.reluctant
    }

    pub fn fraction(&self, strategy: StrategyKind) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.count(strategy) as f64 / total as f64
        }
    }

    /// The single strategy held by the whole population, if any.
    pub fn homogeneous(&self) -> Option<StrategyKind> {
        let nonzero: Vec<_> = StrategyKind::REPORT_ORDER
            .into_iter()
            .filter(|s| self.count(*s) > 0)
            .collect();
        match nonzero.as_slice() {
            [only] => Some(*only),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEntry {
    pub agent_id: String,
    pub choice: MealChoice,
    pub meal_payoff: f64,
}

/// Dilemma outcome of one group in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub group_id: String,
    pub location: String,
    pub bill_total: f64,
    pub orders: Vec<OrderEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityEntry {
    pub agent_id: String,
    pub iteration_utility: f64,
    pub cumulative_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImitationOutcome {
    pub focal_id: String,
    pub focal_strategy: StrategyKind,
    pub role_model_id: String,
    pub role_model_strategy: StrategyKind,
    /// Role model payoff minus focal payoff.
    pub payoff_diff: f64,
    pub probability: f64,
    pub uniform_draw: f64,
    pub adopted: bool,
}

/// Everything that happened to the population in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub groups: Vec<GroupRecord>,
    pub punishment_events: Vec<PunishmentEvent>,
    pub utilities: Vec<UtilityEntry>,
    pub imitation_outcomes: Vec<ImitationOutcome>,
    pub strategy_census: Census,
}
