//! Scores any backend against the rule oracle on a fixed scenario suite.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{MenuConfig, PunishmentParams};
use crate::model::StrategyKind;

use super::{
    oracle_decide, ActorView, Choice, DecisionBackend, DecisionContext, DecisionKind, RosterEntry,
    TargetView,
};

/// Lifestyle variants every scenario is repeated under.
pub const LIFESTYLES: [(&str, &str); 3] = [
    ("athlete", "Trains for marathons and is always hungry after a long run."),
    ("bookworm", "Spends evenings reading and rarely cares what is on the plate."),
    ("gourmet", "Loves fine food and seeks out the most elaborate dishes."),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub lifestyle: String,
    pub context: DecisionContext,
    pub expected: Choice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSuite {
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSuite {
    /// Every strategy x decision kind x valid R1 flag x lifestyle.
    pub fn generate() -> Self {
        let mut scenarios = Vec::new();
        let strategies = [
            StrategyKind::Moralist,
            StrategyKind::CooperatorPunisher,
            StrategyKind::EasyGoingCooperator,
            StrategyKind::ReluctantCooperator,
        ];
        for kind in DecisionKind::ALL {
            for strategy in strategies {
                let flags: &[bool] = if strategy == StrategyKind::ReluctantCooperator {
                    &[false, true]
                } else {
                    &[false]
                };
                for &r1_punished in flags {
                    for (tag, lifestyle) in LIFESTYLES {
                        let context = scenario_context(kind, strategy, r1_punished, lifestyle);
                        let expected = oracle_decide(&context)
                            .expect("suite contexts use explicit punishment")
                            .choice;
                        scenarios.push(Scenario {
                            id: format!(
                                "{kind}-{}-{}-{tag}",
                                strategy.label(),
                                if r1_punished { "punished" } else { "fresh" }
                            ),
                            lifestyle: tag.to_string(),
                            context,
                            expected,
                        });
                    }
                }
            }
        }
        Self { scenarios }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text)
    }
}

fn scenario_context(
    kind: DecisionKind,
    strategy: StrategyKind,
    r1_punished: bool,
    lifestyle: &str,
) -> DecisionContext {
    let others = [("b", "Bao"), ("c", "Carmen"), ("d", "Dmitri")];
    let mut roster: Vec<RosterEntry> = others
        .iter()
        .map(|(id, name)| RosterEntry {
            agent_id: id.to_string(),
            name: name.to_string(),
            actions: Vec::new(),
        })
        .collect();
    let target = match kind {
        DecisionKind::Order => None,
        DecisionKind::PunishDefector => {
            roster[0].actions.push("ordered the premium meal".into());
            Some(TargetView {
                agent_id: "b".into(),
                name: "Bao".into(),
                evidence: "Bao ordered the premium meal".into(),
            })
        }
        DecisionKind::PunishNonPunisher => {
            roster[0].actions.push("ordered the premium meal".into());
            roster[1].actions.push("ordered the budget meal".into());
            Some(TargetView {
                agent_id: "c".into(),
                name: "Carmen".into(),
                evidence: "Carmen did not punish the defector(s): Bao".into(),
            })
        }
        DecisionKind::PunishMetaNonPunisher => {
            roster[0].actions.push("ordered the premium meal".into());
            roster[1].actions.push("ordered the budget meal".into());
            roster[2].actions.push("ordered the budget meal".into());
            Some(TargetView {
                agent_id: "d".into(),
                name: "Dmitri".into(),
                evidence: "Dmitri did not punish the non-punisher(s): Carmen".into(),
            })
        }
    };
    DecisionContext {
        kind,
        iteration: 1,
        location: "pub".into(),
        actor: ActorView {
            agent_id: "a".into(),
            name: "Ash".into(),
            strategy,
            strategy_description: strategy.description().into(),
            lifestyle: lifestyle.into(),
            r1_punished,
        },
        roster,
        menu: (kind == DecisionKind::Order).then(MenuConfig::default),
        target,
        punishment: PunishmentParams::explicit(6.0, 1.0),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub matched: usize,
    pub total: usize,
}

impl Tally {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }

    fn add(&mut self, hit: bool) {
        self.total += 1;
        if hit {
            self.matched += 1;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub backend: String,
    pub overall: Tally,
    pub per_kind: BTreeMap<DecisionKind, Tally>,
    pub per_strategy: BTreeMap<StrategyKind, Tally>,
    pub per_lifestyle: BTreeMap<String, Tally>,
    /// Scenarios whose backend call errored (each counted as a mismatch).
    pub errors: Vec<(String, String)>,
}

impl AccuracyReport {
    pub fn kind(&self, kind: DecisionKind) -> Tally {
        self.per_kind.get(&kind).copied().unwrap_or_default()
    }

    /// `dimension,key,matched,total,accuracy` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dimension,key,matched,total,accuracy\n");
        let mut row = |dim: &str, key: &str, t: &Tally| {
            out.push_str(&format!(
                "{dim},{key},{},{},{:.6}\n",
                t.matched,
                t.total,
                t.accuracy()
            ));
        };
        row("overall", "all", &self.overall);
        for (k, t) in &self.per_kind {
            row("kind", &k.to_string(), t);
        }
        for (s, t) in &self.per_strategy {
            row("strategy", s.label(), t);
        }
        for (l, t) in &self.per_lifestyle {
            row("lifestyle", l, t);
        }
        out
    }
}

pub fn evaluate_accuracy(backend: &dyn DecisionBackend, suite: &ScenarioSuite) -> AccuracyReport {
    let mut report = AccuracyReport {
        backend: backend.name().to_string(),
        ..Default::default()
    };
    for scenario in &suite.scenarios {
        let hit = match backend.decide(&scenario.context) {
            Ok(d) => d.choice == scenario.expected,
            Err(e) => {
                report.errors.push((scenario.id.clone(), e.to_string()));
                false
            }
        };
        report.overall.add(hit);
        report
            .per_kind
            .entry(scenario.context.kind)
            .or_default()
            .add(hit);
        report
            .per_strategy
            .entry(scenario.context.actor.strategy)
            .or_default()
            .add(hit);
        report
            .per_lifestyle
            .entry(scenario.lifestyle.clone())
            .or_default()
            .add(hit);
    }
    report
}
