//! Independent closed-form model of one group under the rule oracle, plus a
//! thin driver that runs the real engine on the same group.
#![allow(dead_code)]

use metanorms::backend::RuleOracle;
use metanorms::config::{ErrorPolicy, GroupSpec, MenuConfig, PunishmentParams};
use metanorms::engine::{play_group, GroupOutcome, StageSettings};
use metanorms::model::{AgentState, StrategyKind};

/// Per-agent counts and utilities predicted without running the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub defects: Vec<bool>,
    pub issued: Vec<usize>,
    pub received: Vec<usize>,
    pub utilities: Vec<f64>,
}

impl Prediction {
    pub fn event_count(&self) -> usize {
        self.issued.iter().sum()
    }
}

/// `agents` holds (strategy, already punished as R1).
pub fn predict(agents: &[(StrategyKind, bool)], menu: &MenuConfig, p: f64, k: f64) -> Prediction {
    use StrategyKind::*;
    let n = agents.len();
    let defects: Vec<bool> = agents
        .iter()
        .map(|(s, punished)| *s == ReluctantCooperator && !punished)
        .collect();
    let n_def = defects.iter().filter(|d| **d).count();
    let is_m: Vec<bool> = agents.iter().map(|(s, _)| *s == Moralist).collect();
    let n_m = is_m.iter().filter(|m| **m).count();
    let punishes_def: Vec<bool> = (0..n)
        .map(|i| !defects[i] && matches!(agents[i].0, Moralist | CooperatorPunisher))
        .collect();
    let n_pd = punishes_def.iter().filter(|x| **x).count();
    let np1: Vec<bool> = (0..n)
        .map(|i| n_def > 0 && !defects[i] && !punishes_def[i])
        .collect();
    let any_np1 = np1.iter().any(|x| *x);
    let np2: Vec<bool> = (0..n)
        .map(|i| any_np1 && !defects[i] && !np1[i] && !is_m[i])
        .collect();
    let n_np1 = np1.iter().filter(|x| **x).count();
    let n_np2 = np2.iter().filter(|x| **x).count();

    let total_cost: f64 = defects
        .iter()
        .map(|d| if *d { menu.premium_cost } else { menu.budget_cost })
        .sum();
    let mut issued = vec![0; n];
    let mut received = vec![0; n];
    let mut utilities = vec![0.0; n];
    for i in 0..n {
        issued[i] = usize::from(punishes_def[i]) * n_def + usize::from(is_m[i]) * (n_np1 + n_np2);
        received[i] = usize::from(defects[i]) * n_pd
            + usize::from(np1[i]) * n_m
            + usize::from(np2[i]) * n_m;
        let value = if defects[i] { menu.premium_value } else { menu.budget_value };
        utilities[i] = value - total_cost / n as f64 - k * issued[i] as f64 - p * received[i] as f64;
    }
    Prediction {
        defects,
        issued,
        received,
        utilities,
    }
}

/// Runs the engine on a fresh group built from `agents`.
pub fn play(agents: &[(StrategyKind, bool)], p: f64, k: f64) -> (GroupOutcome, Vec<AgentState>) {
    let mut members: Vec<AgentState> = agents
        .iter()
        .enumerate()
        .map(|(i, (s, punished))| {
            let mut a = AgentState::new(format!("x{i}"), format!("Diner {i}"), *s, "none");
            a.r1_punished = *punished;
            a
        })
        .collect();
    let group = GroupSpec {
        id: "g".into(),
        location: "hall".into(),
        members: members.iter().map(|a| a.agent_id.clone()).collect(),
    };
    let menu = MenuConfig::default();
    let punishment = PunishmentParams::explicit(p, k);
    let stage = StageSettings {
        iteration: 1,
        location: "hall",
        menu: &menu,
        punishment: &punishment,
        error_policy: ErrorPolicy::AbortRun,
    };
    let outcome = play_group(&group, &mut members, &stage, &RuleOracle).expect("oracle never fails");
    (outcome, members)
}
