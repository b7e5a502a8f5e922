//! One Diner's Dilemma iteration for one group: orders, the bill, two punishment
//! rounds and utility accounting.
//!
//! Offence levels are exclusive. A defector is only ever sanctioned for defecting,
//! a round-1 non-punisher only for not punishing, and a meta non-punisher only for
//! not punishing non-punishers. Consequently each (punisher, target) pair yields at
//! most one event per iteration.

use std::collections::{BTreeMap, BTreeSet};

use crate::backend::{
    ActorView, BackendError, Choice, Decision, DecisionBackend, DecisionContext, DecisionKind,
    RosterEntry, TargetView,
};
use crate::config::{ErrorPolicy, GroupSpec, MenuConfig, PunishmentParams};
use crate::model::{
    AgentState, GroupRecord, MealChoice, OrderEntry, PunishmentEvent, PunishmentLevel,
    StrategyKind, UtilityEntry,
};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("{kind} decision for agent `{agent_id}` failed: {source}")]
    Backend {
        agent_id: String,
        kind: DecisionKind,
        #[source]
        source: BackendError,
    },
}

/// Per-iteration settings shared by every stage.
#[derive(Debug, Clone, Copy)]
pub struct StageSettings<'a> {
    pub iteration: u32,
    pub location: &'a str,
    pub menu: &'a MenuConfig,
    pub punishment: &'a PunishmentParams,
    pub error_policy: ErrorPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSheet {
    pub group_id: String,
    /// One choice per member, in member order.
    pub choices: Vec<(String, MealChoice)>,
}

impl OrderSheet {
    pub fn choice_of(&self, agent_id: &str) -> Option<MealChoice> {
        self.choices
            .iter()
            .find(|(id, _)| id == agent_id)
            .map(|(_, c)| *c)
    }

    /// Premium orderers in member order.
    pub fn defectors(&self) -> Vec<String> {
        self.choices
            .iter()
            .filter(|(_, c)| c.is_defection())
            .map(|(id, _)| id.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BillSettlement {
    pub total: f64,
    pub meal_payoffs: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PunishmentLedger {
    pub events: Vec<PunishmentEvent>,
    pub np1: Vec<String>,
    pub np2: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOutcome {
    pub record: GroupRecord,
    pub ledger: PunishmentLedger,
    pub utilities: Vec<UtilityEntry>,
}

fn actor_view(agent: &AgentState) -> ActorView {
    ActorView {
        agent_id: agent.agent_id.clone(),
        name: agent.name.clone(),
        strategy: agent.strategy,
        strategy_description: agent.strategy.description().to_string(),
        lifestyle: agent.lifestyle.clone(),
        r1_punished: agent.r1_punished,
    }
}

fn name_of<'a>(members: &'a [AgentState], id: &'a str) -> &'a str {
    members
        .iter()
        .find(|m| m.agent_id == id)
        .map(|m| m.name.as_str())
        .unwrap_or(id)
}

/// Other diners with whatever they have visibly done so far.
fn roster(
    members: &[AgentState],
    actor: &str,
    orders: Option<&OrderSheet>,
    events: &[PunishmentEvent],
) -> Vec<RosterEntry> {
    members
        .iter()
        .filter(|m| m.agent_id != actor)
        .map(|m| {
            let mut actions = Vec::new();
            if let Some(choice) = orders.and_then(|o| o.choice_of(&m.agent_id)) {
                actions.push(format!("ordered the {} meal", choice.to_string().to_lowercase()));
            }
            for e in events {
                if e.punisher_id == m.agent_id {
                    actions.push(format!(
                        "punished {} ({})",
                        name_of(members, &e.target_id),
                        level_phrase(e.level)
                    ));
                }
                if e.target_id == m.agent_id {
                    actions.push(format!(
                        "was punished by {} ({})",
                        name_of(members, &e.punisher_id),
                        level_phrase(e.level)
                    ));
                }
            }
            RosterEntry {
                agent_id: m.agent_id.clone(),
                name: m.name.clone(),
                actions,
            }
        })
        .collect()
}

fn level_phrase(level: PunishmentLevel) -> &'static str {
    match level {
        PunishmentLevel::Defection => "for ordering premium",
        PunishmentLevel::NonPunisher => "for not punishing a defector",
        PunishmentLevel::MetaNonPunisher => "for not punishing a non-punisher",
    }
}

fn check_choice(
    ctx: &DecisionContext,
    result: Result<Decision, BackendError>,
) -> Result<Decision, BackendError> {
    let decision = result?;
    if !decision.choice.is_valid_for(ctx.kind) {
        return Err(BackendError::Schema(format!(
            "choice {} is not valid for a {} decision",
            decision.choice.as_str(),
            ctx.kind
        )));
    }
    if Decision::severity_required(ctx, decision.choice) {
        match decision.severity {
            Some(s) if s.p.is_finite() && s.k.is_finite() && s.p >= 0.0 && s.k >= 0.0 => {}
            _ => {
                return Err(BackendError::Schema(
                    "a finite non-negative severity is required for backend-decided punishment"
                        .into(),
                ))
            }
        }
    }
    Ok(decision)
}

pub fn collect_orders(
    group: &GroupSpec,
    members: &[AgentState],
    stage: &StageSettings<'_>,
    backend: &dyn DecisionBackend,
) -> Result<OrderSheet, EngineError> {
    let contexts: Vec<DecisionContext> = members
        .iter()
        .map(|m| DecisionContext {
            kind: DecisionKind::Order,
            iteration: stage.iteration,
            location: stage.location.to_string(),
            actor: actor_view(m),
            roster: roster(members, &m.agent_id, None, &[]),
            menu: Some(*stage.menu),
            target: None,
            punishment: *stage.punishment,
        })
        .collect();
    let results = backend.decide_batch(&contexts);
    let mut choices = Vec::with_capacity(members.len());
    for (ctx, result) in contexts.iter().zip(results) {
        let decision = check_choice(ctx, result).map_err(|source| EngineError::Backend {
            agent_id: ctx.actor.agent_id.clone(),
            kind: DecisionKind::Order,
            source,
        })?;
        log::debug!(
            "iter {} {} orders {}: {}",
            stage.iteration,
            ctx.actor.agent_id,
            decision.choice.as_str(),
            decision.rationale
        );
        let meal = decision.choice.meal().expect("checked above");
        choices.push((ctx.actor.agent_id.clone(), meal));
    }
    Ok(OrderSheet {
        group_id: group.id.clone(),
        choices,
    })
}

/// Equal split of the whole bill: `value(own) - total / n`.
pub fn settle_bill(orders: &OrderSheet, menu: &MenuConfig) -> BillSettlement {
    let n = orders.choices.len();
    let total: f64 = orders.choices.iter().map(|(_, c)| menu.cost(*c)).sum();
    let share = if n == 0 { 0.0 } else { total / n as f64 };
    let meal_payoffs: Vec<(String, f64)> = orders
        .choices
        .iter()
        .map(|(id, c)| (id.clone(), menu.value(*c) - share))
        .collect();
    let billed = share * n as f64;
    assert!(
        (billed - total).abs() <= 1e-9 * total.abs().max(1.0),
        "bill split does not cover the total: {billed} vs {total}"
    );
    BillSettlement {
        total,
        meal_payoffs,
    }
}

/// A single punish/abstain request before it is sent to the backend.
struct PunishRequest {
    punisher: usize,
    target: String,
    evidence: String,
}

#[allow(clippy::too_many_arguments)]
fn run_punish_stage(
    kind: DecisionKind,
    level: PunishmentLevel,
    members: &[AgentState],
    orders: &OrderSheet,
    prior_events: &[PunishmentEvent],
    requests: Vec<PunishRequest>,
    stage: &StageSettings<'_>,
    backend: &dyn DecisionBackend,
) -> Result<Vec<PunishmentEvent>, EngineError> {
    let contexts: Vec<DecisionContext> = requests
        .iter()
        .map(|r| {
            let actor = &members[r.punisher];
            DecisionContext {
                kind,
                iteration: stage.iteration,
                location: stage.location.to_string(),
                actor: actor_view(actor),
                roster: roster(members, &actor.agent_id, Some(orders), prior_events),
                menu: None,
                target: Some(TargetView {
                    agent_id: r.target.clone(),
                    name: name_of(members, &r.target).to_string(),
                    evidence: r.evidence.clone(),
                }),
                punishment: *stage.punishment,
            }
        })
        .collect();
    let results = backend.decide_batch(&contexts);
    let mut events = Vec::new();
    for (ctx, result) in contexts.iter().zip(results) {
        let decision = match check_choice(ctx, result) {
            Ok(d) => d,
            Err(source) => match stage.error_policy {
                ErrorPolicy::AbortRun => {
                    return Err(EngineError::Backend {
                        agent_id: ctx.actor.agent_id.clone(),
                        kind,
                        source,
                    })
                }
                ErrorPolicy::AbstainOnFailure => {
                    log::warn!(
                        "iter {} {kind} by {} failed, treating as abstain: {source}",
                        stage.iteration,
                        ctx.actor.agent_id
                    );
                    Decision::new(Choice::Abstain)
                }
            },
        };
        if decision.choice != Choice::Punish {
            continue;
        }
        let (cost_to_target, cost_to_punisher) = match stage.punishment.costs() {
            Some(pk) => pk,
            None => {
                let s = decision.severity.expect("checked above");
                (s.p, s.k)
            }
        };
        let target = ctx.target.as_ref().expect("punish contexts carry a target");
        events.push(PunishmentEvent {
            iteration: stage.iteration,
            punisher_id: ctx.actor.agent_id.clone(),
            target_id: target.agent_id.clone(),
            level,
            cost_to_punisher,
            cost_to_target,
        });
    }
    Ok(events)
}

/// Round 1: every non-defector decides on every defector. Punished R1 defectors convert.
pub fn punishment_round_1(
    members: &mut [AgentState],
    orders: &OrderSheet,
    stage: &StageSettings<'_>,
    backend: &dyn DecisionBackend,
) -> Result<Vec<PunishmentEvent>, EngineError> {
    let defectors = orders.defectors();
    let mut requests = Vec::new();
    for (i, observer) in members.iter().enumerate() {
        if defectors.contains(&observer.agent_id) {
            continue;
        }
        for d in &defectors {
            requests.push(PunishRequest {
                punisher: i,
                target: d.clone(),
                evidence: format!("{} ordered the premium meal", name_of(members, d)),
            });
        }
    }
    let events = run_punish_stage(
        DecisionKind::PunishDefector,
        PunishmentLevel::Defection,
        members,
        orders,
        &[],
        requests,
        stage,
        backend,
    )?;
    for m in members.iter_mut() {
        let punished = events
            .iter()
            .any(|e| e.target_id == m.agent_id && e.level == PunishmentLevel::Defection);
        if punished && m.strategy == StrategyKind::ReluctantCooperator {
            m.r1_punished = true;
        }
    }
    Ok(events)
}

/// Non-defectors that left at least one defector unpunished in round 1.
pub fn classify_non_punishers(
    members: &[AgentState],
    defectors: &[String],
    round1: &[PunishmentEvent],
) -> Vec<String> {
    if defectors.is_empty() {
        return Vec::new();
    }
    members
        .iter()
        .map(|m| &m.agent_id)
        .filter(|id| !defectors.contains(id))
        .filter(|id| {
            defectors.iter().any(|d| {
                !round1.iter().any(|e| {
                    e.level == PunishmentLevel::Defection && &e.punisher_id == *id && &e.target_id == d
                })
            })
        })
        .cloned()
        .collect()
}

fn unpunished_by<'a>(
    observer: &str,
    targets: &'a [String],
    events: &[PunishmentEvent],
    level: PunishmentLevel,
) -> Vec<&'a String> {
    targets
        .iter()
        .filter(|t| {
            !events
                .iter()
                .any(|e| e.level == level && e.punisher_id == observer && &e.target_id == *t)
        })
        .collect()
}

/// Round 2: sanctions for non-punishers, then for those who spared the non-punishers.
/// Returns the round-2 events and the meta non-punisher set.
pub fn metanorm_round_2(
    members: &[AgentState],
    orders: &OrderSheet,
    np1: &[String],
    round1: &[PunishmentEvent],
    stage: &StageSettings<'_>,
    backend: &dyn DecisionBackend,
) -> Result<(Vec<PunishmentEvent>, Vec<String>), EngineError> {
    if np1.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let defectors = orders.defectors();
    let names = |ids: &[&String]| {
        ids.iter()
            .map(|id| name_of(members, id))
            .collect::<Vec<_>>()
            .join(", ")
    };

    let mut requests = Vec::new();
    for (i, observer) in members.iter().enumerate() {
        let id = &observer.agent_id;
        if defectors.contains(id) || np1.contains(id) {
            continue;
        }
        for t in np1 {
            let spared = unpunished_by(t, &defectors, round1, PunishmentLevel::Defection);
            requests.push(PunishRequest {
                punisher: i,
                target: t.clone(),
                evidence: format!(
                    "{} did not punish the defector(s): {}",
                    name_of(members, t),
                    names(&spared)
                ),
            });
        }
    }
    let np_events = run_punish_stage(
        DecisionKind::PunishNonPunisher,
        PunishmentLevel::NonPunisher,
        members,
        orders,
        round1,
        requests,
        stage,
        backend,
    )?;

    let np2: Vec<String> = members
        .iter()
        .map(|m| &m.agent_id)
        .filter(|id| !defectors.contains(id) && !np1.contains(id))
        .filter(|id| !unpunished_by(id, np1, &np_events, PunishmentLevel::NonPunisher).is_empty())
        .cloned()
        .collect();

    let mut visible: Vec<PunishmentEvent> = round1.to_vec();
    visible.extend(np_events.iter().cloned());
    let mut requests = Vec::new();
    for (i, observer) in members.iter().enumerate() {
        let id = &observer.agent_id;
        if defectors.contains(id) || np1.contains(id) || np2.contains(id) {
            continue;
        }
        for t in &np2 {
            let spared = unpunished_by(t, np1, &np_events, PunishmentLevel::NonPunisher);
            requests.push(PunishRequest {
                punisher: i,
                target: t.clone(),
                evidence: format!(
                    "{} did not punish the non-punisher(s): {}",
                    name_of(members, t),
                    names(&spared)
                ),
            });
        }
    }
    let meta_events = run_punish_stage(
        DecisionKind::PunishMetaNonPunisher,
        PunishmentLevel::MetaNonPunisher,
        members,
        orders,
        &visible,
        requests,
        stage,
        backend,
    )?;

    let mut events = np_events;
    events.extend(meta_events);
    Ok((events, np2))
}

/// Meal payoff minus the recorded cost of every punishment given or received.
pub fn apply_utilities(
    members: &mut [AgentState],
    settlement: &BillSettlement,
    events: &[PunishmentEvent],
) -> Vec<UtilityEntry> {
    let payoffs: BTreeMap<&str, f64> = settlement
        .meal_payoffs
        .iter()
        .map(|(id, v)| (id.as_str(), *v))
        .collect();
    members
        .iter_mut()
        .map(|m| {
            let mut u = payoffs.get(m.agent_id.as_str()).copied().unwrap_or(0.0);
            for e in events {
                if e.punisher_id == m.agent_id {
                    u -= e.cost_to_punisher;
                }
                if e.target_id == m.agent_id {
                    u -= e.cost_to_target;
                }
            }
            m.iteration_utility = u;
            m.cumulative_utility += u;
            UtilityEntry {
                agent_id: m.agent_id.clone(),
                iteration_utility: u,
                cumulative_utility: m.cumulative_utility,
            }
        })
        .collect()
}

/// Runs every stage for one group. `members` must be in the group's listed order.
pub fn play_group(
    group: &GroupSpec,
    members: &mut [AgentState],
    stage: &StageSettings<'_>,
    backend: &dyn DecisionBackend,
) -> Result<GroupOutcome, EngineError> {
    let orders = collect_orders(group, members, stage, backend)?;
    let settlement = settle_bill(&orders, stage.menu);
    let round1 = punishment_round_1(members, &orders, stage, backend)?;
    let defectors = orders.defectors();
    let np1 = classify_non_punishers(members, &defectors, &round1);
    let (round2, np2) = metanorm_round_2(members, &orders, &np1, &round1, stage, backend)?;

    let mut events = round1;
    events.extend(round2);
    debug_assert!(levels_exclusive(&defectors, &np1, &np2));
    let utilities = apply_utilities(members, &settlement, &events);

    let orders_out = orders
        .choices
        .iter()
        .zip(&settlement.meal_payoffs)
        .map(|((id, choice), (_, payoff))| OrderEntry {
            agent_id: id.clone(),
            choice: *choice,
            meal_payoff: *payoff,
        })
        .collect();
    Ok(GroupOutcome {
        record: GroupRecord {
            group_id: group.id.clone(),
            location: stage.location.to_string(),
            bill_total: settlement.total,
            orders: orders_out,
        },
        ledger: PunishmentLedger { events, np1, np2 },
        utilities,
    })
}

fn levels_exclusive(d: &[String], np1: &[String], np2: &[String]) -> bool {
    let mut all = BTreeSet::new();
    d.iter().chain(np1).chain(np2).all(|id| all.insert(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::RuleOracle;
    use crate::config::ErrorPolicy;
    use StrategyKind::*;

    fn group_of(strategies: &[(StrategyKind, bool)]) -> (GroupSpec, Vec<AgentState>) {
        let members: Vec<AgentState> = strategies
            .iter()
            .enumerate()
            .map(|(i, (s, punished))| {
                let mut a = AgentState::new(format!("{}{}", s.label(), i), format!("N{i}"), *s, "");
                a.r1_punished = *punished;
                a
            })
            .collect();
        let spec = GroupSpec {
            id: "g".into(),
            location: "pub".into(),
            members: members.iter().map(|m| m.agent_id.clone()).collect(),
        };
        (spec, members)
    }

    fn stage<'a>(menu: &'a MenuConfig, pun: &'a PunishmentParams) -> StageSettings<'a> {
        StageSettings {
            iteration: 1,
            location: "pub",
            menu,
            punishment: pun,
            error_policy: ErrorPolicy::AbortRun,
        }
    }

    fn sheet(choices: &[MealChoice]) -> OrderSheet {
        OrderSheet {
            group_id: "g".into(),
            choices: choices
                .iter()
                .enumerate()
                .map(|(i, c)| (format!("x{i}"), *c))
                .collect(),
        }
    }

    #[test]
    fn oracle_orders() {
        let menu = MenuConfig::default();
        let pun = PunishmentParams::explicit(6.0, 1.0);
        let (g, m) = group_of(&[
            (Moralist, false),
            (CooperatorPunisher, false),
            (EasyGoingCooperator, false),
            (ReluctantCooperator, false),
            (ReluctantCooperator, true),
        ]);
        let sheet = collect_orders(&g, &m, &stage(&menu, &pun), &RuleOracle).unwrap();
        let got: Vec<MealChoice> = sheet.choices.iter().map(|(_, c)| *c).collect();
        use MealChoice::*;
        assert_eq!(got, vec![Budget, Budget, Budget, Premium, Budget]);
    }

    #[test]
    fn bill_examples() {
        use MealChoice::*;
        let menu = MenuConfig::default();
        let s = settle_bill(&sheet(&[Budget; 4]), &menu);
        assert_eq!(s.total, 40.0);
        assert!(s.meal_payoffs.iter().all(|(_, v)| *v == 2.0));

        let s = settle_bill(&sheet(&[Premium, Budget, Budget, Budget]), &menu);
        let v: Vec<f64> = s.meal_payoffs.iter().map(|(_, v)| *v).collect();
        assert_eq!(v, vec![7.0, -3.0, -3.0, -3.0]);

        let s = settle_bill(&sheet(&[Premium; 4]), &menu);
        assert!(s.meal_payoffs.iter().all(|(_, v)| *v == -8.0));
    }

    #[test]
    fn round1_converts_punished_r1() {
        let menu = MenuConfig::default();
        let pun = PunishmentParams::explicit(6.0, 1.0);
        let st = stage(&menu, &pun);
        let (g, mut m) = group_of(&[
            (Moralist, false),
            (CooperatorPunisher, false),
            (EasyGoingCooperator, false),
            (ReluctantCooperator, false),
        ]);
        let orders = collect_orders(&g, &m, &st, &RuleOracle).unwrap();
        let ev = punishment_round_1(&mut m, &orders, &st, &RuleOracle).unwrap();
        let pairs: Vec<(&str, &str)> = ev
            .iter()
            .map(|e| (e.punisher_id.as_str(), e.target_id.as_str()))
            .collect();
        assert_eq!(pairs, vec![("M0", "R13"), ("P1", "R13")]);
        assert!(ev.iter().all(|e| e.cost_to_punisher == 1.0 && e.cost_to_target == 6.0));
        assert!(m[3].r1_punished);

        let np1 = classify_non_punishers(&m, &orders.defectors(), &ev);
        assert_eq!(np1, vec!["E2".to_string()]);
    }

    #[test]
    fn no_punishers_means_no_conversion() {
        let menu = MenuConfig::default();
        let pun = PunishmentParams::explicit(6.0, 1.0);
        let st = stage(&menu, &pun);
        let (g, mut m) = group_of(&[
            (EasyGoingCooperator, false),
            (EasyGoingCooperator, false),
            (ReluctantCooperator, false),
            (ReluctantCooperator, false),
        ]);
        let orders = collect_orders(&g, &m, &st, &RuleOracle).unwrap();
        assert_eq!(orders.defectors().len(), 2);
        let ev = punishment_round_1(&mut m, &orders, &st, &RuleOracle).unwrap();
        assert!(ev.is_empty());
        assert!(!m[2].r1_punished && !m[3].r1_punished);
    }

    #[test]
    fn converted_r1_is_a_non_punisher() {
        let menu = MenuConfig::default();
        let pun = PunishmentParams::explicit(6.0, 1.0);
        let st = stage(&menu, &pun);
        let (g, mut m) = group_of(&[
            (Moralist, false),
            (EasyGoingCooperator, false),
            (ReluctantCooperator, true),
            (ReluctantCooperator, false),
        ]);
        let orders = collect_orders(&g, &m, &st, &RuleOracle).unwrap();
        let ev = punishment_round_1(&mut m, &orders, &st, &RuleOracle).unwrap();
        assert_eq!(ev.len(), 1);
        let np1 = classify_non_punishers(&m, &orders.defectors(), &ev);
        assert_eq!(np1, vec!["E1".to_string(), "R12".to_string()]);
    }

    #[test]
    fn empty_defector_set_gives_empty_np1() {
        let (_, m) = group_of(&[(Moralist, false), (EasyGoingCooperator, false)]);
        assert!(classify_non_punishers(&m, &[], &[]).is_empty());
    }

    #[test]
    fn metanorm_worked_example() {
        let menu = MenuConfig::default();
        let pun = PunishmentParams::explicit(6.0, 1.0);
        let st = stage(&menu, &pun);
        let (g, mut m) = group_of(&[
            (Moralist, false),
            (CooperatorPunisher, false),
            (EasyGoingCooperator, false),
            (ReluctantCooperator, false),
        ]);
        let out = play_group(&g, &mut m, &st, &RuleOracle).unwrap();
        let ev: Vec<(&str, &str, PunishmentLevel)> = out
            .ledger
            .events
            .iter()
            .map(|e| (e.punisher_id.as_str(), e.target_id.as_str(), e.level))
            .collect();
        use PunishmentLevel::*;
        assert_eq!(
            ev,
            vec![
                ("M0", "R13", Defection),
                ("P1", "R13", Defection),
                ("M0", "E2", NonPunisher),
                ("M0", "P1", MetaNonPunisher),
            ]
        );
        assert_eq!(out.ledger.np1, vec!["E2".to_string()]);
        assert_eq!(out.ledger.np2, vec!["P1".to_string()]);
        let u: Vec<f64> = out.utilities.iter().map(|u| u.iteration_utility).collect();
        assert_eq!(u, vec![-6.0, -10.0, -9.0, -5.0]);
    }

    #[test]
    fn full_punishment_leaves_no_non_punishers() {
        let menu = MenuConfig::default();
        let pun = PunishmentParams::explicit(3.0, 1.0);
        let st = stage(&menu, &pun);
        let (g, mut m) = group_of(&[
            (Moralist, false),
            (Moralist, false),
            (CooperatorPunisher, false),
            (ReluctantCooperator, false),
        ]);
        let out = play_group(&g, &mut m, &st, &RuleOracle).unwrap();
        assert_eq!(out.ledger.events.len(), 3);
        assert!(out.ledger.np1.is_empty() && out.ledger.np2.is_empty());
    }

    #[test]
    fn utilities_at_three_to_one() {
        let menu = MenuConfig::default();
        let pun = PunishmentParams::explicit(3.0, 1.0);
        let st = stage(&menu, &pun);
        let (g, mut m) = group_of(&[
            (Moralist, false),
            (CooperatorPunisher, false),
            (EasyGoingCooperator, false),
            (ReluctantCooperator, false),
        ]);
        let out = play_group(&g, &mut m, &st, &RuleOracle).unwrap();
        let u: Vec<f64> = out.utilities.iter().map(|u| u.iteration_utility).collect();
        assert_eq!(u, vec![-6.0, -7.0, -6.0, 1.0]);
        assert_eq!(m[3].cumulative_utility, 1.0);
    }

    #[test]
    fn all_cooperate_pays_two() {
        let menu = MenuConfig::default();
        let pun = PunishmentParams::explicit(6.0, 1.0);
        let st = stage(&menu, &pun);
        let (g, mut m) = group_of(&[
            (Moralist, false),
            (CooperatorPunisher, false),
            (EasyGoingCooperator, false),
            (ReluctantCooperator, true),
        ]);
        let out = play_group(&g, &mut m, &st, &RuleOracle).unwrap();
        assert!(out.ledger.events.is_empty());
        assert!(out.utilities.iter().all(|u| u.iteration_utility == 2.0));
    }
}
