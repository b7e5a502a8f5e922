//! Deterministic rule oracle: each strategy's definition as a truth table.

use crate::config::PunishmentMode;
use crate::model::StrategyKind;

use super::{BackendError, Choice, Decision, DecisionBackend, DecisionContext, DecisionKind};

/// Decides exactly as the strategy definitions prescribe.
pub fn oracle_decide(ctx: &DecisionContext) -> Result<Decision, BackendError> {
    if ctx.punishment.mode == PunishmentMode::BackendDecided {
        return Err(BackendError::UnsupportedMode(
            "the rule oracle cannot choose punishment severities".into(),
        ));
    }
    let strategy = ctx.actor.strategy;
    let choice = match ctx.kind {
        DecisionKind::Order => {
            if strategy == StrategyKind::ReluctantCooperator && !ctx.actor.r1_punished {
                Choice::Premium
            } else {
                Choice::Budget
            }
        }
        DecisionKind::PunishDefector => punish_if(strategy.punishes_defectors()),
        DecisionKind::PunishNonPunisher | DecisionKind::PunishMetaNonPunisher => {
            punish_if(strategy == StrategyKind::Moralist)
        }
    };
    Ok(Decision {
        choice,
        severity: None,
        rationale: format!("rule: {} {}", strategy.label(), ctx.kind),
    })
}

fn punish_if(yes: bool) -> Choice {
    if yes {
        Choice::Punish
    } else {
        Choice::Abstain
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RuleOracle;

impl DecisionBackend for RuleOracle {
    fn name(&self) -> &str {
        "oracle"
    }

    fn decide(&self, ctx: &DecisionContext) -> Result<Decision, BackendError> {
        oracle_decide(ctx)
    }
}
