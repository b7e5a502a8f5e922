//! Prompt templates with `{{name}}` placeholders.
//!
//! Rendering is total: an unbound or malformed placeholder fails before any
//! request is built.

use std::collections::BTreeMap;
use std::path::Path;

use crate::config::PunishmentMode;

use super::{BackendError, DecisionContext, DecisionKind};

const SYSTEM: &str = include_str!("../../templates/system.txt");
const ORDER: &str = include_str!("../../templates/order.txt");
const PUNISH_DEFECTOR: &str = include_str!("../../templates/punish_defector.txt");
const PUNISH_NON_PUNISHER: &str = include_str!("../../templates/punish_non_punisher.txt");
const PUNISH_META: &str = include_str!("../../templates/punish_meta_non_punisher.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub system: String,
    pub order: String,
    pub punish_defector: String,
    pub punish_non_punisher: String,
    pub punish_meta_non_punisher: String,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self {
            system: SYSTEM.to_string(),
            order: ORDER.to_string(),
            punish_defector: PUNISH_DEFECTOR.to_string(),
            punish_non_punisher: PUNISH_NON_PUNISHER.to_string(),
            punish_meta_non_punisher: PUNISH_META.to_string(),
        }
    }
}

impl TemplateSet {
    /// Loads `<name>.txt` files from `dir`; missing files keep the built-in text.
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let mut set = Self::default();
        let slots: [(&str, &mut String); 5] = [
            ("system", &mut set.system),
            ("order", &mut set.order),
            ("punish_defector", &mut set.punish_defector),
            ("punish_non_punisher", &mut set.punish_non_punisher),
            ("punish_meta_non_punisher", &mut set.punish_meta_non_punisher),
        ];
        for (name, slot) in slots {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                *slot = std::fs::read_to_string(&path)?;
            }
        }
        Ok(set)
    }

    pub fn for_kind(&self, kind: DecisionKind) -> &str {
        match kind {
            DecisionKind::Order => &self.order,
            DecisionKind::PunishDefector => &self.punish_defector,
            DecisionKind::PunishNonPunisher => &self.punish_non_punisher,
            DecisionKind::PunishMetaNonPunisher => &self.punish_meta_non_punisher,
        }
    }

    /// System and user messages for one decision.
    pub fn render_messages(&self, ctx: &DecisionContext) -> Result<(String, String), BackendError> {
        let bindings = bindings(ctx);
        let system = render(&self.system, &bindings)?;
        let user = render(self.for_kind(ctx.kind), &bindings)?;
        Ok((system, user))
    }
}

pub fn render(template: &str, bindings: &BTreeMap<&str, String>) -> Result<String, BackendError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find("}}")
            .ok_or_else(|| BackendError::Render("unterminated `{{` placeholder".into()))?;
        let name = after[..end].trim();
        let value = bindings
            .get(name)
            .ok_or_else(|| BackendError::Render(format!("unbound placeholder `{name}`")))?;
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn response_format(ctx: &DecisionContext) -> String {
    match ctx.kind {
        DecisionKind::Order => {
            r#"Reply with JSON: {"decision": "Budget" or "Premium", "reasoning": "<one sentence>"}"#
                .to_string()
        }
        _ if ctx.punishment.mode == PunishmentMode::BackendDecided => {
            r#"Reply with JSON: {"decision": "Punish" or "Abstain", "severity": {"p": <cost to the punished person>, "k": <cost to you>}, "reasoning": "<one sentence>"}. Include "severity" only when you punish."#
                .to_string()
        }
        _ => {
            r#"Reply with JSON: {"decision": "Punish" or "Abstain", "reasoning": "<one sentence>"}"#
                .to_string()
        }
    }
}

fn bindings(ctx: &DecisionContext) -> BTreeMap<&'static str, String> {
    let mut b = BTreeMap::new();
    b.insert("agent_name", ctx.actor.name.clone());
    b.insert("location", ctx.location.clone());
    b.insert("iteration", ctx.iteration.to_string());
    b.insert(
        "lifestyle",
        if ctx.actor.lifestyle.is_empty() {
            "nothing in particular".to_string()
        } else {
            ctx.actor.lifestyle.clone()
        },
    );
    b.insert("strategy_name", ctx.actor.strategy.display_name().to_string());
    b.insert("strategy_label", ctx.actor.strategy.label().to_string());
    b.insert("strategy_description", ctx.actor.strategy_description.clone());
    b.insert("group_size", ctx.roster.len().to_string());

    let roster = if ctx.kind == DecisionKind::Order {
        ctx.roster
            .iter()
            .map(|r| r.name.clone())
            .collect::<Vec<_>>()
            .join(", ")
    } else {
        ctx.roster
            .iter()
            .map(|r| {
                if r.actions.is_empty() {
                    format!("- {}: nothing notable", r.name)
                } else {
                    format!("- {}: {}", r.name, r.actions.join("; "))
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    b.insert("roster", roster);

    let menu = ctx
        .menu
        .map(|m| {
            format!(
                "- Budget meal: costs {} and is worth {} to you\n- Premium meal: costs {} and is worth {} to you",
                m.budget_cost, m.budget_value, m.premium_cost, m.premium_value
            )
        })
        .unwrap_or_default();
    b.insert("menu", menu);

    let r1_status = if ctx.actor.strategy == crate::model::StrategyKind::ReluctantCooperator {
        if ctx.actor.r1_punished {
            "You have already been punished for ordering premium.".to_string()
        } else {
            "You have not been punished for ordering premium so far.".to_string()
        }
    } else {
        String::new()
    };
    b.insert("r1_status", r1_status);

    let (target_name, evidence) = ctx
        .target
        .as_ref()
        .map(|t| (t.name.clone(), t.evidence.clone()))
        .unwrap_or_default();
    b.insert("target_name", target_name);
    b.insert("evidence", evidence);

    let terms = match ctx.punishment.costs() {
        Some((p, k)) => format!(
            "Punishing costs you {k} utility and costs the punished person {p} utility."
        ),
        None => "Punishing has a cost to you and a larger cost to the punished person; you decide both amounts.".to_string(),
    };
    b.insert("punishment_terms", terms);
    b.insert("response_format", response_format(ctx));
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbound_placeholder_fails() {
        let b = BTreeMap::from([("a", "x".to_string())]);
        assert_eq!(render("{{a}}-{{ a }}", &b).unwrap(), "x-x");
        assert!(matches!(render("{{b}}", &b), Err(BackendError::Render(_))));
        assert!(matches!(render("{{a", &b), Err(BackendError::Render(_))));
    }

    #[test]
    fn builtin_templates_bind_fully() {
        let set = TemplateSet::default();
        for ctx in crate::backend::accuracy::ScenarioSuite::generate()
            .scenarios
            .iter()
            .map(|s| &s.context)
        {
            let (system, user) = set.render_messages(ctx).unwrap();
            assert!(system.contains(&ctx.actor.name));
            assert!(!user.contains("{{"));
        }
    }

    #[test]
    fn override_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("order.txt"), "ORDER {{agent_name}} {{missing}}").unwrap();
        let set = TemplateSet::load_dir(dir.path()).unwrap();
        assert_eq!(set.system, TemplateSet::default().system);
        let ctx = &crate::backend::accuracy::ScenarioSuite::generate().scenarios[0].context;
        assert_eq!(ctx.kind, DecisionKind::Order);
        assert!(matches!(set.render_messages(ctx), Err(BackendError::Render(_))));
    }
}
