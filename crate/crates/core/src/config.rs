//! Simulation configuration, validation and the reference presets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{AgentState, StrategyKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MenuConfig {
    pub budget_cost: f64,
    pub budget_value: f64,
    pub premium_cost: f64,
    pub premium_value: f64,
}

impl Default for MenuConfig {
    fn default() -> Self {
        Self {
            budget_cost: 10.0,
            budget_value: 12.0,
            premium_cost: 30.0,
            premium_value: 22.0,
        }
    }
}

impl MenuConfig {
    pub fn cost(&self, choice: crate::model::MealChoice) -> f64 {
        match choice {
            crate::model::MealChoice::Budget => self.budget_cost,
            crate::model::MealChoice::Premium => self.premium_cost,
        }
    }

    pub fn value(&self, choice: crate::model::MealChoice) -> f64 {
        match choice {
            crate::model::MealChoice::Budget => self.budget_value,
            crate::model::MealChoice::Premium => self.premium_value,
        }
    }

    /// Checks `(Δcost)/n < Δvalue < Δcost` for a group of `group_size` diners.
    /// NaN inputs fail every comparison.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn check_dilemma(&self, group_size: usize) -> Result<(), String> {
        let d_cost = self.premium_cost - self.budget_cost;
        let d_value = self.premium_value - self.budget_value;
        if !(d_cost > 0.0 && d_value > 0.0) {
            return Err(format!(
                "premium must cost and be worth more than budget (cost delta {d_cost}, value delta {d_value})"
            ));
        }
        let shared = d_cost / group_size as f64;
        if !(shared < d_value) {
            return Err(format!(
                "value delta {d_value} must exceed the defector's share of the extra cost {shared} (n = {group_size})"
            ));
        }
        if !(d_value < d_cost) {
            return Err(format!(
                "value delta {d_value} must be below the extra cost {d_cost}, otherwise premium is not a defection"
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PunishmentMode {
    Explicit,
    BackendDecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PunishmentParams {
    pub mode: PunishmentMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

impl PunishmentParams {
    pub fn explicit(p: f64, k: f64) -> Self {
        Self {
            mode: PunishmentMode::Explicit,
            p: Some(p),
            k: Some(k),
        }
    }

    pub fn backend_decided() -> Self {
        Self {
            mode: PunishmentMode::BackendDecided,
            p: None,
            k: None,
        }
    }

    /// `(p, k)` when explicit.
    pub fn costs(&self) -> Option<(f64, f64)> {
        match (self.mode, self.p, self.k) {
            (PunishmentMode::Explicit, Some(p), Some(k)) => Some((p, k)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UtilityBasis {
    #[default]
    PerIteration,
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImitationParams {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub utility_basis: UtilityBasis,
}

fn default_beta() -> f64 {
    1.0
}

impl Default for ImitationParams {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            utility_basis: UtilityBasis::PerIteration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSeed {
    pub id: String,
    pub name: String,
    pub strategy: StrategyKind,
    #[serde(default)]
    pub lifestyle: String,
}

impl AgentSeed {
    pub fn to_state(&self) -> AgentState {
        AgentState::new(&self.id, &self.name, self.strategy, &self.lifestyle)
    }
}

/// A fixed dining group and the location it occupies in iteration 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub id: String,
    pub location: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Oracle,
    Llm,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Oracle => f.write_str("oracle"),
            BackendKind::Llm => f.write_str("llm"),
        }
    }
}

/// What the engine does when a punishment decision cannot be obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorPolicy {
    #[default]
    AbortRun,
    AbstainOnFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSettings {
    /// Overridden by `LLM_BASE_URL` when set.
    #[serde(default = "default_base_url")]
    pub base_url: String,
    /// Overridden by `LLM_MODEL` when set.
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    /// Transport retries after the first attempt.
    #[serde(default = "default_transport_retries")]
    pub transport_retries: u32,
    /// Repair prompts sent after an unparseable reply.
    #[serde(default = "default_repair_retries")]
    pub repair_retries: u32,
    #[serde(default = "default_backoff_base_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_backoff_max_ms")]
    pub backoff_max_ms: u64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    /// Directory holding template overrides; built-in templates otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates_dir: Option<PathBuf>,
}

fn default_base_url() -> String {
    "http://localhost:8000/v1".to_string()
}
fn default_model() -> String {
    "meta-llama/Llama-3.3-70B-Instruct".to_string()
}
fn default_temperature() -> f64 {
    0.2
}
fn default_top_p() -> f64 {
    0.9
}
fn default_transport_retries() -> u32 {
    3
}
fn default_repair_retries() -> u32 {
    2
}
fn default_backoff_base_ms() -> u64 {
    250
}
fn default_backoff_max_ms() -> u64 {
    8_000
}
fn default_timeout_secs() -> u64 {
    120
}
fn default_max_in_flight() -> usize {
    1
}

impl Default for LlmSettings {
    fn default() -> Self {
        Self {
            base_url: default_base_url(),
            model: default_model(),
            temperature: default_temperature(),
            top_p: default_top_p(),
            transport_retries: default_transport_retries(),
            repair_retries: default_repair_retries(),
            backoff_base_ms: default_backoff_base_ms(),
            backoff_max_ms: default_backoff_max_ms(),
            timeout_secs: default_timeout_secs(),
            max_in_flight: default_max_in_flight(),
            templates_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    #[serde(default)]
    pub error_policy: ErrorPolicy,
    #[serde(default)]
    pub llm: LlmSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub agents: Vec<AgentSeed>,
    pub groups: Vec<GroupSpec>,
    pub locations: Vec<String>,
    pub iterations: u32,
    #[serde(default)]
    pub menu: MenuConfig,
    pub punishment: PunishmentParams,
    #[serde(default)]
    pub imitation: ImitationParams,
    #[serde(default)]
    pub backend: BackendConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("PartitionError: {0}")]
    Partition(String),
    #[error("DilemmaConditionError: group `{group_id}`: {message}")]
    DilemmaCondition { group_id: String, message: String },
    #[error("BackendModeError: {0}")]
    BackendMode(String),
    #[error("InvalidValue: {0}")]
    Invalid(String),
}

/// Every violated constraint found by [`validate_config`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<ConfigError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
}

impl SimulationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|source| LoadError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn initial_agents(&self) -> Vec<AgentState> {
        self.agents.iter().map(AgentSeed::to_state).collect()
    }

    /// Non-fatal oddities worth reporting.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some((p, k)) = self.punishment.costs() {
            if p < k {
                out.push(format!(
                    "punishment cost to target p={p} is below cost to punisher k={k}"
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<SimulationConfig, ValidationErrors> {
        validate_config(self)
    }
}

/// Returns the config unchanged if every constraint holds, otherwise all violations.
pub fn validate_config(config: &SimulationConfig) -> Result<SimulationConfig, ValidationErrors> {
    let mut errors = Vec::new();

    if config.agents.is_empty() {
        errors.push(ConfigError::Invalid("no agents configured".into()));
    }
    let mut seen = BTreeSet::new();
    for a in &config.agents {
        if !seen.insert(a.id.as_str()) {
            errors.push(ConfigError::Invalid(format!("duplicate agent id `{}`", a.id)));
        }
    }

    check_partition(config, &mut errors);
    check_locations(config, &mut errors);

    if config.iterations == 0 {
        errors.push(ConfigError::Invalid("iterations must be positive".into()));
    }

    let menu = &config.menu;
    if [menu.budget_cost, menu.budget_value, menu.premium_cost, menu.premium_value]
        .iter()
        .any(|v| !v.is_finite())
    {
        errors.push(ConfigError::Invalid("menu values must be finite".into()));
    } else {
        let sizes: BTreeMap<&str, usize> = config
            .groups
            .iter()
            .map(|g| (g.id.as_str(), g.members.len()))
            .collect();
        for (group_id, size) in sizes {
            if size == 0 {
                continue;
            }
            if let Err(message) = menu.check_dilemma(size) {
                errors.push(ConfigError::DilemmaCondition {
                    group_id: group_id.to_string(),
                    message,
                });
            }
        }
    }

    let pun = &config.punishment;
    match pun.mode {
        PunishmentMode::Explicit => match (pun.p, pun.k) {
            (Some(p), Some(k)) => {
                if !(p.is_finite() && k.is_finite() && p >= 0.0 && k >= 0.0) {
                    errors.push(ConfigError::Invalid(format!(
                        "punishment costs must be finite and non-negative (p={p}, k={k})"
                    )));
                }
            }
            _ => errors.push(ConfigError::Invalid(
                "Explicit punishment requires both p and k".into(),
            )),
        },
        PunishmentMode::BackendDecided => {
            if pun.p.is_some() || pun.k.is_some() {
                errors.push(ConfigError::Invalid(
                    "BackendDecided punishment must not set p or k".into(),
                ));
            }
            if config.backend.kind == BackendKind::Oracle {
                errors.push(ConfigError::BackendMode(
                    "BackendDecided punishment requires the llm backend; the rule oracle needs explicit p and k".into(),
                ));
            }
        }
    }

    let beta = config.imitation.beta;
    if !(beta.is_finite() && beta >= 0.0) {
        errors.push(ConfigError::Invalid(format!(
            "imitation beta must be finite and >= 0 (got {beta})"
        )));
    }

    if config.backend.kind == BackendKind::Llm {
        let llm = &config.backend.llm;
        if !(0.0..=2.0).contains(&llm.temperature) {
            errors.push(ConfigError::Invalid(format!(
                "llm temperature {} outside [0, 2]",
                llm.temperature
            )));
        }
        if !(llm.top_p > 0.0 && llm.top_p <= 1.0) {
            errors.push(ConfigError::Invalid(format!(
                "llm top_p {} outside (0, 1]",
                llm.top_p
            )));
        }
        if llm.max_in_flight == 0 {
            errors.push(ConfigError::Invalid("llm max_in_flight must be >= 1".into()));
        }
    }

    if errors.is_empty() {
        for w in config.warnings() {
            log::warn!("{w}");
        }
        Ok(config.clone())
    } else {
        Err(ValidationErrors(errors))
    }
}

fn check_partition(config: &SimulationConfig, errors: &mut Vec<ConfigError>) {
    let known: BTreeSet<&str> = config.agents.iter().map(|a| a.id.as_str()).collect();
    let mut placed: BTreeMap<&str, usize> = BTreeMap::new();
    let mut group_ids = BTreeSet::new();
    for g in &config.groups {
        if !group_ids.insert(g.id.as_str()) {
            errors.push(ConfigError::Partition(format!("duplicate group id `{}`", g.id)));
        }
        if g.members.is_empty() {
            errors.push(ConfigError::Partition(format!("group `{}` is empty", g.id)));
        }
        for m in &g.members {
            if !known.contains(m.as_str()) {
                errors.push(ConfigError::Partition(format!(
                    "group `{}` lists unknown agent `{m}`",
                    g.id
                )));
            }
            *placed.entry(m.as_str()).or_default() += 1;
        }
    }
    let duplicated: Vec<&str> = placed
        .iter()
        .filter(|(_, n)| **n > 1)
        .map(|(id, _)| *id)
        .collect();
    if !duplicated.is_empty() {
        errors.push(ConfigError::Partition(format!(
            "agents in more than one group: {}",
            duplicated.join(", ")
        )));
    }
    let missing: Vec<&str> = config
        .agents
        .iter()
        .map(|a| a.id.as_str())
        .filter(|id| !placed.contains_key(id))
        .collect();
    if !missing.is_empty() {
        errors.push(ConfigError::Partition(format!(
            "agents in no group: {}",
            missing.join(", ")
        )));
    }
    let sizes: BTreeSet<usize> = config.groups.iter().map(|g| g.members.len()).collect();
    if sizes.len() > 1 {
        errors.push(ConfigError::Partition(format!(
            "groups must be equally sized (found sizes {sizes:?})"
        )));
    }
    if config.groups.is_empty() {
        errors.push(ConfigError::Partition("no groups configured".into()));
    }
}

fn check_locations(config: &SimulationConfig, errors: &mut Vec<ConfigError>) {
    if config.groups.len() != config.locations.len() {
        errors.push(ConfigError::Invalid(format!(
            "{} groups but {} locations",
            config.groups.len(),
            config.locations.len()
        )));
    }
    let unique: BTreeSet<&str> = config.locations.iter().map(String::as_str).collect();
    if unique.len() != config.locations.len() {
        errors.push(ConfigError::Invalid("location names must be distinct".into()));
    }
    let mut used = BTreeSet::new();
    for g in &config.groups {
        if !unique.contains(g.location.as_str()) {
            errors.push(ConfigError::Invalid(format!(
                "group `{}` starts at unknown location `{}`",
                g.id, g.location
            )));
        } else if !used.insert(g.location.as_str()) {
            errors.push(ConfigError::Invalid(format!(
                "location `{}` assigned to more than one group",
                g.location
            )));
        }
    }
}

/// The two reference starting populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combination {
    First,
    Second,
}

impl TryFrom<u8> for Combination {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Combination::First),
            2 => Ok(Combination::Second),
            other => Err(format!("combination must be 1 or 2 (got {other})")),
        }
    }
}

/// Punishment settings available for the reference populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetPunishment {
    /// p and k left to the backend.
    None,
    ThreeToOne,
    SixToOne,
}

impl std::str::FromStr for PresetPunishment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PresetPunishment::None),
            "3:1" => Ok(PresetPunishment::ThreeToOne),
            "6:1" => Ok(PresetPunishment::SixToOne),
            other => Err(format!("punishment must be none, 3:1 or 6:1 (got `{other}`)")),
        }
    }
}

impl PresetPunishment {
    pub fn params(self) -> PunishmentParams {
        match self {
            PresetPunishment::None => PunishmentParams::backend_decided(),
            PresetPunishment::ThreeToOne => PunishmentParams::explicit(3.0, 1.0),
            PresetPunishment::SixToOne => PunishmentParams::explicit(6.0, 1.0),
        }
    }
}

const PRESET_PEOPLE: [(&str, &str); 8] = [
    ("Amara Perera", "Runs ten kilometres every morning and eats a large breakfast afterwards."),
    ("Ben Okafor", "Reads three newspapers over coffee and dislikes noisy places."),
    ("Chen Wei", "Freelance photographer who skips lunch when chasing good light."),
    ("Dara Quinn", "Night-shift nurse who is always hungry at odd hours."),
    ("Elif Demir", "Keeps a strict monthly budget and cooks at home on weekdays."),
    ("Farid Haddad", "Amateur chef who likes to try the most elaborate dish on a menu."),
    ("Grace Mensah", "Plays five-a-side football twice a week."),
    ("Hugo Lindqvist", "Retired teacher who spends afternoons in the library."),
];

/// Builds one of the six reference settings (two populations, three punishment variants).
pub fn preset_config(
    combination: Combination,
    punishment: PresetPunishment,
    seed: u64,
) -> SimulationConfig {
    use StrategyKind::*;
    let strategies: [StrategyKind; 8] = match combination {
        Combination::First => [
            Moralist,
            CooperatorPunisher,
            EasyGoingCooperator,
            ReluctantCooperator,
            Moralist,
            Moralist,
            CooperatorPunisher,
            ReluctantCooperator,
        ],
        Combination::Second => [
            ReluctantCooperator,
            ReluctantCooperator,
            EasyGoingCooperator,
            Moralist,
            ReluctantCooperator,
            CooperatorPunisher,
            CooperatorPunisher,
            Moralist,
        ],
    };
    let agents: Vec<AgentSeed> = strategies
        .iter()
        .zip(PRESET_PEOPLE)
        .enumerate()
        .map(|(i, (strategy, (name, lifestyle)))| AgentSeed {
            id: format!("a{}", i + 1),
            name: name.to_string(),
            strategy: *strategy,
            lifestyle: lifestyle.to_string(),
        })
        .collect();
    let locations = vec!["pub".to_string(), "cafe".to_string()];
    let groups = vec![
        GroupSpec {
            id: "g1".into(),
            location: locations[0].clone(),
            members: agents[0..4].iter().map(|a| a.id.clone()).collect(),
        },
        GroupSpec {
            id: "g2".into(),
            location: locations[1].clone(),
            members: agents[4..8].iter().map(|a| a.id.clone()).collect(),
        },
    ];
    let backend = BackendConfig {
        kind: match punishment {
            PresetPunishment::None => BackendKind::Llm,
            _ => BackendKind::Oracle,
        },
        ..BackendConfig::default()
    };
    SimulationConfig {
        agents,
        groups,
        locations,
        iterations: 10,
        menu: MenuConfig::default(),
        punishment: punishment.params(),
        imitation: ImitationParams::default(),
        backend,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Census;

    fn census_of(config: &SimulationConfig) -> Census {
        Census::from_strategies(config.agents.iter().map(|a| a.strategy))
    }

    #[test]
    fn default_preset_validates() {
        let cfg = preset_config(Combination::First, PresetPunishment::SixToOne, 7);
        assert_eq!(validate_config(&cfg).unwrap(), cfg);
        // 20/4 = 5 < 10 < 20
        assert!(MenuConfig::default().check_dilemma(4).is_ok());
    }

    #[test]
    fn menu_violating_upper_bound_is_rejected() {
        let mut cfg = preset_config(Combination::First, PresetPunishment::SixToOne, 7);
        cfg.menu = MenuConfig {
            budget_cost: 10.0,
            budget_value: 12.0,
            premium_cost: 30.0,
            premium_value: 40.0,
        };
        let errs = validate_config(&cfg).unwrap_err().0;
        assert_eq!(errs.len(), 2, "{errs:?}");
        assert!(errs
            .iter()
            .all(|e| matches!(e, ConfigError::DilemmaCondition { .. })));
    }

    #[test]
    fn lower_bound_depends_on_group_size() {
        let menu = MenuConfig::default();
        // n = 2: 20/2 = 10 is not < 10
        assert!(menu.check_dilemma(2).is_err());
        assert!(menu.check_dilemma(3).is_ok());
    }

    #[test]
    fn overlapping_groups_are_a_partition_error() {
        let mut cfg = preset_config(Combination::First, PresetPunishment::SixToOne, 7);
        cfg.groups[0].members = vec!["a1".into(), "a2".into(), "a3".into(), "a4".into()];
        cfg.groups[1].members = vec!["a4".into(), "a5".into(), "a6".into(), "a7".into()];
        let errs = validate_config(&cfg).unwrap_err().0;
        let text: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        assert!(errs.iter().all(|e| matches!(e, ConfigError::Partition(_))));
        assert!(text.iter().any(|t| t.contains("a4")));
        assert!(text.iter().any(|t| t.contains("a8")));
    }

    #[test]
    fn backend_decided_needs_llm() {
        let mut cfg = preset_config(Combination::First, PresetPunishment::None, 7);
        assert_eq!(cfg.punishment.mode, PunishmentMode::BackendDecided);
        assert!(validate_config(&cfg).is_ok());
        cfg.backend.kind = BackendKind::Oracle;
        let errs = validate_config(&cfg).unwrap_err().0;
        assert!(matches!(errs.as_slice(), [ConfigError::BackendMode(_)]));
    }

    #[test]
    fn presets_have_reference_rosters() {
        use StrategyKind::*;
        let c1 = preset_config(Combination::First, PresetPunishment::SixToOne, 0);
        let census = census_of(&c1);
        assert_eq!(
            (census.moralist, census.cooperator_punisher, census.reluctant, census.easy_going),
            (3, 2, 2, 1)
        );
        assert_eq!(c1.punishment.costs(), Some((6.0, 1.0)));
        assert_eq!(c1.iterations, 10);
        assert_eq!(c1.locations, vec!["pub", "cafe"]);
        assert_eq!(c1.imitation.beta, 1.0);
        let g2: Vec<StrategyKind> = c1.groups[1]
            .members
            .iter()
            .map(|id| c1.agents.iter().find(|a| &a.id == id).unwrap().strategy)
            .collect();
        assert_eq!(g2, vec![Moralist, Moralist, CooperatorPunisher, ReluctantCooperator]);

        let c2 = preset_config(Combination::Second, PresetPunishment::ThreeToOne, 0);
        let census = census_of(&c2);
        assert_eq!(
            (census.reluctant, census.cooperator_punisher, census.moralist, census.easy_going),
            (3, 2, 2, 1)
        );
        assert_eq!(c2.punishment.costs(), Some((3.0, 1.0)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cfg = preset_config(Combination::First, PresetPunishment::ThreeToOne, 3);
        let mut text = cfg.to_toml_string();
        text = text.replacen("iterations = 10", "iterations = 10\nbogus = 1", 1);
        assert!(SimulationConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn validation_is_idempotent() {
        let cfg = preset_config(Combination::Second, PresetPunishment::SixToOne, 11);
        let once = validate_config(&cfg).unwrap();
        assert_eq!(validate_config(&once).unwrap(), once);
    }

    #[test]
    fn p_below_k_warns() {
        let mut cfg = preset_config(Combination::First, PresetPunishment::SixToOne, 0);
        cfg.punishment = PunishmentParams::explicit(0.5, 1.0);
        assert_eq!(cfg.warnings().len(), 1);
        assert!(validate_config(&cfg).is_ok());
    }
}
