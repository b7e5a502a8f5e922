//! Line-delimited JSON event log.
//!
//! The first line is a header. Each iteration then contributes, in order:
//! `group` (followed by that group's `order` lines) for every group, every
//! `punishment`, one `utility` per agent, one `imitation` per agent, and a
//! closing `census` line. Field order within a line is fixed.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{
    Census, GroupRecord, ImitationOutcome, IterationRecord, MealChoice, OrderEntry,
    PunishmentEvent, PunishmentLevel, StrategyKind, UtilityEntry,
};

use super::{ReportError, STRATEGY_COLORS};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema_version: u32,
    pub run_id: String,
    pub seed: u64,
    pub initial_census: Census,
    pub strategy_colors: Vec<(StrategyKind, String)>,
}

impl LogHeader {
    pub fn new(run_id: impl Into<String>, seed: u64, initial_census: Census) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            run_id: run_id.into(),
            seed,
            initial_census,
            strategy_colors: STRATEGY_COLORS
                .iter()
                .map(|(s, c)| (*s, c.to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogLine {
    Header(LogHeader),
    Group {
        iteration: u32,
        group_id: String,
        location: String,
        bill_total: f64,
    },
    Order {
        iteration: u32,
        group_id: String,
        agent_id: String,
        choice: MealChoice,
        meal_payoff: f64,
    },
    Punishment {
        iteration: u32,
        punisher_id: String,
        target_id: String,
        level: PunishmentLevel,
        cost_to_punisher: f64,
        cost_to_target: f64,
    },
    Utility {
        iteration: u32,
        agent_id: String,
        iteration_utility: f64,
        cumulative_utility: f64,
    },
    Imitation {
        iteration: u32,
        focal_id: String,
        focal_strategy: StrategyKind,
        role_model_id: String,
        role_model_strategy: StrategyKind,
        payoff_diff: f64,
        probability: f64,
        uniform_draw: f64,
        adopted: bool,
    },
    Census {
        iteration: u32,
        census: Census,
    },
}

pub fn record_lines(record: &IterationRecord) -> Vec<LogLine> {
    let it = record.iteration;
    let mut lines = Vec::new();
    for g in &record.groups {
        lines.push(LogLine::Group {
            iteration: it,
            group_id: g.group_id.clone(),
            location: g.location.clone(),
            bill_total: g.bill_total,
        });
        for o in &g.orders {
            lines.push(LogLine::Order {
                iteration: it,
                group_id: g.group_id.clone(),
                agent_id: o.agent_id.clone(),
                choice: o.choice,
                meal_payoff: o.meal_payoff,
            });
        }
    }
    for e in &record.punishment_events {
        lines.push(LogLine::Punishment {
            iteration: e.iteration,
            punisher_id: e.punisher_id.clone(),
            target_id: e.target_id.clone(),
            level: e.level,
            cost_to_punisher: e.cost_to_punisher,
            cost_to_target: e.cost_to_target,
        });
    }
    for u in &record.utilities {
        lines.push(LogLine::Utility {
            iteration: it,
            agent_id: u.agent_id.clone(),
            iteration_utility: u.iteration_utility,
            cumulative_utility: u.cumulative_utility,
        });
    }
    for m in &record.imitation_outcomes {
        lines.push(LogLine::Imitation {
            iteration: it,
            focal_id: m.focal_id.clone(),
            focal_strategy: m.focal_strategy,
            role_model_id: m.role_model_id.clone(),
            role_model_strategy: m.role_model_strategy,
            payoff_diff: m.payoff_diff,
            probability: m.probability,
            uniform_draw: m.uniform_draw,
            adopted: m.adopted,
        });
    }
    lines.push(LogLine::Census {
        iteration: it,
        census: record.strategy_census,
    });
    lines
}

/// The whole log as text, one JSON object per line.
pub fn render_event_log(header: &LogHeader, records: &[IterationRecord]) -> String {
    let mut out = String::new();
    let mut push = |line: &LogLine| {
        out.push_str(&serde_json::to_string(line).expect("log lines serialize"));
        out.push('\n');
    };
    push(&LogLine::Header(header.clone()));
    for r in records {
        for line in record_lines(r) {
            push(&line);
        }
    }
    out
}

/// Writes the log; a partially written file is removed on failure.
pub fn write_event_log(
    path: &Path,
    header: &LogHeader,
    records: &[IterationRecord],
) -> Result<(), ReportError> {
    let text = render_event_log(header, records);
    let result = std::fs::File::create(path).and_then(|mut f| {
        f.write_all(text.as_bytes())?;
        f.flush()
    });
    if let Err(e) = result {
        let _ = std::fs::remove_file(path);
        return Err(ReportError::Io(e));
    }
    Ok(())
}

pub fn parse_event_log(text: &str) -> Result<(LogHeader, Vec<IterationRecord>), ReportError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header = match lines.next() {
        Some((_, l)) => match serde_json::from_str::<LogLine>(l)? {
            LogLine::Header(h) => h,
            _ => return Err(ReportError::Format("first line is not a header".into())),
        },
        None => return Err(ReportError::Format("empty event log".into())),
    };
    if header.schema_version != SCHEMA_VERSION {
        return Err(ReportError::Format(format!(
            "unsupported schema version {}",
            header.schema_version
        )));
    }

    let mut records = Vec::new();
    let mut current: Option<IterationRecord> = None;
    for (n, raw) in lines {
        let line: LogLine = serde_json::from_str(raw)?;
        let it = line_iteration(&line)
            .ok_or_else(|| ReportError::Format(format!("line {}: unexpected header", n + 1)))?;
        let rec = current.get_or_insert_with(|| IterationRecord {
            iteration: it,
            groups: Vec::new(),
            punishment_events: Vec::new(),
            utilities: Vec::new(),
            imitation_outcomes: Vec::new(),
            strategy_census: Census::default(),
        });
        if rec.iteration != it {
            return Err(ReportError::Format(format!(
                "line {}: iteration {it} inside iteration {}",
                n + 1,
                rec.iteration
            )));
        }
        match line {
            LogLine::Header(_) => unreachable!(),
            LogLine::Group {
                group_id,
                location,
                bill_total,
                ..
            } => rec.groups.push(GroupRecord {
                group_id,
                location,
                bill_total,
                orders: Vec::new(),
            }),
            LogLine::Order {
                group_id,
                agent_id,
                choice,
                meal_payoff,
                ..
            } => {
                let group = rec
                    .groups
                    .last_mut()
                    .filter(|g| g.group_id == group_id)
                    .ok_or_else(|| {
                        ReportError::Format(format!("line {}: order outside its group", n + 1))
                    })?;
                group.orders.push(OrderEntry {
                    agent_id,
                    choice,
                    meal_payoff,
                });
            }
            LogLine::Punishment {
                iteration,
                punisher_id,
                target_id,
                level,
                cost_to_punisher,
                cost_to_target,
            } => rec.punishment_events.push(PunishmentEvent {
                iteration,
                punisher_id,
                target_id,
                level,
                cost_to_punisher,
                cost_to_target,
            }),
            LogLine::Utility {
                agent_id,
                iteration_utility,
                cumulative_utility,
                ..
            } => rec.utilities.push(UtilityEntry {
                agent_id,
                iteration_utility,
                cumulative_utility,
            }),
            LogLine::Imitation {
                focal_id,
                focal_strategy,
                role_model_id,
                role_model_strategy,
                payoff_diff,
                probability,
                uniform_draw,
                adopted,
                ..
            } => rec.imitation_outcomes.push(ImitationOutcome {
                focal_id,
                focal_strategy,
                role_model_id,
                role_model_strategy,
                payoff_diff,
                probability,
                uniform_draw,
                adopted,
            }),
            LogLine::Census { census, .. } => {
                rec.strategy_census = census;
                records.push(current.take().expect("record in progress"));
            }
        }
    }
    if current.is_some() {
        return Err(ReportError::Format(
            "log ends inside an iteration (no census line)".into(),
        ));
    }
    Ok((header, records))
}

pub fn read_event_log(path: &Path) -> Result<(LogHeader, Vec<IterationRecord>), ReportError> {
    let mut text = String::new();
    for line in BufReader::new(std::fs::File::open(path)?).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    parse_event_log(&text)
}

fn line_iteration(line: &LogLine) -> Option<u32> {
    match line {
        LogLine::Header(_) => None,
        LogLine::Group { iteration, .. }
        | LogLine::Order { iteration, .. }
        | LogLine::Punishment { iteration, .. }
        | LogLine::Utility { iteration, .. }
        | LogLine::Imitation { iteration, .. }
        | LogLine::Census { iteration, .. } => Some(*iteration),
    }
}
