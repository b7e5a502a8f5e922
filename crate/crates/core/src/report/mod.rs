//! Run artifacts: event log, census trajectories, trend chart and batch aggregates.

pub mod census;
pub mod event_log;
pub mod stats;
pub mod svg;

use std::path::Path;

use crate::model::StrategyKind;
use crate::runner::RunResult;

pub use census::{census_csv, CensusPoint, CensusSeries};
pub use event_log::{
    parse_event_log, read_event_log, render_event_log, write_event_log, LogHeader, LogLine,
    SCHEMA_VERSION,
};
pub use stats::{batch_summary_csv, convergence_stats, ConvergenceStats};
pub use svg::render_trend_svg;

/// Fixed palette shared by the chart and the log header.
pub const STRATEGY_COLORS: [(StrategyKind, &str); 4] = [
    (StrategyKind::Moralist, "#1f77b4"),
    (StrategyKind::CooperatorPunisher, "#2ca02c"),
    (StrategyKind::EasyGoingCooperator, "#ff7f0e"),
    (StrategyKind::ReluctantCooperator, "#d62728"),
];

pub const EVENTS_FILE: &str = "events.jsonl";
pub const CENSUS_FILE: &str = "census.csv";
pub const TREND_FILE: &str = "trend.svg";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed event log: {0}")]
    Format(String),
    #[error("no census points to plot")]
    EmptySeries,
}

/// Writes `events.jsonl`, `census.csv` and `trend.svg` into `dir`, creating it if needed.
pub fn write_run_outputs(dir: &Path, result: &RunResult, title: &str) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir)?;
    let header = LogHeader::new(&result.handle.run_id, result.handle.seed, result.initial_census);
    write_event_log(&dir.join(EVENTS_FILE), &header, &result.records)?;
    write_series_outputs(
        dir,
        &CensusSeries::from_run(&result.initial_census, &result.records),
        title,
    )
}

/// Writes `census.csv` and `trend.svg` for an existing series.
pub fn write_series_outputs(
    dir: &Path,
    series: &CensusSeries,
    title: &str,
) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(CENSUS_FILE), census_csv(series))?;
    std::fs::write(dir.join(TREND_FILE), render_trend_svg(series, title)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::RuleOracle;
    use crate::config::{preset_config, Combination, PresetPunishment};
    use crate::runner::{run_simulation, RunOptions};

    #[test]
    fn outputs_are_written_and_reproducible() {
        let cfg = preset_config(Combination::First, PresetPunishment::SixToOne, 9);
        let run = run_simulation(&cfg, &RuleOracle, RunOptions::default());
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_run_outputs(a.path(), &run, "t").unwrap();
        write_run_outputs(b.path(), &run, "t").unwrap();
        for f in [EVENTS_FILE, CENSUS_FILE, TREND_FILE] {
            let x = std::fs::read(a.path().join(f)).unwrap();
            assert!(!x.is_empty());
            assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
        }
        let csv = std::fs::read_to_string(a.path().join(CENSUS_FILE)).unwrap();
        assert_eq!(csv.lines().count(), 2 + run.records.len());
    }
}
