//! Aggregates over replication batches.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::StrategyKind;
use crate::runner::{RunStatus, RunSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStats {
    /// Runs that finished (aborted runs are excluded).
    pub runs: usize,
    pub aborted: usize,
    pub converged: usize,
    pub converged_by_strategy: BTreeMap<StrategyKind, usize>,
    pub mean_convergence_iteration: Option<f64>,
    pub mean_final_share: BTreeMap<StrategyKind, f64>,
}

impl ConvergenceStats {
    pub fn fraction_converged(&self) -> f64 {
        ratio(self.converged, self.runs)
    }

    pub fn fraction_converged_to(&self, strategy: StrategyKind) -> f64 {
        ratio(
            self.converged_by_strategy.get(&strategy).copied().unwrap_or(0),
            self.runs,
        )
    }

    pub fn final_share(&self, strategy: StrategyKind) -> f64 {
        self.mean_final_share.get(&strategy).copied().unwrap_or(0.0)
    }

    /// Mean final share of the punishing strategies, M plus P.
    pub fn punisher_share(&self) -> f64 {
        self.final_share(StrategyKind::Moralist) + self.final_share(StrategyKind::CooperatorPunisher)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,strategy,value\n");
        out.push_str(&format!("runs,all,{}\n", self.runs));
        out.push_str(&format!("aborted,all,{}\n", self.aborted));
        out.push_str(&format!("fraction_converged,all,{:.6}\n", self.fraction_converged()));
        match self.mean_convergence_iteration {
            Some(m) => out.push_str(&format!("mean_convergence_iteration,all,{m:.6}\n")),
            None => out.push_str("mean_convergence_iteration,all,\n"),
        }
        for s in StrategyKind::REPORT_ORDER {
            out.push_str(&format!(
                "fraction_converged,{},{:.6}\n",
                s.label(),
                self.fraction_converged_to(s)
            ));
        }
        for s in StrategyKind::REPORT_ORDER {
            out.push_str(&format!(
                "mean_final_share,{},{:.6}\n",
                s.label(),
                self.final_share(s)
            ));
        }
        out
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

/// A run counts as converged when its final census is homogeneous.
pub fn convergence_stats(rows: &[RunSummary]) -> ConvergenceStats {
    let finished: Vec<&RunSummary> = rows
        .iter()
        .filter(|r| r.status != RunStatus::Aborted)
        .collect();
    let mut converged_by_strategy = BTreeMap::new();
    let mut iterations = Vec::new();
    for r in &finished {
        if let Some(s) = r.final_census.homogeneous() {
            *converged_by_strategy.entry(s).or_insert(0) += 1;
            if let Some(it) = r.convergence_iteration {
                iterations.push(it as f64);
            }
        }
    }
    let mean_final_share = StrategyKind::REPORT_ORDER
        .into_iter()
        .map(|s| {
            let total: f64 = finished.iter().map(|r| r.final_census.fraction(s)).sum();
            (s, ratio_f(total, finished.len()))
        })
        .collect();
    ConvergenceStats {
        runs: finished.len(),
        aborted: rows.len() - finished.len(),
        converged: converged_by_strategy.values().sum(),
        converged_by_strategy,
        mean_convergence_iteration: (!iterations.is_empty())
            .then(|| iterations.iter().sum::<f64>() / iterations.len() as f64),
        mean_final_share,
    }
}

fn ratio_f(total: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

/// One row per run.
pub fn batch_summary_csv(rows: &[RunSummary]) -> String {
    let mut out = String::from(
        "seed,run_id,status,iterations_executed,convergence_iteration,M,P,E,R1,output_dir,error\n",
    );
    for r in rows {
        let shares: Vec<String> = StrategyKind::REPORT_ORDER
            .iter()
            .map(|s| format!("{:.6}", r.final_census.fraction(*s)))
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.seed,
            r.run_id,
            r.status,
            r.iterations_executed,
            r.convergence_iteration.map(|i| i.to_string()).unwrap_or_default(),
            shares.join(","),
            r.output_dir
                .as_ref()
                .map(|p| csv_field(&p.display().to_string()))
                .unwrap_or_default(),
            r.error.as_deref().map(csv_field).unwrap_or_default(),
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
