//! Strategy-share trajectories and their CSV form.

use serde::{Deserialize, Serialize};

use crate::model::{Census, IterationRecord, StrategyKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusPoint {
    pub iteration: u32,
    /// Shares in `StrategyKind::REPORT_ORDER` (M, P, E, R1).
    pub shares: [f64; 4],
}

impl CensusPoint {
    pub fn from_census(iteration: u32, census: &Census) -> Self {
        let mut shares = [0.0; 4];
        for (slot, s) in shares.iter_mut().zip(StrategyKind::REPORT_ORDER) {
            *slot = census.fraction(s);
        }
        Self { iteration, shares }
    }

    pub fn share(&self, strategy: StrategyKind) -> f64 {
        let i = StrategyKind::REPORT_ORDER
            .iter()
            .position(|s| *s == strategy)
            .expect("all strategies are reported");
        self.shares[i]
    }
}

/// Population shares per iteration, starting with the initial census at iteration 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusSeries {
    pub points: Vec<CensusPoint>,
}

impl CensusSeries {
    pub fn from_run(initial: &Census, records: &[IterationRecord]) -> Self {
        let mut points = vec![CensusPoint::from_census(0, initial)];
        points.extend(
            records
                .iter()
                .map(|r| CensusPoint::from_census(r.iteration, &r.strategy_census)),
        );
        Self { points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn census_csv(series: &CensusSeries) -> String {
    let mut out = String::from("iteration,M,P,E,R1\n");
    for p in &series.points {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            p.iteration, p.shares[0], p.shares[1], p.shares[2], p.shares[3]
        ));
    }
    out
}
