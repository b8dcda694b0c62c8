//! Independent checks on schedules: a feasibility validator, an exhaustive
//! optimum for tiny instances, and heuristic-vs-optimum gap reports.

mod exact;
mod random;
mod validate;

pub use exact::{exact_schedule, exact_schedule_rectangles, MAX_ORACLE_COMBINATIONS, MAX_ORACLE_CORES};
pub use random::{random_gap_trials, random_soc, GapTrial};
pub use validate::{validate, validate_assignments, ValidationReport, Violation, ViolationKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, SocSpec};
use crate::scheduler::{build_rectangle_sets, schedule_rectangles};
use crate::wrapper::WrapperConfig;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("exact search limited to {MAX_ORACLE_CORES} cores; instance has {0}")]
    TooManyCores(usize),
    #[error("exact search limited to {MAX_ORACLE_COMBINATIONS} rectangle combinations; instance has {0}")]
    TooManyCombinations(u128),
    #[error("{which} schedule failed validation: {summary}")]
    Invalid { which: &'static str, summary: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub heuristic: u64,
    pub oracle: u64,
    /// `heuristic / oracle`; at least 1.
    pub ratio: f64,
}

/// Heuristic and optimal makespans on the same rectangle sets, both
/// validated first.
pub fn gap_report(soc: &SocSpec, w_max: u32, config: &WrapperConfig) -> Result<GapRow, OracleError> {
    let sets = build_rectangle_sets(soc, w_max, config)?;
    let optimum = exact_schedule_rectangles(soc, &sets, w_max)?;
    let heuristic = schedule_rectangles(soc, &sets, w_max);
    for (which, schedule) in [("heuristic", &heuristic), ("oracle", &optimum)] {
        let report = validate(schedule, &sets, w_max);
        if !report.ok {
            return Err(OracleError::Invalid { which, summary: report.summary() });
        }
    }
    Ok(GapRow {
        heuristic: heuristic.makespan,
        oracle: optimum.makespan,
        ratio: heuristic.makespan as f64 / optimum.makespan as f64,
    })
}
