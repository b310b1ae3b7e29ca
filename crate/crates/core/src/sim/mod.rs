//! Scenario generation and batch experiments: deterministic random routing
//! problems, trial execution over a parameter sweep, and summary statistics.

mod csv;
mod generate;
mod run;
pub mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::PlannerParams;

pub use csv::{records_csv, summary_csv};
pub use generate::generate_scenario;
pub use run::{run_experiment, summarize, ExperimentRun};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("population {q} exceeds capacity {capacity} of the {rows}x{cols} grid")]
    OverCapacity {
        rows: u16,
        cols: u16,
        q: u64,
        capacity: u64,
    },
    #[error("invalid grid at sweep point {point}: {message}")]
    BadPoint { point: u32, message: String },
    #[error("an experiment needs at least one trial per point")]
    NoTrials,
    #[error("an experiment needs at least one sweep point")]
    NoPoints,
}

/// Which parameter an experiment sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Square grids of growing side length, fixed sensor count.
    GridSize,
    /// Growing sensor count on one fixed grid.
    Population,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::GridSize => "grid_size",
            ExperimentKind::Population => "population",
        }
    }
}

/// A full experiment description: sweep points, shared grid parameters, and
/// planner settings. `points` holds grid side lengths for [`ExperimentKind::GridSize`]
/// and sensor counts for [`ExperimentKind::Population`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub points: Vec<u32>,
    /// Fixed grid shape; population sweeps only.
    pub rows: u16,
    pub cols: u16,
    pub channels: u16,
    /// Fixed sensor count; grid-size sweeps only.
    pub sensors: u32,
    pub trials: u32,
    pub seed: u64,
    pub params: PlannerParams,
    /// Record wall-clock trial time. Off by default so repeated runs emit
    /// byte-identical records.
    pub record_runtime: bool,
}

impl ExperimentSpec {
    pub fn grid_size(sizes: Vec<u32>, sensors: u32, channels: u16) -> Self {
        Self {
            kind: ExperimentKind::GridSize,
            points: sizes,
            rows: 0,
            cols: 0,
            channels,
            sensors,
            trials: 16,
            seed: 0,
            params: PlannerParams::default(),
            record_runtime: false,
        }
    }

    pub fn population(rows: u16, cols: u16, channels: u16, counts: Vec<u32>) -> Self {
        Self {
            kind: ExperimentKind::Population,
            points: counts,
            rows,
            cols,
            channels,
            sensors: 0,
            trials: 16,
            seed: 0,
            params: PlannerParams::default(),
            record_runtime: false,
        }
    }
}

/// One planner trial, exactly as it lands in records.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: ExperimentKind,
    pub rows: u16,
    pub cols: u16,
    pub channels: u16,
    pub q: u32,
    pub trial: u32,
    /// The derived per-trial seed, not the experiment seed.
    pub seed: u64,
    pub solved: bool,
    pub steps: u64,
    pub total_cost: f64,
    pub makespan_s: f64,
    pub runtime_ms: u64,
}

/// Per-point aggregate over the solved trials of one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// The sweep value: side length for grid-size runs, q for population runs.
    pub key: u32,
    pub mean_steps: f64,
    pub std_steps: f64,
    pub solved_fraction: f64,
}
