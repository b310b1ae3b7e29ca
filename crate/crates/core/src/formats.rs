//! File interchange: JSON scenario and plan documents, the line-oriented
//! actuator command script, and JSON rendering of oracle reports.
//!
//! Schemas are strict: unknown fields are rejected so golden files cannot
//! drift silently. Serialization and parsing are exact inverses on every
//! well-formed document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::gear::{
    apply_step, ConfigError, CostModel, GearPos, GridConfig, PlanStep, SensorId, Slot, StepError,
    Transfer, WorldState,
};
use crate::oracle::TheoremReport;
use crate::planner::{makespan, Plan, Scenario, ScenarioError, Target};

/// Why a document was rejected.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("grid rejected: {0}")]
    Grid(#[from] ConfigError),
    #[error("sensor id {id} appears twice")]
    DuplicateSensor { id: u32 },
    #[error("target id {id} appears twice")]
    DuplicateTarget { id: u32 },
    #[error("scenario rejected: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("step_count says {declared} but the document holds {actual} steps")]
    StepCountMismatch { declared: usize, actual: usize },
    #[error("plan does not replay: step {index} rejected: {error}")]
    Replay { index: usize, error: StepError },
}

/// JSON document describing one routing problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub grid: GridSpec,
    pub rotation_offset: u16,
    pub sensors: Vec<SensorEntry>,
    pub targets: Vec<TargetEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_model: Option<CostModelSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: u16,
    pub cols: u16,
    pub channels: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorEntry {
    pub id: u32,
    pub gear: [u16; 2],
    pub channel: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetEntry {
    pub id: u32,
    pub gear: [u16; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModelSpec {
    pub rotation_cost_per_degree: f64,
    pub transfer_cost: f64,
}

impl ScenarioFile {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let sensors = scenario
            .start
            .placements
            .iter()
            .map(|(&id, slot)| SensorEntry {
                id: id.0,
                gear: [slot.gear.row, slot.gear.col],
                channel: slot.channel,
            })
            .collect();
        let targets = scenario
            .targets
            .iter()
            .map(|(&id, target)| TargetEntry {
                id: id.0,
                gear: [target.gear.row, target.gear.col],
                channel: target.channel,
            })
            .collect();
        Self {
            grid: GridSpec {
                rows: scenario.config.rows(),
                cols: scenario.config.cols(),
                channels: scenario.config.channels(),
            },
            rotation_offset: scenario.start.offset,
            sensors,
            targets,
            cost_model: Some(CostModelSpec {
                rotation_cost_per_degree: scenario.cost_model.rotation_cost_per_degree,
                transfer_cost: scenario.cost_model.transfer_cost,
            }),
        }
    }

    /// Build and fully validate the scenario this document describes.
    pub fn to_scenario(&self) -> Result<Scenario, FormatError> {
        let config = GridConfig::new(self.grid.rows, self.grid.cols, self.grid.channels)?;
        let mut placements = BTreeMap::new();
        for entry in &self.sensors {
            let slot = Slot::new(GearPos::new(entry.gear[0], entry.gear[1]), entry.channel);
            if placements.insert(SensorId(entry.id), slot).is_some() {
                return Err(FormatError::DuplicateSensor { id: entry.id });
            }
        }
        let mut targets = BTreeMap::new();
        for entry in &self.targets {
            let target = Target {
                gear: GearPos::new(entry.gear[0], entry.gear[1]),
                channel: entry.channel,
            };
            if targets.insert(SensorId(entry.id), target).is_some() {
                return Err(FormatError::DuplicateTarget { id: entry.id });
            }
        }
        let cost_model = self.cost_model.map_or_else(CostModel::default, |m| CostModel {
            rotation_cost_per_degree: m.rotation_cost_per_degree,
            transfer_cost: m.transfer_cost,
        });
        let scenario = Scenario {
            config,
            start: WorldState::new(self.rotation_offset, placements),
            targets,
            cost_model,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema has no unserializable values")
    }
}

/// JSON document holding one finished or abandoned plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub steps: Vec<StepEntry>,
    pub total_cost: f64,
    pub step_count: usize,
    pub solved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepEntry {
    pub rotate: i32,
    pub transfers: Vec<TransferEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferEntry {
    pub sensor: u32,
    pub to_gear: [u16; 2],
    pub to_channel: u16,
}

impl PlanFile {
    pub fn from_plan(plan: &Plan) -> Self {
        let steps = plan
            .steps
            .iter()
            .map(|step| StepEntry {
                rotate: step.rotate,
                transfers: step
                    .transfers
                    .iter()
                    .map(|t| TransferEntry {
                        sensor: t.sensor.0,
                        to_gear: [t.to.gear.row, t.to.gear.col],
                        to_channel: t.to.channel,
                    })
                    .collect(),
            })
            .collect();
        Self {
            steps,
            total_cost: plan.total_cost,
            step_count: plan.step_count,
            solved: plan.solved,
        }
    }

    pub fn to_plan(&self) -> Result<Plan, FormatError> {
        if self.step_count != self.steps.len() {
            return Err(FormatError::StepCountMismatch {
                declared: self.step_count,
                actual: self.steps.len(),
            });
        }
        let steps = self
            .steps
            .iter()
            .map(|entry| {
                let transfers = entry
                    .transfers
                    .iter()
                    .map(|t| Transfer {
                        sensor: SensorId(t.sensor),
                        to: Slot::new(GearPos::new(t.to_gear[0], t.to_gear[1]), t.to_channel),
                    })
                    .collect();
                PlanStep::new(entry.rotate, transfers)
            })
            .collect();
        Ok(Plan {
            steps,
            total_cost: self.total_cost,
            step_count: self.step_count,
            solved: self.solved,
        })
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema has no unserializable values")
    }
}

/// Render a plan as the actuator's line-oriented command script.
///
/// Each rotation phase emits one `ROT` line, each transfer phase one `MOV`
/// line per sensor, all transfers of a step sharing the phase timestamp.
/// Timestamps advance by the cost model, so the terminal `END` line lands
/// exactly on the plan's makespan. An empty plan is an empty script.
pub fn command_script(scenario: &Scenario, plan: &Plan) -> Result<String, FormatError> {
    if plan.steps.is_empty() {
        return Ok(String::new());
    }
    let config = &scenario.config;
    let model = &scenario.cost_model;
    let mut state = scenario.start.clone();
    let mut clock = 0.0f64;
    let mut script = String::new();
    for (index, step) in plan.steps.iter().enumerate() {
        let next = apply_step(config, &state, step)
            .map_err(|error| FormatError::Replay { index, error })?;
        if step.rotate != 0 {
            let degrees = step.rotate as i64 * config.slot_degrees() as i64;
            writeln!(script, "t={clock:.3} ROT {degrees:+}").expect("string writes cannot fail");
            clock += degrees.unsigned_abs() as f64 * model.rotation_cost_per_degree;
        }
        if !step.transfers.is_empty() {
            for transfer in &step.transfers {
                let from = state.placements[&transfer.sensor];
                let to = transfer.to;
                writeln!(
                    script,
                    "t={clock:.3} MOV s{} ({},{},{})->({},{},{})",
                    transfer.sensor.0,
                    from.gear.row,
                    from.gear.col,
                    from.channel,
                    to.gear.row,
                    to.gear.col,
                    to.channel,
                )
                .expect("string writes cannot fail");
            }
            clock += model.transfer_cost;
        }
        state = next;
    }
    let total = makespan(config, &plan.steps, model);
    writeln!(script, "t={total:.3} END").expect("string writes cannot fail");
    Ok(script)
}

/// Render an oracle report as a JSON value, witness plan included when the
/// check produced one.
pub fn theorem_report_json(report: &TheoremReport) -> serde_json::Value {
    let mut doc = json!({
        "claim": report.claim.id(),
        "grid": {
            "rows": report.config.rows(),
            "cols": report.config.cols(),
            "channels": report.config.channels(),
        },
        "holds": report.holds,
        "details": report.details,
    });
    if let Some(witness) = &report.witness {
        doc["witness"] = serde_json::to_value(PlanFile::from_plan(witness))
            .expect("plan documents always serialize");
    }
    doc
}
