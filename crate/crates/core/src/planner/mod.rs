//! Sensor routing: problem statement, plan representation, and the two
//! planners (optimal A* and scalable greedy).

mod cost;
mod exact;
mod greedy;
mod search;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gear::{
    apply_step, validate_state, CostModel, GearPos, GridConfig, PlanStep, SensorId, Slot,
    StateViolation, StepError, WorldState,
};

pub use cost::{makespan, step_cost, CostTotals};
pub use exact::plan_exact;
pub use greedy::plan_greedy;
pub use search::{
    candidate_transfers, heuristic, remaining_distance, rotation_reach, sensor_distance,
    successors, Successor,
};

/// Where a sensor must end up. Gear-level targets accept any channel on the
/// gear; channel-level targets name one slot exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub gear: GearPos,
    pub channel: Option<u16>,
}

impl Target {
    pub fn gear(gear: GearPos) -> Self {
        Self {
            gear,
            channel: None,
        }
    }

    pub fn slot(slot: Slot) -> Self {
        Self {
            gear: slot.gear,
            channel: Some(slot.channel),
        }
    }

    pub fn satisfied_by(&self, slot: &Slot) -> bool {
        slot.gear == self.gear && self.channel.map_or(true, |k| k == slot.channel)
    }
}

/// A routing problem: platform, initial state, per-sensor goals, and the
/// cost model plans are scored under.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: GridConfig,
    pub start: WorldState,
    pub targets: BTreeMap<SensorId, Target>,
    pub cost_model: CostModel,
}

/// Scenario rejection reasons.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("start state invalid: {0:?}")]
    StartInvalid(Vec<StateViolation>),
    #[error("sensor {sensor} has no target")]
    MissingTarget { sensor: SensorId },
    #[error("target given for unknown sensor {sensor}")]
    OrphanTarget { sensor: SensorId },
    #[error("target of sensor {sensor} lies outside the grid")]
    TargetOutOfRange { sensor: SensorId },
    #[error("sensors {first} and {second} contend for the same destination")]
    TargetCollision { first: SensorId, second: SensorId },
    #[error("gear ({},{}) is targeted by {count} sensors but offers {channels} channels", gear.row, gear.col)]
    TargetOverload {
        gear: GearPos,
        count: usize,
        channels: u16,
    },
}

impl Scenario {
    /// Check start validity and target well-formedness.
    ///
    /// Distinct sensors may share a destination gear as long as the gear
    /// offers a channel for each of them and any named channels differ;
    /// anything looser cannot be satisfied by one final state.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        validate_state(&self.config, &self.start).map_err(ScenarioError::StartInvalid)?;
        for &sensor in self.start.placements.keys() {
            if !self.targets.contains_key(&sensor) {
                return Err(ScenarioError::MissingTarget { sensor });
            }
        }
        for (&sensor, target) in &self.targets {
            if !self.start.placements.contains_key(&sensor) {
                return Err(ScenarioError::OrphanTarget { sensor });
            }
            let in_range = self.config.contains(&target.gear)
                && target.channel.map_or(true, |k| k < self.config.channels());
            if !in_range {
                return Err(ScenarioError::TargetOutOfRange { sensor });
            }
        }
        let mut by_gear: BTreeMap<GearPos, Vec<(SensorId, Option<u16>)>> = BTreeMap::new();
        for (&sensor, target) in &self.targets {
            by_gear
                .entry(target.gear)
                .or_default()
                .push((sensor, target.channel));
        }
        for (gear, group) in by_gear {
            if group.len() > self.config.channels() as usize {
                return Err(ScenarioError::TargetOverload {
                    gear,
                    count: group.len(),
                    channels: self.config.channels(),
                });
            }
            for (i, &(first, a)) in group.iter().enumerate() {
                for &(second, b) in group.iter().skip(i + 1) {
                    if let (Some(x), Some(y)) = (a, b) {
                        if x == y {
                            return Err(ScenarioError::TargetCollision { first, second });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// True when every sensor satisfies its target in `state`.
    pub fn targets_met(&self, state: &WorldState) -> bool {
        self.targets.iter().all(|(sensor, target)| {
            state
                .placements
                .get(sensor)
                .is_some_and(|slot| target.satisfied_by(slot))
        })
    }
}

/// Knobs bounding the planners. Budgets scale with the gear count: the
/// defaults allow 64 steps and 8 consecutive stalls per gear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    /// A* node-expansion budget.
    pub max_expansions: u64,
    /// Greedy step budget; defaults to 64 * rows * cols.
    pub step_budget: Option<u64>,
    /// Greedy consecutive-stall tolerance; defaults to 8 * rows * cols.
    pub stall_limit: Option<u64>,
    /// Most transfer subsets kept per successor expansion.
    pub successor_cap: usize,
    /// Seed for the greedy planner's stall-escape moves.
    pub seed: u64,
    /// Extra greedy attempts under derived seeds when the first run fails.
    pub restarts: u32,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            max_expansions: 1_000_000,
            step_budget: None,
            stall_limit: None,
            successor_cap: 256,
            seed: 0,
            restarts: 0,
        }
    }
}

impl PlannerParams {
    pub fn step_budget_for(&self, config: &GridConfig) -> u64 {
        self.step_budget
            .unwrap_or(64 * config.gear_count() as u64)
    }

    pub fn stall_limit_for(&self, config: &GridConfig) -> u64 {
        self.stall_limit.unwrap_or(8 * config.gear_count() as u64)
    }
}

/// A finished (or abandoned) route: ordered steps plus summary figures.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub total_cost: f64,
    pub step_count: usize,
    pub solved: bool,
}

impl Plan {
    pub fn from_steps(
        config: &GridConfig,
        model: &CostModel,
        steps: Vec<PlanStep>,
        solved: bool,
    ) -> Self {
        let total_cost = CostTotals::of_plan(config, &steps).value(model);
        Self {
            total_cost,
            step_count: steps.len(),
            steps,
            solved,
        }
    }

    pub fn totals(&self, config: &GridConfig) -> CostTotals {
        CostTotals::of_plan(config, &self.steps)
    }
}

/// Why planning stopped without a solved plan.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("scenario rejected: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("search exhausted the state space without reaching the targets")]
    Unsolvable,
    #[error("expansion budget spent after {expanded} nodes")]
    SearchBudget { expanded: u64 },
    #[error("step budget spent after {steps} steps, best remaining distance {remaining}")]
    StepBudget {
        steps: u64,
        /// Lowest total remaining distance reached before the budget ran out.
        remaining: u64,
        /// The unsolved route walked so far, for honest reporting downstream.
        partial: Box<Plan>,
    },
    #[error("no legal step exists after {steps} steps")]
    Deadlock { steps: u64, partial: Box<Plan> },
}

/// Where a plan replay failed.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanFailure {
    /// The scenario start state itself is invalid.
    Start(Vec<StateViolation>),
    /// A step was rejected by the evolution rule.
    Step { index: usize, error: StepError },
}

/// Outcome of replaying a plan against a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub valid: bool,
    pub targets_met: bool,
    pub failure: Option<PlanFailure>,
    /// State after the last successfully applied step.
    pub final_state: WorldState,
}

/// Replay `plan` from the scenario start, step by step, under the full
/// evolution rule. Reports the first violation, or confirms validity and
/// whether every target is met at the end.
pub fn validate_plan(scenario: &Scenario, plan: &Plan) -> PlanReport {
    let config = &scenario.config;
    let mut state = scenario.start.clone();
    if let Err(violations) = validate_state(config, &state) {
        return PlanReport {
            valid: false,
            targets_met: false,
            failure: Some(PlanFailure::Start(violations)),
            final_state: state,
        };
    }
    for (index, step) in plan.steps.iter().enumerate() {
        match apply_step(config, &state, step) {
            Ok(next) => state = next,
            Err(error) => {
                return PlanReport {
                    valid: false,
                    targets_met: false,
                    failure: Some(PlanFailure::Step { index, error }),
                    final_state: state,
                };
            }
        }
    }
    PlanReport {
        valid: true,
        targets_met: scenario.targets_met(&state),
        failure: None,
        final_state: state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gear::state_from;

    fn swap_scenario() -> Scenario {
        let config = GridConfig::new(2, 2, 1).unwrap();
        let start = state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0)]);
        let targets = BTreeMap::from([
            (SensorId(0), Target::gear(GearPos::new(1, 1))),
            (SensorId(1), Target::gear(GearPos::new(0, 0))),
        ]);
        Scenario {
            config,
            start,
            targets,
            cost_model: CostModel::default(),
        }
    }

    #[test]
    fn scenario_validation_catches_missing_and_colliding_targets() {
        let mut scenario = swap_scenario();
        assert!(scenario.validate().is_ok());

        scenario.targets.remove(&SensorId(1));
        assert_eq!(
            scenario.validate(),
            Err(ScenarioError::MissingTarget {
                sensor: SensorId(1)
            })
        );

        // One channel cannot host two arrivals.
        let mut overload = swap_scenario();
        overload
            .targets
            .insert(SensorId(1), Target::gear(GearPos::new(1, 1)));
        assert!(matches!(
            overload.validate(),
            Err(ScenarioError::TargetOverload {
                count: 2,
                channels: 1,
                ..
            })
        ));

        // Two channel-level targets on one gear are fine when distinct,
        // and collide when equal.
        let config = GridConfig::new(1, 1, 4).unwrap();
        let start = state_from(0, &[(0, (0, 0), 0), (1, (0, 0), 1)]);
        let mut shared_gear = Scenario {
            config,
            start,
            targets: BTreeMap::from([
                (SensorId(0), Target::slot(Slot::new(GearPos::new(0, 0), 2))),
                (SensorId(1), Target::slot(Slot::new(GearPos::new(0, 0), 1))),
            ]),
            cost_model: CostModel::default(),
        };
        assert!(shared_gear.validate().is_ok());
        shared_gear
            .targets
            .insert(SensorId(1), Target::slot(Slot::new(GearPos::new(0, 0), 2)));
        assert!(matches!(
            shared_gear.validate(),
            Err(ScenarioError::TargetCollision { .. })
        ));
    }

    #[test]
    fn replay_confirms_the_canonical_diagonal_swap() {
        let scenario = swap_scenario();
        let steps = vec![
            PlanStep::new(
                0,
                vec![
                    crate::gear::Transfer {
                        sensor: SensorId(0),
                        to: Slot::new(GearPos::new(0, 1), 0),
                    },
                    crate::gear::Transfer {
                        sensor: SensorId(1),
                        to: Slot::new(GearPos::new(1, 0), 0),
                    },
                ],
            ),
            PlanStep::new(
                1,
                vec![
                    crate::gear::Transfer {
                        sensor: SensorId(0),
                        to: Slot::new(GearPos::new(1, 1), 0),
                    },
                    crate::gear::Transfer {
                        sensor: SensorId(1),
                        to: Slot::new(GearPos::new(0, 0), 0),
                    },
                ],
            ),
        ];
        let plan = Plan::from_steps(&scenario.config, &scenario.cost_model, steps, true);
        assert!((plan.total_cost - 2.62).abs() < 1e-9);
        let report = validate_plan(&scenario, &plan);
        assert!(report.valid);
        assert!(report.targets_met);
        assert!((makespan(&scenario.config, &plan.steps, &scenario.cost_model) - 1.5).abs() < 1e-9);
    }

    #[test]
    fn replay_reports_failing_step_index() {
        let scenario = swap_scenario();
        let steps = vec![PlanStep::new(
            0,
            vec![crate::gear::Transfer {
                sensor: SensorId(0),
                to: Slot::new(GearPos::new(1, 0), 0), // vertical hop at a horizontal alignment
            }],
        )];
        let plan = Plan::from_steps(&scenario.config, &scenario.cost_model, steps, true);
        let report = validate_plan(&scenario, &plan);
        assert!(!report.valid);
        assert!(matches!(
            report.failure,
            Some(PlanFailure::Step { index: 0, .. })
        ));
    }
}
