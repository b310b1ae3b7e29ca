//! Exact cost bookkeeping.
//!
//! Every quantity this toolkit scores has the shape
//! `degrees * rotation_cost_per_degree + transfers * transfer_cost`.
//! Carrying the two integer totals and materializing a float through one
//! shared formula keeps planner and oracle costs bit-for-bit comparable; no
//! result depends on the order in which partial sums were accumulated.

use crate::gear::{CostModel, GridConfig, PlanStep};

/// Integer rotation/transfer totals of a step, plan, or search path.
///
/// The derived ordering is lexicographic and exists only for deterministic
/// tie-breaking; rank by [`CostTotals::value`] to compare actual costs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CostTotals {
    pub degrees: u64,
    pub transfers: u64,
}

impl CostTotals {
    pub const ZERO: CostTotals = CostTotals {
        degrees: 0,
        transfers: 0,
    };

    pub fn of_step(config: &GridConfig, step: &PlanStep) -> Self {
        Self {
            degrees: step.degrees(config),
            transfers: step.transfers.len() as u64,
        }
    }

    pub fn of_plan(config: &GridConfig, steps: &[PlanStep]) -> Self {
        steps
            .iter()
            .fold(Self::ZERO, |acc, step| acc.plus(Self::of_step(config, step)))
    }

    pub fn plus(self, other: Self) -> Self {
        Self {
            degrees: self.degrees + other.degrees,
            transfers: self.transfers + other.transfers,
        }
    }

    /// The cost in model units (seconds under the default model).
    pub fn value(&self, model: &CostModel) -> f64 {
        self.degrees as f64 * model.rotation_cost_per_degree
            + self.transfers as f64 * model.transfer_cost
    }
}

/// Cost of one step: rotation sweep plus one charge per transfer.
pub fn step_cost(config: &GridConfig, step: &PlanStep, model: &CostModel) -> f64 {
    CostTotals::of_step(config, step).value(model)
}

/// Wall-clock duration of a plan.
///
/// Rotation time accrues per degree, but the transfers of a step fire
/// concurrently, so a non-empty transfer phase costs one transfer time
/// regardless of how many sensors move.
pub fn makespan(config: &GridConfig, steps: &[PlanStep], model: &CostModel) -> f64 {
    let mut degrees = 0u64;
    let mut phases = 0u64;
    for step in steps {
        degrees += step.degrees(config);
        if !step.transfers.is_empty() {
            phases += 1;
        }
    }
    degrees as f64 * model.rotation_cost_per_degree + phases as f64 * model.transfer_cost
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gear::{GearPos, SensorId, Slot, Transfer};

    fn transfer(id: u32) -> Transfer {
        Transfer {
            sensor: SensorId(id),
            to: Slot::new(GearPos::new(0, 0), 0),
        }
    }

    #[test]
    fn step_cost_charges_rotation_degrees_and_each_transfer() {
        let model = CostModel::default();
        let c4 = GridConfig::new(3, 3, 4).unwrap();
        let step = PlanStep::new(2, vec![transfer(0), transfer(1), transfer(2)]);
        // Two 45-degree slots plus three transfers.
        assert!((step_cost(&c4, &step, &model) - 2.06).abs() < 1e-9);

        let c1 = GridConfig::new(3, 3, 1).unwrap();
        let step = PlanStep::new(1, vec![transfer(0)]);
        assert!((step_cost(&c1, &step, &model) - 0.94).abs() < 1e-9);

        let stay = PlanStep::rotation(0);
        assert_eq!(step_cost(&c1, &stay, &model), 0.0);
    }

    #[test]
    fn makespan_charges_transfer_phases_once() {
        let model = CostModel::default();
        let c1 = GridConfig::new(2, 2, 1).unwrap();
        // One step: a 90-degree slot plus two concurrent transfers.
        let steps = [PlanStep::new(1, vec![transfer(0), transfer(1)])];
        assert!((makespan(&c1, &steps, &model) - 0.94).abs() < 1e-9);

        // The canonical two-step diagonal swap: 0.56 + (0.38 + 0.56).
        let steps = [
            PlanStep::new(0, vec![transfer(0), transfer(1)]),
            PlanStep::new(1, vec![transfer(0), transfer(1)]),
        ];
        assert!((makespan(&c1, &steps, &model) - 1.50).abs() < 1e-9);
        assert!((CostTotals::of_plan(&c1, &steps).value(&model) - 2.62).abs() < 1e-9);
    }
}
