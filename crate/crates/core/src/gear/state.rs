//! Platform state and the atomic evolution rule.
//!
//! A state is the shared rotation offset plus a placement of sensors on
//! slots. The safety constraint is channel parity: at any alignment, a
//! connected slot pair may carry at most one sensor, otherwise the two
//! sensors would collide at the meshing point. Rotation happens one slot at
//! a time and every intermediate alignment must satisfy the constraint.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::connect::{connected_partners, rail_at, Rail};
use super::types::{GridConfig, SensorId, Slot};

/// Canonical hashable identity of a [`WorldState`].
pub type StateKey = (u16, Vec<(SensorId, Slot)>);

/// Full platform state: rotation offset in [0, period) plus sensor slots.
///
/// Placements are kept in a sorted map so iteration order, hashing keys, and
/// serialized forms are all canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    pub offset: u16,
    pub placements: BTreeMap<SensorId, Slot>,
}

impl WorldState {
    pub fn new(offset: u16, placements: BTreeMap<SensorId, Slot>) -> Self {
        Self { offset, placements }
    }

    pub fn empty() -> Self {
        Self {
            offset: 0,
            placements: BTreeMap::new(),
        }
    }

    pub fn sensor_count(&self) -> usize {
        self.placements.len()
    }

    /// Reverse index from occupied slot to occupant.
    pub fn occupancy(&self) -> HashMap<Slot, SensorId> {
        self.placements.iter().map(|(&id, &slot)| (slot, id)).collect()
    }

    /// Canonical key for visited-state sets: offset plus sorted placements.
    pub fn key(&self) -> StateKey {
        (
            self.offset,
            self.placements.iter().map(|(&id, &slot)| (id, slot)).collect(),
        )
    }
}

/// A reason a state is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateViolation {
    #[error("sensor {sensor} placed outside the grid at {slot}")]
    OutOfRange { sensor: SensorId, slot: Slot },
    #[error("rotation offset {offset} outside [0, {period})")]
    OffsetOutOfRange { offset: u16, period: u16 },
    #[error("sensors {first} and {second} share slot {slot}")]
    SlotCollision {
        slot: Slot,
        first: SensorId,
        second: SensorId,
    },
    #[error(
        "channel parity violated at offset {offset}: {first} at {a} and {second} at {b} \
         occupy a connected pair"
    )]
    DoubleOccupancy {
        offset: u16,
        a: Slot,
        b: Slot,
        first: SensorId,
        second: SensorId,
    },
}

/// Check range, exclusivity, and channel parity at the state's own offset.
///
/// All violations are reported, in a deterministic order.
pub fn validate_state(config: &GridConfig, state: &WorldState) -> Result<(), Vec<StateViolation>> {
    let mut violations = Vec::new();
    if state.offset >= config.period() {
        violations.push(StateViolation::OffsetOutOfRange {
            offset: state.offset,
            period: config.period(),
        });
    }
    let mut occupied: HashMap<Slot, SensorId> = HashMap::with_capacity(state.placements.len());
    for (&sensor, &slot) in &state.placements {
        if !config.contains_slot(&slot) {
            violations.push(StateViolation::OutOfRange { sensor, slot });
            continue;
        }
        if let Some(&first) = occupied.get(&slot) {
            violations.push(StateViolation::SlotCollision {
                slot,
                first,
                second: sensor,
            });
        } else {
            occupied.insert(slot, sensor);
        }
    }
    if !violations.is_empty() {
        return Err(violations);
    }
    let offset = state.offset % config.period();
    // Each connected pair is inspected once, from its east/south endpoint.
    for (&sensor, &slot) in &state.placements {
        let facing = match rail_at(config, &slot, offset) {
            Some(Rail::EastWest) if slot.gear.col + 1 < config.cols() => {
                let mut east = slot;
                east.gear.col += 1;
                east.channel = super::connect::partner_channel(config, slot.channel);
                east
            }
            Some(Rail::NorthSouth) if slot.gear.row + 1 < config.rows() => {
                let mut south = slot;
                south.gear.row += 1;
                south.channel = super::connect::partner_channel(config, slot.channel);
                south
            }
            _ => continue,
        };
        if let Some(&second) = occupied.get(&facing) {
            violations.push(StateViolation::DoubleOccupancy {
                offset,
                a: slot,
                b: facing,
                first: sensor,
                second,
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Why a rotation or a step was refused.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error(
        "rotation blocked entering offset {offset}: sensors {first} at {a} and {second} at {b} \
         would meet on a connected pair"
    )]
    RotationBlocked {
        offset: u16,
        a: Slot,
        b: Slot,
        first: SensorId,
        second: SensorId,
    },
    #[error("transfer names unknown sensor {sensor}")]
    UnknownSensor { sensor: SensorId },
    #[error("sensor {sensor} moved more than once in a single step")]
    DuplicateSensor { sensor: SensorId },
    #[error("two transfers target the same slot {slot}")]
    DuplicateDestination { slot: Slot },
    #[error("sensor {sensor} at {from} is not connected to {to} at offset {offset}")]
    NotConnected {
        sensor: SensorId,
        from: Slot,
        to: Slot,
        offset: u16,
    },
    #[error("transfer destination {slot} is occupied by {occupant}")]
    DestinationOccupied { slot: Slot, occupant: SensorId },
    #[error("state invalid after transfers: {0:?}")]
    PostStateInvalid(Vec<StateViolation>),
    #[error("step applied to an invalid state: {0:?}")]
    PreStateInvalid(Vec<StateViolation>),
}

/// Advance the platform one rotation slot in `direction` (+1 or -1).
///
/// Placements do not move; only the offset changes. Fails if the new
/// alignment would put two sensors on a connected pair, reporting the first
/// violating pair.
pub fn legal_rotation(
    config: &GridConfig,
    state: &WorldState,
    direction: i32,
) -> Result<WorldState, StepError> {
    debug_assert!(direction == 1 || direction == -1);
    let period = config.period() as i32;
    let next_offset = (state.offset as i32 + direction).rem_euclid(period) as u16;
    let mut next = state.clone();
    next.offset = next_offset;
    match validate_state(config, &next) {
        Ok(()) => Ok(next),
        Err(violations) => {
            let first = violations
                .iter()
                .find_map(|v| match v {
                    StateViolation::DoubleOccupancy {
                        offset,
                        a,
                        b,
                        first,
                        second,
                    } => Some(StepError::RotationBlocked {
                        offset: *offset,
                        a: *a,
                        b: *b,
                        first: *first,
                        second: *second,
                    }),
                    _ => None,
                })
                .unwrap_or(StepError::PreStateInvalid(violations.clone()));
            Err(first)
        }
    }
}

/// One sensor hop across a meshing point. The source slot is implicit: the
/// sensor's current position when the step's transfer phase begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transfer {
    pub sensor: SensorId,
    pub to: Slot,
}

/// One simulation step: a signed multi-slot rotation, then a set of
/// concurrent transfers at the resulting alignment.
///
/// Transfers are simultaneous: destinations must be empty before the step,
/// distinct, and not freed by another transfer of the same step, so no
/// sensor can chain through a slot vacated moments earlier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanStep {
    pub rotate: i32,
    pub transfers: Vec<Transfer>,
}

impl PlanStep {
    pub fn rotation(rotate: i32) -> Self {
        Self {
            rotate,
            transfers: Vec::new(),
        }
    }

    pub fn new(rotate: i32, mut transfers: Vec<Transfer>) -> Self {
        transfers.sort_unstable();
        Self { rotate, transfers }
    }

    /// Degrees of rotation this step sweeps.
    pub fn degrees(&self, config: &GridConfig) -> u64 {
        self.rotate.unsigned_abs() as u64 * config.slot_degrees() as u64
    }
}

/// Execute a step: rotate slot by slot, then apply all transfers at once.
///
/// Every intermediate alignment of the rotation and the final transferred
/// state must satisfy channel parity.
pub fn apply_step(
    config: &GridConfig,
    state: &WorldState,
    step: &PlanStep,
) -> Result<WorldState, StepError> {
    let mut current = state.clone();
    let direction = if step.rotate >= 0 { 1 } else { -1 };
    for _ in 0..step.rotate.unsigned_abs() {
        current = legal_rotation(config, &current, direction)?;
    }
    if step.transfers.is_empty() {
        return Ok(current);
    }

    let occupied = current.occupancy();
    let mut moved: Vec<SensorId> = Vec::with_capacity(step.transfers.len());
    let mut claimed: Vec<Slot> = Vec::with_capacity(step.transfers.len());
    for transfer in &step.transfers {
        let Some(&from) = current.placements.get(&transfer.sensor) else {
            return Err(StepError::UnknownSensor {
                sensor: transfer.sensor,
            });
        };
        if moved.contains(&transfer.sensor) {
            return Err(StepError::DuplicateSensor {
                sensor: transfer.sensor,
            });
        }
        if claimed.contains(&transfer.to) {
            return Err(StepError::DuplicateDestination { slot: transfer.to });
        }
        // Occupancy is judged before any transfer of this step lands, which
        // also rules out hopping into a slot another sensor is vacating.
        if let Some(&occupant) = occupied.get(&transfer.to) {
            return Err(StepError::DestinationOccupied {
                slot: transfer.to,
                occupant,
            });
        }
        if !connected_partners(config, &from, current.offset).contains(&transfer.to) {
            return Err(StepError::NotConnected {
                sensor: transfer.sensor,
                from,
                to: transfer.to,
                offset: current.offset,
            });
        }
        moved.push(transfer.sensor);
        claimed.push(transfer.to);
    }
    for transfer in &step.transfers {
        current.placements.insert(transfer.sensor, transfer.to);
    }
    validate_state(config, &current).map_err(StepError::PostStateInvalid)?;
    Ok(current)
}

/// Convenience constructor used across tests and the oracle.
pub fn state_from(offset: u16, placements: &[(u32, (u16, u16), u16)]) -> WorldState {
    let map = placements
        .iter()
        .map(|&(id, (row, col), channel)| {
            (
                SensorId(id),
                Slot::new(super::types::GearPos::new(row, col), channel),
            )
        })
        .collect();
    WorldState::new(offset, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gear::types::GearPos;

    fn cfg(rows: u16, cols: u16, channels: u16) -> GridConfig {
        GridConfig::new(rows, cols, channels).unwrap()
    }

    #[test]
    fn diagonal_pair_is_valid_on_single_channel_grid() {
        let config = cfg(2, 2, 1);
        let state = state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0)]);
        assert!(validate_state(&config, &state).is_ok());
        let empty = WorldState::empty();
        assert!(validate_state(&config, &empty).is_ok());
    }

    #[test]
    fn vertical_alignment_rejects_stacked_column() {
        let config = cfg(2, 2, 1);
        let state = state_from(1, &[(0, (0, 1), 0), (1, (1, 1), 0)]);
        let violations = validate_state(&config, &state).unwrap_err();
        assert_eq!(violations.len(), 1);
        assert!(matches!(
            violations[0],
            StateViolation::DoubleOccupancy { offset: 1, .. }
        ));
    }

    #[test]
    fn rotation_moves_offset_but_not_sensors() {
        let config = cfg(2, 2, 1);
        let state = state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0)]);
        let rotated = legal_rotation(&config, &state, 1).unwrap();
        assert_eq!(rotated.offset, 1);
        assert_eq!(rotated.placements, state.placements);
        // Wrap-around in the negative direction.
        let back = legal_rotation(&config, &state, -1).unwrap();
        assert_eq!(back.offset, 1);
    }

    #[test]
    fn rotation_into_conflicting_alignment_is_blocked() {
        let config = cfg(2, 2, 1);
        let state = state_from(0, &[(0, (0, 1), 0), (1, (1, 1), 0)]);
        let err = legal_rotation(&config, &state, 1).unwrap_err();
        assert!(matches!(err, StepError::RotationBlocked { offset: 1, .. }));
    }

    #[test]
    fn lone_gear_rotates_freely() {
        let config = cfg(1, 1, 4);
        let state = state_from(0, &[(0, (0, 0), 0), (1, (0, 0), 2)]);
        assert!(legal_rotation(&config, &state, 1).is_ok());
        assert!(legal_rotation(&config, &state, -1).is_ok());
    }

    #[test]
    fn transfer_moves_sensor_across_aligned_pair() {
        let config = cfg(2, 2, 1);
        let state = state_from(0, &[(0, (0, 0), 0)]);
        let step = PlanStep::new(
            0,
            vec![Transfer {
                sensor: SensorId(0),
                to: Slot::new(GearPos::new(0, 1), 0),
            }],
        );
        let next = apply_step(&config, &state, &step).unwrap();
        assert_eq!(
            next.placements[&SensorId(0)],
            Slot::new(GearPos::new(0, 1), 0)
        );
    }

    #[test]
    fn transfer_requires_connection_at_current_offset() {
        let config = cfg(2, 2, 1);
        let state = state_from(1, &[(0, (0, 0), 0)]);
        // Offset 1 aligns rails vertically; an eastward hop must fail.
        let step = PlanStep::new(
            0,
            vec![Transfer {
                sensor: SensorId(0),
                to: Slot::new(GearPos::new(0, 1), 0),
            }],
        );
        assert!(matches!(
            apply_step(&config, &state, &step),
            Err(StepError::NotConnected { .. })
        ));
    }

    #[test]
    fn occupied_destination_is_rejected() {
        let config = cfg(2, 2, 4);
        let valid = state_from(0, &[(0, (0, 0), 0), (1, (0, 1), 2)]);
        assert!(validate_state(&config, &valid).is_ok());
        // Aiming a transfer at sensor 1's slot is refused before any
        // connectivity reasoning.
        let step = PlanStep::new(
            2,
            vec![Transfer {
                sensor: SensorId(0),
                to: Slot::new(GearPos::new(0, 1), 2),
            }],
        );
        assert!(matches!(
            apply_step(&config, &valid, &step),
            Err(StepError::DestinationOccupied { .. })
        ));
    }

    #[test]
    fn post_state_parity_is_enforced() {
        let config = cfg(1, 3, 1);
        // Sensors on the two outer gears; moving the western one into the
        // middle puts it on a pair with the eastern one.
        let state = state_from(0, &[(0, (0, 0), 0), (1, (0, 2), 0)]);
        assert!(validate_state(&config, &state).is_ok());
        let step = PlanStep::new(
            0,
            vec![Transfer {
                sensor: SensorId(0),
                to: Slot::new(GearPos::new(0, 1), 0),
            }],
        );
        assert!(matches!(
            apply_step(&config, &state, &step),
            Err(StepError::PostStateInvalid(_))
        ));
    }

    #[test]
    fn concurrent_transfers_land_atomically() {
        let config = cfg(2, 2, 1);
        let state = state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0)]);
        let step = PlanStep::new(
            0,
            vec![
                Transfer {
                    sensor: SensorId(0),
                    to: Slot::new(GearPos::new(0, 1), 0),
                },
                Transfer {
                    sensor: SensorId(1),
                    to: Slot::new(GearPos::new(1, 0), 0),
                },
            ],
        );
        let next = apply_step(&config, &state, &step).unwrap();
        assert_eq!(
            next.placements[&SensorId(0)],
            Slot::new(GearPos::new(0, 1), 0)
        );
        assert_eq!(
            next.placements[&SensorId(1)],
            Slot::new(GearPos::new(1, 0), 0)
        );
    }

    #[test]
    fn chaining_into_a_vacated_slot_is_rejected() {
        let config = cfg(1, 3, 1);
        // Sensor 0 frees the middle slot in this very step; sensor 1 still
        // may not take it, because occupancy is judged before the step.
        let state = state_from(0, &[(0, (0, 1), 0), (1, (0, 0), 0)]);
        let chain = PlanStep::new(
            0,
            vec![
                Transfer {
                    sensor: SensorId(0),
                    to: Slot::new(GearPos::new(0, 2), 0),
                },
                Transfer {
                    sensor: SensorId(1),
                    to: Slot::new(GearPos::new(0, 1), 0),
                },
            ],
        );
        assert!(matches!(
            apply_step(&config, &state, &chain),
            Err(StepError::DestinationOccupied { .. })
        ));
    }

    #[test]
    fn multi_slot_rotation_checks_every_intermediate_alignment() {
        let config = cfg(2, 2, 4);
        // Two sensors that collide at offset 1 but not at offsets 0 or 2.
        let state = state_from(0, &[(0, (0, 0), 3), (1, (0, 1), 1)]);
        assert!(validate_state(&config, &state).is_ok());
        let err = apply_step(&config, &state, &PlanStep::rotation(2)).unwrap_err();
        assert!(matches!(err, StepError::RotationBlocked { offset: 1, .. }));
    }
}
