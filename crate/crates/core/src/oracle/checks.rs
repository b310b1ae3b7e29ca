//! Executable checks of the structural claims: the two-sensor base set,
//! the in-place swap, checkerboard transferability, and the capacity bound.

use std::collections::BTreeMap;

use serde_json::json;

use crate::gear::{
    capacity, carried_channel, checkerboard_classes, state_from, validate_state, CostModel,
    GridConfig, SensorId, Slot, WorldState,
};
use crate::planner::{plan_greedy, validate_plan, Plan, PlannerParams, Scenario, Target};
use crate::rng::{derive_seed, Xoshiro256StarStar};

use super::{explore, Claim, OracleError, TheoremReport};

// Independent seed streams, so the capacity check's placements, planner
// kicks, and overload draws never alias.
const STREAM_PLACEMENT: u64 = 1;
const STREAM_PLANNER: u64 = 2;
const STREAM_OVERLOAD: u64 = 3;

fn slot_targets(state: &WorldState) -> BTreeMap<SensorId, Target> {
    state
        .placements
        .iter()
        .map(|(&id, &slot)| (id, Target::slot(slot)))
        .collect()
}

/// A witness plan plus the verdict of replaying it against the scenario it
/// claims to solve.
fn replayed_witness(scenario: &Scenario, steps: Vec<crate::gear::PlanStep>) -> (Plan, bool) {
    let plan = Plan::from_steps(&scenario.config, &scenario.cost_model, steps, true);
    let report = validate_plan(scenario, &plan);
    let ok = report.valid && report.targets_met;
    (plan, ok)
}

/// The four two-sensor diagonal states of a 2x2 single-channel platform, in
/// the order they are conventionally written: both labelings of the main
/// diagonal bracket both labelings of the anti-diagonal.
fn g2_states() -> Vec<WorldState> {
    vec![
        state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0)]),
        state_from(0, &[(0, (0, 1), 0), (1, (1, 0), 0)]),
        state_from(0, &[(1, (0, 1), 0), (0, (1, 0), 0)]),
        state_from(0, &[(1, (0, 0), 0), (0, (1, 1), 0)]),
    ]
}

/// Verify that every ordered pair of distinct two-sensor diagonal states on
/// the 2x2 single-channel platform is reachable, by exhaustive search from
/// each of the four states in turn.
pub fn check_g2() -> TheoremReport {
    let config = GridConfig::new(2, 2, 1).expect("2x2 single-channel grid is valid");
    let states = g2_states();
    let mut steps = vec![vec![0u64; states.len()]; states.len()];
    let mut reachable_pairs = 0usize;
    let mut witness = None;
    let mut witness_ok = true;
    for (i, from) in states.iter().enumerate() {
        let exploration = explore(&config, from).expect("2x2 graph is far inside the guard");
        for (j, to) in states.iter().enumerate() {
            if i == j {
                continue;
            }
            let Some(idx) = exploration.position(to) else {
                continue;
            };
            reachable_pairs += 1;
            steps[i][j] = exploration.depth[idx];
            if witness.is_none() {
                let scenario = Scenario {
                    config,
                    start: from.clone(),
                    targets: slot_targets(to),
                    cost_model: CostModel::default(),
                };
                let (plan, ok) = replayed_witness(&scenario, exploration.route_to(idx));
                witness = Some(plan);
                witness_ok = ok;
            }
        }
    }
    let ordered_pairs = states.len() * (states.len() - 1);
    TheoremReport {
        claim: Claim::G2,
        config,
        holds: reachable_pairs == ordered_pairs && witness_ok,
        details: json!({
            "states": states.len(),
            "ordered_pairs": ordered_pairs,
            "reachable_pairs": reachable_pairs,
            "steps": steps,
        }),
        witness,
    }
}

/// Verify the in-place swap of two corridor sensors. The two-row corridor
/// pattern (outer sensors on the top row, escort in the middle of the bottom
/// row) is placed on a 3x3 single-channel platform whose bottom row stays
/// empty; the outer sensors must exchange gears while the escort ends
/// exactly where it started.
///
/// The empty third row is load-bearing working space: on a bare 2x3
/// platform the corridor pattern sits at full capacity and exhaustive
/// search shows the exchange is unreachable (see
/// `corridor_swap_needs_the_workspace_row`).
pub fn check_swap() -> TheoremReport {
    let config = GridConfig::new(3, 3, 1).expect("3x3 single-channel grid is valid");
    let start = state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0), (2, (0, 2), 0)]);
    let goal = state_from(0, &[(0, (0, 2), 0), (1, (1, 1), 0), (2, (0, 0), 0)]);
    let exploration = explore(&config, &start).expect("3x3 three-sensor graph is inside the guard");
    // The goal pins every final slot, bystander included; any offset will do.
    let found = exploration
        .states
        .iter()
        .position(|s| s.placements == goal.placements);
    let bystander = SensorId(1);
    let (witness, witness_ok, steps, bystander_fixed) = match found {
        Some(idx) => {
            let scenario = Scenario {
                config,
                start: start.clone(),
                targets: slot_targets(&goal),
                cost_model: CostModel::default(),
            };
            let (plan, ok) = replayed_witness(&scenario, exploration.route_to(idx));
            let fixed = exploration.states[idx].placements[&bystander]
                == start.placements[&bystander];
            (Some(plan), ok, Some(exploration.depth[idx]), fixed)
        }
        None => (None, false, None, false),
    };
    TheoremReport {
        claim: Claim::Swap,
        config,
        holds: found.is_some() && witness_ok && bystander_fixed,
        details: json!({
            "reachable": found.is_some(),
            "steps": steps,
            "component_size": exploration.states.len(),
            "bystander_slot_unchanged": bystander_fixed,
        }),
        witness,
    }
}

/// Verify that every labeled full-capacity checkerboard state the channel
/// conservation law admits sits in one reachable component, which by edge
/// reversibility makes all of them mutually reachable.
pub fn check_checkerboard(config: &GridConfig) -> Result<TheoremReport, OracleError> {
    let q = capacity(config) as usize;
    let classes = checkerboard_classes(config);
    let canonical = labeled_state(&classes[0], None);
    let exploration = explore(config, &canonical)?;

    // Channel conservation (see `carried_channel`) already decides which
    // channel every sensor must hold on every gear, so only labelings that
    // respect it are candidates at all; the rest are unreachable outright
    // and say nothing about the platform's shuffling power.
    let mut total_states = 0usize;
    let mut missing = 0usize;
    for class in &classes {
        for_each_conserving_labeling(config, &canonical, class, &mut |state| {
            total_states += 1;
            if exploration.position(state).is_none() {
                missing += 1;
            }
        });
    }

    // Every edge reverses in at most two steps (undo the transfers at the
    // same offset, then rotate back), so co-membership in the component of
    // the canonical state already proves mutual reachability of all pairs.
    let ordered_pairs = total_states * total_states.saturating_sub(1);
    let scrambled = reversed_conserving_labeling(config, &canonical, &classes[0]);
    let (witness, witness_ok) = match exploration.position(&scrambled) {
        Some(idx) => {
            let scenario = Scenario {
                config: *config,
                start: canonical.clone(),
                targets: slot_targets(&scrambled),
                cost_model: CostModel::default(),
            };
            let (plan, ok) = replayed_witness(&scenario, exploration.route_to(idx));
            (Some(plan), ok)
        }
        None => (None, false),
    };
    Ok(TheoremReport {
        claim: Claim::Checkerboard,
        config: *config,
        holds: missing == 0 && witness_ok,
        details: json!({
            "capacity": q,
            "checkerboard_states": total_states,
            "states_outside_component": missing,
            "ordered_pairs_verified": ordered_pairs,
            "component_size": exploration.states.len(),
        }),
        witness,
    })
}

/// Exercise the capacity bound: at full capacity, seeded random relabeling
/// instances must be greedy-plannable; one sensor past capacity, every
/// seeded random placement must break the occupancy rule at some offset
/// within one rotation period. Empirical evidence, not proof.
pub fn check_capacity(config: &GridConfig, trials: u32, seed: u64) -> TheoremReport {
    let q = capacity(config) as usize;
    let classes = checkerboard_classes(config);
    let params = PlannerParams::default();

    let mut solved = 0u32;
    let mut witness = None;
    for trial in 0..trials {
        let mut rng = Xoshiro256StarStar::seeded(derive_seed(&[
            seed,
            STREAM_PLACEMENT,
            trial as u64,
        ]));
        let start = random_labeling(&classes, &mut rng);
        let goal = conserving_relabel(config, &start, &classes, &mut rng);
        let scenario = Scenario {
            config: *config,
            start,
            targets: slot_targets(&goal),
            cost_model: CostModel::default(),
        };
        let trial_params = PlannerParams {
            seed: derive_seed(&[seed, STREAM_PLANNER, trial as u64]),
            ..params
        };
        if let Ok(plan) = plan_greedy(&scenario, &trial_params) {
            let report = validate_plan(&scenario, &plan);
            if report.valid && report.targets_met {
                solved += 1;
                if witness.is_none() {
                    witness = Some(plan);
                }
            }
        }
    }

    let slot_count = config.slot_count() as usize;
    let mut overloaded_valid: Option<String> = None;
    let mut overload_trials = 0u32;
    if q + 1 <= slot_count {
        let all_slots = config.slots();
        for trial in 0..trials {
            overload_trials += 1;
            let mut rng = Xoshiro256StarStar::seeded(derive_seed(&[
                seed,
                STREAM_OVERLOAD,
                trial as u64,
            ]));
            let picks = rng.sample_indices(slot_count, q + 1);
            let placements: BTreeMap<SensorId, Slot> = picks
                .iter()
                .enumerate()
                .map(|(i, &slot)| (SensorId(i as u32), all_slots[slot]))
                .collect();
            let violates_somewhere = (0..config.period()).any(|offset| {
                validate_state(config, &WorldState::new(offset, placements.clone())).is_err()
            });
            if !violates_somewhere && overloaded_valid.is_none() {
                overloaded_valid = Some(format!("{placements:?}"));
            }
        }
    }
    // q+1 > slot_count means no over-capacity placement even exists.

    let over_ok = overloaded_valid.is_none();
    TheoremReport {
        claim: Claim::Capacity,
        config: *config,
        holds: solved == trials && over_ok,
        details: json!({
            "capacity": q,
            "trials": trials,
            "solved": solved,
            "overload_trials": overload_trials,
            "overload_all_violate": over_ok,
            "overload_counterexample": overloaded_valid,
        }),
        witness,
    }
}

/// The gear parity classes whose slots can host a full-capacity load: the
/// (row+col)-even class always, the odd class too when the grid splits
/// evenly.
/// Sensors 0..n placed on `class` slots at offset 0, ordered by `perm`
/// (identity when absent).
fn labeled_state(class: &[Slot], perm: Option<&[usize]>) -> WorldState {
    let placements = class
        .iter()
        .enumerate()
        .map(|(i, &slot)| {
            let sensor = perm.map_or(i, |p| p[i]);
            (SensorId(sensor as u32), slot)
        })
        .collect();
    WorldState::new(0, placements)
}

/// A uniformly random labeling of a uniformly chosen qualifying class.
fn random_labeling(classes: &[Vec<Slot>], rng: &mut Xoshiro256StarStar) -> WorldState {
    let class = &classes[rng.below(classes.len() as u64) as usize];
    let mut slots = class.clone();
    rng.shuffle(&mut slots);
    let placements = slots
        .iter()
        .enumerate()
        .map(|(i, &slot)| (SensorId(i as u32), slot))
        .collect();
    WorldState::new(0, placements)
}

/// Group the sensors of `start` and the slots of `class` by the channel
/// that conservation forces each sensor to hold on the class's gears.
fn conserving_cohorts(
    config: &GridConfig,
    start: &WorldState,
    class: &[Slot],
) -> Vec<(Vec<SensorId>, Vec<Slot>)> {
    let mut slots_by_channel: BTreeMap<u16, Vec<Slot>> = BTreeMap::new();
    for &slot in class {
        slots_by_channel.entry(slot.channel).or_default().push(slot);
    }
    // All gears of a class share one parity, so any of them stands in for
    // the carried-channel computation.
    let dest = class[0].gear;
    let mut sensors_by_channel: BTreeMap<u16, Vec<SensorId>> = BTreeMap::new();
    for (&id, slot) in &start.placements {
        sensors_by_channel
            .entry(carried_channel(config, slot, &dest))
            .or_default()
            .push(id);
    }
    slots_by_channel
        .into_iter()
        .map(|(channel, slots)| {
            let sensors = sensors_by_channel.remove(&channel).unwrap_or_default();
            (sensors, slots)
        })
        .collect()
}

/// Call `visit` with every labeling of `class` that channel conservation
/// leaves open to the sensors of `start`.
fn for_each_conserving_labeling(
    config: &GridConfig,
    start: &WorldState,
    class: &[Slot],
    visit: &mut impl FnMut(&WorldState),
) {
    let cohorts = conserving_cohorts(config, start, class);
    if cohorts.iter().any(|(sensors, slots)| sensors.len() != slots.len()) {
        return;
    }
    let mut acc: Vec<(SensorId, Slot)> = Vec::with_capacity(class.len());
    fill_cohorts(&cohorts, &mut acc, visit);
}

fn fill_cohorts(
    cohorts: &[(Vec<SensorId>, Vec<Slot>)],
    acc: &mut Vec<(SensorId, Slot)>,
    visit: &mut impl FnMut(&WorldState),
) {
    let Some(((sensors, slots), rest)) = cohorts.split_first() else {
        let state = WorldState::new(0, acc.iter().copied().collect());
        visit(&state);
        return;
    };
    permutations(sensors.len(), &mut |perm| {
        let base = acc.len();
        for (pos, &pick) in perm.iter().enumerate() {
            acc.push((sensors[pick], slots[pos]));
        }
        fill_cohorts(rest, acc, visit);
        acc.truncate(base);
    });
}

/// The least-overlapping labeling conservation admits on `class`: every
/// cohort reversed relative to the canonical order.
fn reversed_conserving_labeling(
    config: &GridConfig,
    start: &WorldState,
    class: &[Slot],
) -> WorldState {
    let placements = conserving_cohorts(config, start, class)
        .into_iter()
        .flat_map(|(sensors, slots)| sensors.into_iter().rev().zip(slots))
        .collect();
    WorldState::new(0, placements)
}

/// A uniformly random relabeling of `start` onto a uniformly chosen class,
/// shuffling sensors only within the cohorts channel conservation allows.
fn conserving_relabel(
    config: &GridConfig,
    start: &WorldState,
    classes: &[Vec<Slot>],
    rng: &mut Xoshiro256StarStar,
) -> WorldState {
    let class = &classes[rng.below(classes.len() as u64) as usize];
    let mut placements = BTreeMap::new();
    for (mut sensors, slots) in conserving_cohorts(config, start, class) {
        debug_assert_eq!(sensors.len(), slots.len());
        rng.shuffle(&mut sensors);
        for (id, slot) in sensors.into_iter().zip(slots) {
            placements.insert(id, slot);
        }
    }
    WorldState::new(0, placements)
}

/// Call `visit` with every permutation of 0..n, in lexicographic order.
fn permutations(n: usize, visit: &mut impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        visit(&perm);
        // next_permutation in place
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g2_holds_with_a_valid_witness() {
        let report = check_g2();
        assert!(report.holds);
        // The recorded witness covers the first ordered pair: both sensors
        // slide sideways in one concurrent step.
        let witness = report.witness.unwrap();
        assert_eq!(witness.step_count, 1);
        assert_eq!(report.details["reachable_pairs"], 12);
        // The label swap on the same diagonal is the long way around.
        assert_eq!(report.details["steps"][0][3], 2);
    }

    #[test]
    fn swap_holds_and_keeps_the_bystander_in_place() {
        let report = check_swap();
        assert!(report.holds, "details: {}", report.details);
        assert!(report.details["bystander_slot_unchanged"].as_bool().unwrap());
        assert!(report.witness.is_some());
    }

    #[test]
    fn corridor_swap_needs_the_workspace_row() {
        // On the bare two-row platform the corridor pattern is at full
        // capacity; the reachable component is tiny and the exchange is
        // not in it.
        let config = GridConfig::new(2, 3, 1).unwrap();
        let start = state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0), (2, (0, 2), 0)]);
        let goal = state_from(0, &[(0, (0, 2), 0), (1, (1, 1), 0), (2, (0, 0), 0)]);
        let exploration = explore(&config, &start).unwrap();
        assert_eq!(exploration.states.len(), 14);
        assert!(exploration
            .states
            .iter()
            .all(|s| s.placements != goal.placements));
    }

    #[test]
    fn checkerboard_holds_on_the_two_by_two() {
        let config = GridConfig::new(2, 2, 1).unwrap();
        let report = check_checkerboard(&config).unwrap();
        assert!(report.holds);
        assert_eq!(report.details["checkerboard_states"], 4);
        assert_eq!(report.details["ordered_pairs_verified"], 12);
    }

    #[test]
    fn checkerboard_reports_the_frozen_three_by_three() {
        // At full capacity with one channel only the center sensor can
        // move; every relabeling is out of reach and the check says so.
        let config = GridConfig::new(3, 3, 1).unwrap();
        let report = check_checkerboard(&config).unwrap();
        assert!(!report.holds);
        assert_eq!(report.details["component_size"], 6);
        assert_eq!(report.details["checkerboard_states"], 120);
        assert_eq!(report.details["states_outside_component"], 119);
    }

    #[test]
    fn checkerboard_holds_with_channel_slack() {
        // A second channel restores mobility even at full capacity: every
        // labeling that channel conservation admits is reachable.
        let config = GridConfig::new(2, 2, 2).unwrap();
        let report = check_checkerboard(&config).unwrap();
        assert!(report.holds, "details: {}", report.details);
        assert_eq!(report.details["checkerboard_states"], 8);
        assert_eq!(report.details["states_outside_component"], 0);
    }

    #[test]
    fn checkerboard_guard_rejects_nine_by_nine() {
        let config = GridConfig::new(9, 9, 1).unwrap();
        assert!(matches!(
            check_checkerboard(&config),
            Err(OracleError::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn capacity_holds_on_the_two_by_two() {
        let config = GridConfig::new(2, 2, 1).unwrap();
        let report = check_capacity(&config, 8, 11);
        assert!(report.holds, "details: {}", report.details);
        assert_eq!(report.details["solved"], 8);
    }

    #[test]
    fn permutations_visit_every_ordering_once() {
        let mut seen = Vec::new();
        permutations(3, &mut |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }
}

