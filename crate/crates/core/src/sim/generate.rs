//! Deterministic random scenario construction.

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::gear::{
    apply_step, capacity, carried_channel, checkerboard_classes, partner_channel, validate_state,
    CostModel, GearPos, GridConfig, PlanStep, SensorId, Slot, StateKey, WorldState,
};
use crate::planner::{candidate_transfers, Scenario, Target};
use crate::rng::{derive_seed, Xoshiro256StarStar};

use super::SimError;

// Separate streams so the number of start-sampling rejections never shifts
// the target draws.
const STREAM_STARTS: u64 = 0x5354_4152;
const STREAM_TARGETS: u64 = 0x5441_5247;

const START_ATTEMPTS: u32 = 256;
const TARGET_ATTEMPTS: u32 = 256;

// Scatter-walk steps per sensor when goals are drawn by walking.
const WALK_SCALE: u32 = 8;

// Reachability screening is exhaustive, so only boards small enough to be
// both cramped and cheap get it; larger boards have room to maneuver.
const CLASS_SCREEN_MAX_GEARS: u32 = 12;
const CLASS_SCREEN_NODES: usize = 100_000;

/// Draw a random routing problem with `q` sensors: distinct start slots that
/// stay legal through a full rotation period, plus one goal per sensor.
///
/// Goals are distinct uniform gears while the population stays under a third
/// of capacity and fits the gear count. Crowded boards make uniform draws
/// unreliable: exhaustive search shows assignments that pass every per-gear
/// and per-class check yet sit in a different component of the joint state
/// space. Past the threshold the generator instead scatters the population
/// with a random legal walk and reads the endpoints off as gear goals, so
/// the walk itself witnesses that the drawn goals are attainable.
///
/// The result is a pure function of `(config, q, seed)`.
pub fn generate_scenario(config: &GridConfig, q: u32, seed: u64) -> Result<Scenario, SimError> {
    let cap = capacity(config);
    if q as u64 > cap {
        return Err(SimError::OverCapacity {
            rows: config.rows(),
            cols: config.cols(),
            q: q as u64,
            capacity: cap,
        });
    }

    let start = sample_start(config, q, derive_seed(&[seed, STREAM_STARTS]));
    let mut rng = Xoshiro256StarStar::seeded(derive_seed(&[seed, STREAM_TARGETS]));
    let sparse = 3 * q as u64 <= cap && q as u64 <= config.gear_count() as u64;
    let targets = if sparse {
        gear_targets(config, &start, q, &mut rng)
    } else {
        walk_targets(config, &start, q, &mut rng)
    };

    Ok(Scenario {
        config: *config,
        start,
        targets,
        cost_model: CostModel::default(),
    })
}

/// Uniform placements, rejection-sampled until one survives a full period.
///
/// Dense populations can make uniform draws hopeless, so after a fixed
/// attempt budget the sampler falls back to the even checkerboard class,
/// whose subsets are legal at every offset and whose size equals capacity.
fn sample_start(config: &GridConfig, q: u32, seed: u64) -> WorldState {
    let mut rng = Xoshiro256StarStar::seeded(seed);
    let slots = config.slots();
    for _ in 0..START_ATTEMPTS {
        let picks = rng.sample_indices(slots.len(), q as usize);
        let state = place(&slots, &picks);
        if legal_over_period(config, &state) {
            return state;
        }
    }
    let class = &checkerboard_classes(config)[0];
    let picks = rng.sample_indices(class.len(), q as usize);
    place(class, &picks)
}

fn place(slots: &[Slot], picks: &[usize]) -> WorldState {
    let placements = picks
        .iter()
        .enumerate()
        .map(|(i, &s)| (SensorId(i as u32), slots[s]))
        .collect();
    WorldState::new(0, placements)
}

fn legal_over_period(config: &GridConfig, state: &WorldState) -> bool {
    (0..config.period()).all(|offset| {
        let shifted = WorldState::new(offset, state.placements.clone());
        validate_state(config, &shifted).is_ok()
    })
}

/// Distinct random goal gears, redrawn until the implied resting state is
/// valid at some offset.
///
/// Conservation pins the channel each sensor would occupy at its goal, so
/// an assignment can demand a configuration that violates pair parity at
/// every offset; such goals are unreachable no matter the plan.
fn gear_targets(
    config: &GridConfig,
    start: &WorldState,
    q: u32,
    rng: &mut Xoshiro256StarStar,
) -> BTreeMap<SensorId, Target> {
    let gears: Vec<_> = config.gears().collect();
    let mut last = None;
    for _ in 0..TARGET_ATTEMPTS {
        let picks = rng.sample_indices(gears.len(), q as usize);
        let targets: BTreeMap<SensorId, Target> = picks
            .iter()
            .enumerate()
            .map(|(i, &g)| (SensorId(i as u32), Target::gear(gears[g])))
            .collect();
        if resting_state_exists(config, start, &targets)
            && goals_reachable_by_class(config, start, &targets)
        {
            return targets;
        }
        last = Some(targets);
    }
    last.expect("at least one target draw was attempted")
}

/// Whether the state implied by sending every sensor to its goal channel is
/// valid at any offset.
fn resting_state_exists(
    config: &GridConfig,
    start: &WorldState,
    targets: &BTreeMap<SensorId, Target>,
) -> bool {
    let placements: BTreeMap<SensorId, Slot> = start
        .placements
        .iter()
        .map(|(&id, slot)| {
            let gear = targets[&id].gear;
            (id, Slot::new(gear, carried_channel(config, slot, &gear)))
        })
        .collect();
    (0..config.period()).any(|offset| {
        validate_state(config, &WorldState::new(offset, placements.clone())).is_ok()
    })
}

/// Necessary-condition screen for goal reachability on small boards.
///
/// Sensors sharing a conservation class occupy a slot family no other class
/// can touch, and their moves play the single-channel game on the same
/// grid; a class whose goal assignment is unreachable in that game is
/// unreachable outright. Singleton classes always pass, and boards over
/// `CLASS_SCREEN_MAX_GEARS` are assumed fine.
fn goals_reachable_by_class(
    config: &GridConfig,
    start: &WorldState,
    targets: &BTreeMap<SensorId, Target>,
) -> bool {
    if config.gear_count() > CLASS_SCREEN_MAX_GEARS {
        return true;
    }
    let mut classes: BTreeMap<u16, BTreeMap<SensorId, (GearPos, GearPos)>> = BTreeMap::new();
    for (&id, slot) in &start.placements {
        let class = if (slot.gear.row + slot.gear.col) % 2 == 0 {
            slot.channel
        } else {
            partner_channel(config, slot.channel)
        };
        classes
            .entry(class)
            .or_default()
            .insert(id, (slot.gear, targets[&id].gear));
    }
    classes
        .values()
        .all(|members| members.len() < 2 || class_goals_reachable(config, members))
}

/// Exhaustive search in the single-channel game: can the class members
/// reach their goal gears as an id-wise assignment, from any starting
/// offset to any final one? Hitting the node budget counts as reachable;
/// the screen only rejects proven obstructions.
fn class_goals_reachable(
    config: &GridConfig,
    members: &BTreeMap<SensorId, (GearPos, GearPos)>,
) -> bool {
    let sub = GridConfig::new(config.rows(), config.cols(), 1).expect("host grid is valid");
    let place = |gears: BTreeMap<SensorId, GearPos>, offset: u16| {
        WorldState::new(
            offset,
            gears
                .into_iter()
                .map(|(id, g)| (id, Slot::new(g, 0)))
                .collect(),
        )
    };
    let starts: BTreeMap<SensorId, GearPos> = members.iter().map(|(&id, &(s, _))| (id, s)).collect();
    let goals: Vec<StateKey> = (0..sub.period())
        .map(|o| {
            place(
                members.iter().map(|(&id, &(_, g))| (id, g)).collect(),
                o,
            )
            .key()
        })
        .collect();
    let mut seen: HashSet<StateKey> = HashSet::new();
    let mut frontier: VecDeque<WorldState> = VecDeque::new();
    for offset in 0..sub.period() {
        let state = place(starts.clone(), offset);
        if validate_state(&sub, &state).is_ok() && seen.insert(state.key()) {
            frontier.push_back(state);
        }
    }
    while let Some(state) = frontier.pop_front() {
        if goals.contains(&state.key()) {
            return true;
        }
        if seen.len() > CLASS_SCREEN_NODES {
            return true;
        }
        let mut steps: Vec<PlanStep> = vec![PlanStep::rotation(-1), PlanStep::rotation(1)];
        steps.extend(
            candidate_transfers(&sub, &state)
                .into_iter()
                .map(|t| PlanStep::new(0, vec![t])),
        );
        for step in steps {
            if let Ok(next) = apply_step(&sub, &state, &step) {
                if seen.insert(next.key()) {
                    frontier.push_back(next);
                }
            }
        }
    }
    false
}

/// Run a random legal walk (unit rotations and single transfers at the
/// current offset) for `WALK_SCALE * q` steps and take each sensor's final
/// gear as its goal. The walk itself witnesses that the goals are
/// simultaneously reachable; sensors the walk never moved keep their start
/// gear.
///
/// Transfers do the displacing while rotations only open new alignments, so
/// transfers are favored three to one whenever both exist; a uniform walk
/// would mostly rotate in place and leave near-trivial goals.
fn walk_targets(
    config: &GridConfig,
    start: &WorldState,
    q: u32,
    rng: &mut Xoshiro256StarStar,
) -> BTreeMap<SensorId, Target> {
    let legal = |state: &WorldState, step: &PlanStep| apply_step(config, state, step).is_ok();
    let mut state = start.clone();
    for _ in 0..WALK_SCALE * q {
        let rotations: Vec<PlanStep> = [-1, 1]
            .into_iter()
            .map(PlanStep::rotation)
            .filter(|s| legal(&state, s))
            .collect();
        let transfers: Vec<PlanStep> = candidate_transfers(config, &state)
            .into_iter()
            .map(|t| PlanStep::new(0, vec![t]))
            .filter(|s| legal(&state, s))
            .collect();
        let pool = if transfers.is_empty() || (!rotations.is_empty() && rng.below(4) == 0) {
            &rotations
        } else {
            &transfers
        };
        if pool.is_empty() {
            break;
        }
        let pick = rng.below(pool.len() as u64) as usize;
        state = apply_step(config, &state, &pool[pick]).expect("the pool kept legal steps");
    }
    state
        .placements
        .iter()
        .map(|(&id, slot)| (id, Target::gear(slot.gear)))
        .collect()
}
