//! Scalable deterministic planning: march every sensor toward its goal,
//! sidestep when progress stops, and shake the state with a seeded random
//! move when sidestepping loops.
//!
//! No optimality is promised. The planner is deterministic for a fixed
//! scenario, parameter set, and seed.

use std::collections::{HashMap, HashSet};

use crate::gear::{apply_step, PlanStep, SensorId, Slot, StateKey, Transfer, WorldState};
use crate::rng::{derive_seed, Xoshiro256StarStar};

use super::cost::step_cost;
use super::search::{candidate_transfers, remaining_distance, rotation_reach, sensor_distance};
use super::{Plan, PlanError, PlannerParams, Scenario};

/// Slots a kicked sensor may not re-enter, each until a step index. Blocking
/// the immediate undo forces the walk to route around local minima instead
/// of bouncing on them.
struct Tabu {
    until: HashMap<(SensorId, Slot), u64>,
    tenure: u64,
}

impl Tabu {
    fn new(period: u16) -> Self {
        Self {
            until: HashMap::new(),
            // A couple of revolutions: long enough for every alignment to
            // pass by while the ban holds.
            tenure: 2 * period as u64 + 2,
        }
    }

    fn forbids(&self, transfer: &Transfer, now: u64) -> bool {
        self.until
            .get(&(transfer.sensor, transfer.to))
            .is_some_and(|&until| now < until)
    }

    fn ban(&mut self, sensor: SensorId, vacated: Slot, now: u64) {
        self.until.insert((sensor, vacated), now + self.tenure);
    }
}

/// Route sensors with a prioritized greedy loop.
///
/// Each iteration scores every reachable offset by the largest total
/// distance reduction a conflict-free transfer set achieves there (farthest
/// sensors claim their move first). When nothing reduces the distance, the
/// cheapest sideways step that does not revisit a seen state is taken; after
/// `stall_limit` such steps, a seeded random legal step breaks the pattern.
///
/// A failed walk is retried up to `restarts` times under derived seeds; the
/// first attempt's error is kept when every retry also fails.
pub fn plan_greedy(scenario: &Scenario, params: &PlannerParams) -> Result<Plan, PlanError> {
    scenario.validate()?;
    let mut outcome = greedy_walk(scenario, params, params.seed);
    for attempt in 1..=params.restarts as u64 {
        if outcome.is_ok() {
            break;
        }
        if let ok @ Ok(_) = greedy_walk(scenario, params, derive_seed(&[params.seed, attempt])) {
            outcome = ok;
        }
    }
    outcome
}

fn greedy_walk(scenario: &Scenario, params: &PlannerParams, seed: u64) -> Result<Plan, PlanError> {
    let config = &scenario.config;
    let model = &scenario.cost_model;
    let step_budget = params.step_budget_for(config);
    let stall_limit = params.stall_limit_for(config);
    let mut rng = Xoshiro256StarStar::seeded(seed);

    let mut state = scenario.start.clone();
    let mut steps: Vec<PlanStep> = Vec::new();
    let mut seen: HashSet<StateKey> = HashSet::new();
    seen.insert(state.key());
    let mut stall = 0u64;
    let mut tabu = Tabu::new(config.period());
    let mut best_remaining = remaining_distance(&state, &scenario.targets);
    // Failed lookaheads are the expensive ones; ration them and let the
    // cheap wander run for a while before trying again.
    let mut escape_tokens = 16u32;
    let mut escape_cooldown = 0u64;

    loop {
        if scenario.targets_met(&state) {
            let plan = Plan::from_steps(config, model, steps, true);
            debug_assert!(super::validate_plan(scenario, &plan).valid);
            return Ok(plan);
        }
        if steps.len() as u64 >= step_budget {
            return Err(PlanError::StepBudget {
                steps: steps.len() as u64,
                remaining: best_remaining,
                partial: Box::new(Plan::from_steps(config, model, steps, false)),
            });
        }

        let now = steps.len() as u64;
        let reach = rotation_reach(config, &state);
        let reducing = best_reducing_step(scenario, &state, &reach, &tabu, now);
        if reducing.is_none() && escape_tokens > 0 && now >= escape_cooldown {
            // No single step makes progress: look for a short detour below
            // the best distance seen so far before wandering. Local traffic
            // knots need a few worsening moves that one-step scoring can
            // never pick.
            if let Some(path) = escape_search(scenario, &state, best_remaining) {
                for step in path {
                    let next = apply_step(config, &state, &step)
                        .expect("escape paths replay the search's own steps");
                    seen.insert(next.key());
                    steps.push(step);
                    state = next;
                }
                stall = 0;
                best_remaining = best_remaining.min(remaining_distance(&state, &scenario.targets));
                continue;
            }
            escape_tokens -= 1;
            escape_cooldown = now + stall_limit;
        }
        let chosen = reducing
            .or_else(|| {
                if stall >= stall_limit {
                    None // fall through to the random kick
                } else {
                    cheapest_sideways_step(scenario, &state, &reach, &seen, &tabu, now)
                }
            })
            .map(|step| (step, false))
            .or_else(|| {
                random_step(scenario, &state, &reach, &tabu, now, &mut rng).map(|s| (s, true))
            });

        let Some((step, kicked)) = chosen else {
            return Err(PlanError::Deadlock {
                steps: steps.len() as u64,
                partial: Box::new(Plan::from_steps(config, model, steps, false)),
            });
        };
        let improved = reduction_of(scenario, &state, &step) > 0;
        if kicked {
            for transfer in &step.transfers {
                tabu.ban(transfer.sensor, state.placements[&transfer.sensor], now);
            }
        }
        let next = apply_step(config, &state, &step)
            .expect("greedy planner constructed an illegal step");
        stall = if improved || kicked { 0 } else { stall + 1 };
        seen.insert(next.key());
        steps.push(step);
        state = next;
        best_remaining = best_remaining.min(remaining_distance(&state, &scenario.targets));
    }
}

// Lookahead bounds: stalls are local traffic knots, so a bounded horizon
// and node budget find the thread-through when one exists nearby.
const ESCAPE_NODES: usize = 20_000;
const ESCAPE_DEPTH: usize = 24;

/// Best-first search for a step sequence whose endpoint drops total
/// remaining distance strictly below `baseline`. Explores unit rotations
/// and single transfers, expanding low-distance states first so the search
/// dives toward improvement instead of flooding the neighborhood;
/// consecutive same-way rotations are merged on the way out.
fn escape_search(
    scenario: &Scenario,
    state: &WorldState,
    baseline: u64,
) -> Option<Vec<PlanStep>> {
    let config = &scenario.config;
    let mut visited: HashSet<StateKey> = HashSet::new();
    visited.insert(state.key());
    let mut nodes: Vec<(WorldState, Vec<PlanStep>)> = vec![(state.clone(), Vec::new())];
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(u64, usize, usize)>> =
        std::collections::BinaryHeap::new();
    heap.push(std::cmp::Reverse((baseline, 0, 0)));
    let mut expanded = 0usize;
    while let Some(std::cmp::Reverse((_, _, index))) = heap.pop() {
        let (current, path) = nodes[index].clone();
        if path.len() >= ESCAPE_DEPTH {
            continue;
        }
        expanded += 1;
        if expanded > ESCAPE_NODES {
            return None;
        }
        let mut unit_steps: Vec<PlanStep> = vec![PlanStep::rotation(-1), PlanStep::rotation(1)];
        unit_steps.extend(
            candidate_transfers(config, &current)
                .into_iter()
                .map(|t| PlanStep::new(0, vec![t])),
        );
        for step in unit_steps {
            let Ok(next) = apply_step(config, &current, &step) else {
                continue;
            };
            if !visited.insert(next.key()) {
                continue;
            }
            let mut extended = path.clone();
            extended.push(step);
            let remaining = remaining_distance(&next, &scenario.targets);
            if remaining < baseline {
                return Some(merge_rotations(extended));
            }
            let depth = extended.len();
            let order = nodes.len();
            nodes.push((next, extended));
            heap.push(std::cmp::Reverse((remaining, depth, order)));
        }
    }
    None
}

/// Collapse runs of same-way pure rotations into single steps. The sweep
/// passes the same intermediate offsets, so legality is unchanged.
fn merge_rotations(path: Vec<PlanStep>) -> Vec<PlanStep> {
    let mut merged: Vec<PlanStep> = Vec::new();
    for step in path {
        if let Some(last) = merged.last_mut() {
            let both_pure = last.transfers.is_empty() && step.transfers.is_empty();
            if both_pure && last.rotate.signum() == step.rotate.signum() {
                last.rotate += step.rotate;
                continue;
            }
        }
        merged.push(step);
    }
    merged
}

/// Total distance reduction of a candidate step.
fn reduction_of(scenario: &Scenario, state: &WorldState, step: &PlanStep) -> i64 {
    step.transfers
        .iter()
        .map(|t| {
            let target = &scenario.targets[&t.sensor];
            let from = &state.placements[&t.sensor];
            sensor_distance(from, target) as i64 - sensor_distance(&t.to, target) as i64
        })
        .sum()
}

/// The best (offset, maximal reducing transfer set) step, if any reduces
/// total distance. Ties prefer the smaller rotation, then the lower offset.
/// Tabu transfers are skipped unless they land the sensor on its goal.
fn best_reducing_step(
    scenario: &Scenario,
    state: &WorldState,
    reach: &[(u16, i32)],
    tabu: &Tabu,
    now: u64,
) -> Option<PlanStep> {
    let config = &scenario.config;
    let mut best: Option<(i64, u32, u16, PlanStep)> = None;
    for &(offset, rotate) in reach {
        let mut at_offset = state.clone();
        at_offset.offset = offset;
        // Reducing moves only, farthest sensors first; each added transfer
        // must keep the whole step applicable.
        let mut candidates: Vec<(u32, Transfer)> = candidate_transfers(config, &at_offset)
            .into_iter()
            .filter_map(|t| {
                let target = &scenario.targets[&t.sensor];
                let from = &at_offset.placements[&t.sensor];
                let d = sensor_distance(from, target);
                let landed = sensor_distance(&t.to, target);
                if tabu.forbids(&t, now) && landed != 0 {
                    return None;
                }
                (landed < d).then_some((d, t))
            })
            .collect();
        candidates.sort_by_key(|&(d, t)| (std::cmp::Reverse(d), t.sensor, t.to));

        let mut chosen: Vec<Transfer> = Vec::new();
        for (_, candidate) in candidates {
            if chosen
                .iter()
                .any(|t| t.sensor == candidate.sensor || t.to == candidate.to)
            {
                continue;
            }
            chosen.push(candidate);
            let trial = PlanStep::new(rotate, chosen.clone());
            if apply_step(config, state, &trial).is_err() {
                chosen.pop();
            }
        }
        if chosen.is_empty() {
            continue;
        }
        let step = PlanStep::new(rotate, chosen);
        let reduction = reduction_of(scenario, state, &step);
        debug_assert!(reduction > 0);
        let key = (reduction, rotate.unsigned_abs(), offset);
        let better = match &best {
            None => true,
            Some((r, slots, off, _)) => {
                (key.0, std::cmp::Reverse(key.1), std::cmp::Reverse(key.2))
                    > (*r, std::cmp::Reverse(*slots), std::cmp::Reverse(*off))
            }
        };
        if better {
            best = Some((key.0, key.1, key.2, step));
        }
    }
    best.map(|(_, _, _, step)| step)
}

/// The cheapest legal step that neither worsens total distance nor revisits
/// a seen state: a pure rotation or a sideways single transfer.
fn cheapest_sideways_step(
    scenario: &Scenario,
    state: &WorldState,
    reach: &[(u16, i32)],
    seen: &HashSet<StateKey>,
    tabu: &Tabu,
    now: u64,
) -> Option<PlanStep> {
    let config = &scenario.config;
    let model = &scenario.cost_model;
    let mut best: Option<(f64, PlanStep)> = None;
    let mut consider = |step: PlanStep, next: &WorldState| {
        if seen.contains(&next.key()) {
            return;
        }
        let cost = step_cost(config, &step, model);
        let better = match &best {
            None => true,
            Some((c, incumbent)) => match cost.total_cmp(c) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => {
                    (step.rotate.abs(), step.rotate, &step.transfers)
                        < (incumbent.rotate.abs(), incumbent.rotate, &incumbent.transfers)
                }
            },
        };
        if better {
            best = Some((cost, step));
        }
    };
    for &(offset, rotate) in reach {
        let mut at_offset = state.clone();
        at_offset.offset = offset;
        if rotate != 0 {
            consider(PlanStep::rotation(rotate), &at_offset);
        }
        for t in candidate_transfers(config, &at_offset) {
            if tabu.forbids(&t, now) {
                continue;
            }
            let target = &scenario.targets[&t.sensor];
            let from = &at_offset.placements[&t.sensor];
            if sensor_distance(&t.to, target) != sensor_distance(from, target) {
                continue; // reducing moves were already ruled out; skip worsening ones
            }
            let step = PlanStep::new(rotate, vec![t]);
            if let Ok(next) = apply_step(config, state, &step) {
                consider(step, &next);
            }
        }
    }
    best.map(|(_, step)| step)
}

/// A uniformly random legal single step: any reachable rotation or any
/// single transfer at any reachable offset, regardless of distance effect.
/// Tabu transfers only join the pool when nothing else is legal.
fn random_step(
    scenario: &Scenario,
    state: &WorldState,
    reach: &[(u16, i32)],
    tabu: &Tabu,
    now: u64,
    rng: &mut Xoshiro256StarStar,
) -> Option<PlanStep> {
    let config = &scenario.config;
    let mut options: Vec<PlanStep> = Vec::new();
    let mut banned: Vec<PlanStep> = Vec::new();
    for &(offset, rotate) in reach {
        let mut at_offset = state.clone();
        at_offset.offset = offset;
        if rotate != 0 {
            options.push(PlanStep::rotation(rotate));
        }
        for t in candidate_transfers(config, &at_offset) {
            let step = PlanStep::new(rotate, vec![t]);
            if apply_step(config, state, &step).is_ok() {
                if tabu.forbids(&t, now) {
                    banned.push(step);
                } else {
                    options.push(step);
                }
            }
        }
    }
    if options.is_empty() {
        options = banned;
    }
    if options.is_empty() {
        None
    } else {
        let pick = rng.below(options.len() as u64) as usize;
        Some(options.swap_remove(pick))
    }
}
