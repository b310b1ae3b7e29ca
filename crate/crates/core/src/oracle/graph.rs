//! Exhaustive search over the state graph.
//!
//! Two granularities are used. Reachability and step counts come from a
//! breadth-first search over whole simulation steps, matching how plans are
//! counted. Optimal cost comes from least-cost search over atomic moves
//! (one rotation slot, or one transfer); cost is indifferent to how moves
//! are grouped into steps, and every legal step serializes into legal
//! atomic moves, so the two graphs have identical optimal costs.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::gear::{
    apply_step, connections_at, legal_rotation, CostModel, GridConfig, PlanStep, StateKey,
    Transfer, WorldState,
};
use crate::planner::{CostTotals, Scenario};

use super::{guard, OracleError, StateGraphStats};

/// Every legal single transfer at the state's current alignment, derived
/// from the enumerated connection list.
fn transfer_candidates(config: &GridConfig, state: &WorldState) -> Vec<Transfer> {
    let occupancy = state.occupancy();
    let mut out = Vec::new();
    for pair in connections_at(config, state.offset).pairs() {
        match (occupancy.get(&pair.a), occupancy.get(&pair.b)) {
            (Some(&sensor), None) => out.push(Transfer { sensor, to: pair.b }),
            (None, Some(&sensor)) => out.push(Transfer { sensor, to: pair.a }),
            _ => {}
        }
    }
    out.sort_unstable();
    out
}

/// Offsets reachable by one legal rotation, each with a canonical rotate
/// value (fewest slots, ties broken toward +1), plus the current offset.
fn rotation_options(config: &GridConfig, state: &WorldState) -> Vec<(u16, i32)> {
    let period = config.period() as i32;
    let mut options: Vec<(u16, i32)> = vec![(state.offset, 0)];
    for direction in [1i32, -1] {
        let mut cursor = state.clone();
        for magnitude in 1..period {
            match legal_rotation(config, &cursor, direction) {
                Ok(next) => {
                    cursor = next;
                    let rotate = direction * magnitude;
                    match options.iter_mut().find(|(o, _)| *o == cursor.offset) {
                        None => options.push((cursor.offset, rotate)),
                        Some((_, best)) => {
                            if magnitude < best.abs() || (magnitude == best.abs() && rotate > *best)
                            {
                                *best = rotate;
                            }
                        }
                    }
                }
                Err(_) => break,
            }
        }
    }
    options.sort_unstable_by_key(|&(offset, rotate)| (rotate.abs(), rotate < 0, offset));
    options
}

/// Every state exactly one simulation step away, with the step that reaches
/// it: each reachable offset, combined with each conflict-free transfer set
/// legal there (the empty set gives a pure rotation).
pub(crate) fn step_successors(
    config: &GridConfig,
    state: &WorldState,
) -> Vec<(PlanStep, WorldState)> {
    let mut out = Vec::new();
    for (offset, rotate) in rotation_options(config, state) {
        let mut rotated = state.clone();
        rotated.offset = offset;
        let candidates = transfer_candidates(config, &rotated);
        let mut chosen = Vec::new();
        emit_subsets(config, state, rotate, &candidates, 0, &mut chosen, &mut out);
    }
    out
}

/// Depth-first enumeration of transfer subsets with distinct sensors and
/// destinations. A subset that fails to apply is skipped, but its supersets
/// are still tried: an extra transfer can vacate the slot that made a
/// smaller set collide.
fn emit_subsets(
    config: &GridConfig,
    origin: &WorldState,
    rotate: i32,
    candidates: &[Transfer],
    from: usize,
    chosen: &mut Vec<Transfer>,
    out: &mut Vec<(PlanStep, WorldState)>,
) {
    if rotate != 0 || !chosen.is_empty() {
        let step = PlanStep::new(rotate, chosen.clone());
        if let Ok(next) = apply_step(config, origin, &step) {
            out.push((step, next));
        }
    }
    for i in from..candidates.len() {
        let candidate = candidates[i];
        if chosen
            .iter()
            .any(|t| t.sensor == candidate.sensor || t.to == candidate.to)
        {
            continue;
        }
        chosen.push(candidate);
        emit_subsets(config, origin, rotate, candidates, i + 1, chosen, out);
        chosen.pop();
    }
}

/// A fully explored reachable component, with enough breadcrumbs to rebuild
/// the step sequence to any state in it.
pub(crate) struct Exploration {
    pub states: Vec<WorldState>,
    pub index: HashMap<StateKey, usize>,
    pub depth: Vec<u64>,
    parent: Vec<Option<(usize, PlanStep)>>,
}

impl Exploration {
    pub fn position(&self, state: &WorldState) -> Option<usize> {
        self.index.get(&state.key()).copied()
    }

    /// The step sequence from the start to the state at `idx`.
    pub fn route_to(&self, idx: usize) -> Vec<PlanStep> {
        let mut steps = Vec::new();
        let mut cursor = idx;
        while let Some((prev, step)) = &self.parent[cursor] {
            steps.push(step.clone());
            cursor = *prev;
        }
        steps.reverse();
        steps
    }
}

/// Exhaustive breadth-first search over simulation steps from `start`.
/// Either the whole component is explored or an error is returned; the
/// result is never silently truncated. Discovery order is deterministic
/// and breadth-first, so each state's depth is its minimal step count.
pub(crate) fn explore(config: &GridConfig, start: &WorldState) -> Result<Exploration, OracleError> {
    guard(config, start.sensor_count())?;
    let mut exploration = Exploration {
        states: vec![start.clone()],
        index: HashMap::from([(start.key(), 0)]),
        depth: vec![0],
        parent: vec![None],
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(at) = queue.pop_front() {
        let here = exploration.states[at].clone();
        for (step, next) in step_successors(config, &here) {
            if exploration.index.contains_key(&next.key()) {
                continue;
            }
            let idx = exploration.states.len();
            exploration.index.insert(next.key(), idx);
            exploration.states.push(next);
            exploration.depth.push(exploration.depth[at] + 1);
            exploration.parent.push(Some((at, step)));
            queue.push_back(idx);
        }
    }
    Ok(exploration)
}

/// Exact reachability from `start` to any state satisfying `goal`.
///
/// Step counts follow simulation-step semantics; the optimal cost (under
/// the default cost model) comes from the atomic-move relaxation, which is
/// cost-exact.
pub fn bfs_reach(
    config: &GridConfig,
    start: &WorldState,
    goal: impl Fn(&WorldState) -> bool,
) -> Result<StateGraphStats, OracleError> {
    let exploration = explore(config, start)?;
    let goal_idx = exploration.states.iter().position(goal);
    let optimal_cost = goal_idx.map(|idx| {
        let reach_goal = |s: &WorldState| s == &exploration.states[idx];
        cheapest_totals(config, start, reach_goal)
            .expect("BFS-reachable goal must be cost-reachable")
            .value(&CostModel::default())
    });
    Ok(StateGraphStats {
        reachable_count: exploration.states.len() as u64,
        optimal_steps: goal_idx.map(|idx| exploration.depth[idx]),
        optimal_cost,
    })
}

/// Heap entry for least-cost search; `BinaryHeap` pops the lowest value
/// first, ties resolved by insertion order.
struct QueueEntry {
    value: f64,
    seq: u64,
    at: usize,
    totals: CostTotals,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueEntry {}
impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Least-cost search over atomic moves: a single rotation slot (weight in
/// degrees) or a single transfer (weight one transfer charge). Costs are
/// accumulated as integer totals; the default model only ranks the queue,
/// so any model with positive weights would find the same totals.
fn cheapest_totals(
    config: &GridConfig,
    start: &WorldState,
    goal: impl Fn(&WorldState) -> bool,
) -> Option<CostTotals> {
    let model = CostModel::default();
    let slot_degrees = config.slot_degrees() as u64;
    let mut states: Vec<WorldState> = vec![start.clone()];
    let mut best: HashMap<StateKey, CostTotals> = HashMap::from([(start.key(), CostTotals::ZERO)]);
    let mut heap = BinaryHeap::from([QueueEntry {
        value: 0.0,
        seq: 0,
        at: 0,
        totals: CostTotals::ZERO,
    }]);
    let mut seq = 0u64;
    while let Some(entry) = heap.pop() {
        let here = states[entry.at].clone();
        if best.get(&here.key()) != Some(&entry.totals) {
            continue; // superseded by a cheaper path
        }
        if goal(&here) {
            return Some(entry.totals);
        }
        let mut moves: Vec<(CostTotals, WorldState)> = Vec::new();
        for direction in [1, -1] {
            if let Ok(next) = legal_rotation(config, &here, direction) {
                moves.push((
                    CostTotals {
                        degrees: slot_degrees,
                        transfers: 0,
                    },
                    next,
                ));
            }
        }
        for transfer in transfer_candidates(config, &here) {
            let step = PlanStep::new(0, vec![transfer]);
            if let Ok(next) = apply_step(config, &here, &step) {
                moves.push((
                    CostTotals {
                        degrees: 0,
                        transfers: 1,
                    },
                    next,
                ));
            }
        }
        for (delta, next) in moves {
            let candidate = entry.totals.plus(delta);
            let key = next.key();
            let improved = match best.get(&key) {
                None => true,
                Some(incumbent) => {
                    candidate.value(&model).total_cmp(&incumbent.value(&model)) == Ordering::Less
                }
            };
            if improved {
                best.insert(key, candidate);
                seq += 1;
                states.push(next);
                heap.push(QueueEntry {
                    value: candidate.value(&model),
                    seq,
                    at: states.len() - 1,
                    totals: candidate,
                });
            }
        }
    }
    None
}

/// The exact minimum plan cost for a scenario, by exhaustive search.
pub fn dijkstra_optimal_cost(scenario: &Scenario) -> Result<f64, OracleError> {
    scenario.validate()?;
    guard(&scenario.config, scenario.start.sensor_count())?;
    match cheapest_totals(&scenario.config, &scenario.start, |s| {
        scenario.targets_met(s)
    }) {
        Some(totals) => Ok(totals.value(&scenario.cost_model)),
        None => Err(OracleError::Unreachable),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::gear::{state_from, GearPos, SensorId, Slot};
    use crate::planner::Target;

    #[test]
    fn swap_takes_two_compressed_steps() {
        let config = GridConfig::new(2, 2, 1).unwrap();
        let start = state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0)]);
        let want = state_from(0, &[(0, (1, 1), 0), (1, (0, 0), 0)]).placements;
        let stats = bfs_reach(&config, &start, move |s| s.placements == want).unwrap();
        assert_eq!(stats.optimal_steps, Some(2));
        assert!((stats.optimal_cost.unwrap() - 2.62).abs() < 1e-9);
    }

    #[test]
    fn start_satisfying_goal_is_zero_steps() {
        let config = GridConfig::new(2, 2, 1).unwrap();
        let start = state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0)]);
        let stats = bfs_reach(&config, &start, |s| s.placements == start.placements).unwrap();
        assert_eq!(stats.optimal_steps, Some(0));
        assert_eq!(stats.optimal_cost, Some(0.0));
    }

    #[test]
    fn over_capacity_pair_cannot_swap() {
        // Two sensors on a 1x2 single-channel strip exceed its capacity of
        // one; the aligned offset always joins both slots into one pair, so
        // the only valid states sit at the crossed offset and no transfer
        // can ever fire.
        let config = GridConfig::new(1, 2, 1).unwrap();
        let start = state_from(1, &[(0, (0, 0), 0), (1, (0, 1), 0)]);
        let want = state_from(1, &[(0, (0, 1), 0), (1, (0, 0), 0)]).placements;
        let stats = bfs_reach(&config, &start, move |s| s.placements == want).unwrap();
        assert_eq!(stats.reachable_count, 1);
        assert_eq!(stats.optimal_steps, None);
        assert_eq!(stats.optimal_cost, None);
    }

    #[test]
    fn guard_rejects_oversized_spaces() {
        let config = GridConfig::new(9, 9, 1).unwrap();
        let placements: Vec<(u32, (u16, u16), u16)> = (0..41u32)
            .map(|i| (i, (i as u16 / 9, i as u16 % 9), 0))
            .collect();
        let start = state_from(0, &placements);
        assert!(matches!(
            bfs_reach(&config, &start, |_| false),
            Err(OracleError::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn dijkstra_matches_the_known_swap_optimum() {
        let config = GridConfig::new(2, 2, 1).unwrap();
        let scenario = Scenario {
            config,
            start: state_from(0, &[(0, (0, 0), 0), (1, (1, 1), 0)]),
            targets: BTreeMap::from([
                (SensorId(0), Target::gear(GearPos::new(1, 1))),
                (SensorId(1), Target::gear(GearPos::new(0, 0))),
            ]),
            cost_model: CostModel::default(),
        };
        let cost = dijkstra_optimal_cost(&scenario).unwrap();
        assert!((cost - 2.62).abs() < 1e-9);
    }

    #[test]
    fn dijkstra_charges_a_single_aligned_transfer() {
        let config = GridConfig::new(2, 2, 1).unwrap();
        let scenario = Scenario {
            config,
            start: state_from(0, &[(0, (0, 0), 0)]),
            targets: BTreeMap::from([(SensorId(0), Target::gear(GearPos::new(0, 1)))]),
            cost_model: CostModel::default(),
        };
        let cost = dijkstra_optimal_cost(&scenario).unwrap();
        assert!((cost - 0.56).abs() < 1e-12);
    }

    #[test]
    fn dijkstra_reports_unreachable_goals() {
        let config = GridConfig::new(1, 2, 1).unwrap();
        let scenario = Scenario {
            config,
            start: state_from(1, &[(0, (0, 0), 0), (1, (0, 1), 0)]),
            targets: BTreeMap::from([
                (SensorId(0), Target::gear(GearPos::new(0, 1))),
                (SensorId(1), Target::gear(GearPos::new(0, 0))),
            ]),
            cost_model: CostModel::default(),
        };
        assert_eq!(
            dijkstra_optimal_cost(&scenario),
            Err(OracleError::Unreachable)
        );
    }

    #[test]
    fn step_successors_forbid_chained_transfers() {
        // One step may not move a sensor through a slot another sensor
        // vacates in the same step, and may not hop one sensor twice.
        let config = GridConfig::new(1, 3, 1).unwrap();
        let start = state_from(0, &[(0, (0, 0), 0)]);
        let two_hops = Slot::new(GearPos::new(0, 2), 0);
        assert!(step_successors(&config, &start)
            .iter()
            .all(|(_, next)| next.placements[&SensorId(0)] != two_hops));
    }
}
