//! Building blocks shared by the planners: distance estimates, reachable
//! rotation targets, and full successor enumeration for the exact search.

use std::collections::BTreeMap;

use crate::gear::{
    apply_step, connected_partners, legal_rotation, CostModel, GridConfig, PlanStep, SensorId,
    Slot, Transfer, WorldState,
};

use super::cost::CostTotals;
use super::Target;

/// Transfers a sensor still needs, ignoring rotation: the gear-grid
/// Manhattan distance, except that a sensor parked on its target gear but on
/// the wrong channel needs a two-hop detour (channels can only be switched
/// by leaving the gear and re-entering at a different alignment).
pub fn sensor_distance(slot: &Slot, target: &Target) -> u32 {
    let manhattan = slot.gear.manhattan(&target.gear);
    match target.channel {
        Some(channel) if manhattan == 0 && channel != slot.channel => 2,
        _ => manhattan,
    }
}

/// Sum of sensor distances: a lower bound on the transfers left to perform.
pub fn remaining_distance(state: &WorldState, targets: &BTreeMap<SensorId, Target>) -> u64 {
    targets
        .iter()
        .filter_map(|(sensor, target)| {
            let slot = state.placements.get(sensor)?;
            Some(sensor_distance(slot, target) as u64)
        })
        .sum()
}

/// Admissible cost-to-go: every outstanding transfer costs at least one
/// transfer charge, and rotation can only add to that.
pub fn heuristic(
    state: &WorldState,
    targets: &BTreeMap<SensorId, Target>,
    model: &CostModel,
) -> f64 {
    remaining_distance(state, targets) as f64 * model.transfer_cost
}

/// Offsets reachable within one step's rotation phase, with the signed slot
/// count that reaches each: the shorter legal sweep, ties broken toward +1.
/// The current offset is included as (offset, 0) and always comes first.
pub fn rotation_reach(config: &GridConfig, state: &WorldState) -> Vec<(u16, i32)> {
    let period = config.period();
    let mut forward = vec![None; period as usize]; // slots to reach offset, sweeping +1
    let mut backward = vec![None; period as usize];
    for (direction, reach) in [(1i32, &mut forward), (-1i32, &mut backward)] {
        let mut cursor = state.clone();
        for slots in 1..period {
            match legal_rotation(config, &cursor, direction) {
                Ok(next) => {
                    reach[next.offset as usize] = Some(slots);
                    cursor = next;
                }
                Err(_) => break,
            }
        }
    }
    let mut out = Vec::with_capacity(period as usize);
    out.push((state.offset, 0));
    for target in 0..period {
        if target == state.offset {
            continue;
        }
        let rotate = match (forward[target as usize], backward[target as usize]) {
            (Some(f), Some(b)) if f <= b => Some(f as i32),
            (Some(_), Some(b)) => Some(-(b as i32)),
            (Some(f), None) => Some(f as i32),
            (None, Some(b)) => Some(-(b as i32)),
            (None, None) => None,
        };
        if let Some(rotate) = rotate {
            out.push((target, rotate));
        }
    }
    // Cheapest rotations first; positive direction wins ties.
    out.sort_by_key(|&(offset, rotate)| (rotate.unsigned_abs(), rotate < 0, offset));
    out
}

/// Legal single transfers available at the state's current offset: sensors
/// on an aligned rail whose opposite end is free. (Pair-level parity of the
/// combined step is checked later, per subset.)
pub fn candidate_transfers(config: &GridConfig, state: &WorldState) -> Vec<Transfer> {
    let occupancy = state.occupancy();
    let mut out = Vec::new();
    for (&sensor, slot) in &state.placements {
        for partner in connected_partners(config, slot, state.offset) {
            if !occupancy.contains_key(&partner) {
                out.push(Transfer {
                    sensor,
                    to: partner,
                });
            }
        }
    }
    out
}

/// One expansion option: the step, the state it produces, and its cost.
#[derive(Debug, Clone)]
pub struct Successor {
    pub step: PlanStep,
    pub state: WorldState,
    pub totals: CostTotals,
    pub cost: f64,
}

/// Everything one step can do from `state`: for each reachable offset, every
/// parity-respecting subset of the transfers available there, plus the pure
/// rotations. The identity step is excluded.
///
/// When more than `cap` transfer-carrying steps exist, the best `cap` are
/// kept, ranked by total distance reduction (descending), then subset size
/// (descending), then lexicographic sensor ids. Output order is
/// deterministic.
pub fn successors(
    config: &GridConfig,
    state: &WorldState,
    targets: &BTreeMap<SensorId, Target>,
    model: &CostModel,
    cap: usize,
) -> Vec<Successor> {
    // Candidate lists beyond this size would make subset enumeration blow
    // up; keep the highest-reduction candidates. Exact planning domains
    // (few sensors) never reach the limit.
    const MAX_SUBSET_CANDIDATES: usize = 16;

    let mut rotations = Vec::new();
    let mut moves: Vec<(i64, Successor)> = Vec::new();
    for (offset, rotate) in rotation_reach(config, state) {
        let rotated = if rotate == 0 {
            state.clone()
        } else {
            let mut s = state.clone();
            s.offset = offset;
            s
        };
        if rotate != 0 {
            let step = PlanStep::rotation(rotate);
            let totals = CostTotals::of_step(config, &step);
            rotations.push(Successor {
                cost: totals.value(model),
                totals,
                state: rotated.clone(),
                step,
            });
        }

        let mut candidates = candidate_transfers(config, &rotated);
        if candidates.len() > MAX_SUBSET_CANDIDATES {
            candidates.sort_by_key(|t| {
                let from = rotated.placements[&t.sensor];
                let reduction = transfer_reduction(&from, &t.to, &t.sensor, targets);
                (-reduction, t.sensor, t.to)
            });
            candidates.truncate(MAX_SUBSET_CANDIDATES);
            candidates.sort_unstable();
        }
        enumerate_subsets(&candidates, &mut |chosen| {
            let step = PlanStep::new(rotate, chosen.to_vec());
            match apply_step(config, state, &step) {
                Ok(next) => {
                    let reduction: i64 = chosen
                        .iter()
                        .map(|t| {
                            let from = rotated.placements[&t.sensor];
                            transfer_reduction(&from, &t.to, &t.sensor, targets)
                        })
                        .sum();
                    let totals = CostTotals::of_step(config, &step);
                    moves.push((
                        reduction,
                        Successor {
                            cost: totals.value(model),
                            totals,
                            state: next,
                            step,
                        },
                    ));
                }
                Err(_) => {} // parity violation within the combined step
            }
        });
    }

    moves.sort_by(|(ra, a), (rb, b)| {
        rb.cmp(ra)
            .then_with(|| b.step.transfers.len().cmp(&a.step.transfers.len()))
            .then_with(|| sensor_ids(&a.step).cmp(&sensor_ids(&b.step)))
            .then_with(|| a.step.rotate.abs().cmp(&b.step.rotate.abs()))
            .then_with(|| a.step.transfers.cmp(&b.step.transfers))
            .then_with(|| a.step.rotate.cmp(&b.step.rotate))
    });
    moves.truncate(cap);

    let mut out = rotations;
    out.extend(moves.into_iter().map(|(_, s)| s));
    out
}

fn sensor_ids(step: &PlanStep) -> Vec<SensorId> {
    step.transfers.iter().map(|t| t.sensor).collect()
}

fn transfer_reduction(
    from: &Slot,
    to: &Slot,
    sensor: &SensorId,
    targets: &BTreeMap<SensorId, Target>,
) -> i64 {
    match targets.get(sensor) {
        Some(target) => {
            sensor_distance(from, target) as i64 - sensor_distance(to, target) as i64
        }
        None => 0,
    }
}

/// Visit every non-empty subset of `candidates` whose sensors and
/// destinations are pairwise distinct. Parity of the combined step is the
/// visitor's concern; structural conflicts are pruned here because they
/// doom every superset too.
fn enumerate_subsets(candidates: &[Transfer], visit: &mut dyn FnMut(&[Transfer])) {
    fn recurse(
        candidates: &[Transfer],
        start: usize,
        chosen: &mut Vec<Transfer>,
        visit: &mut dyn FnMut(&[Transfer]),
    ) {
        for i in start..candidates.len() {
            let c = candidates[i];
            if chosen.iter().any(|t| t.sensor == c.sensor || t.to == c.to) {
                continue;
            }
            chosen.push(c);
            visit(chosen);
            recurse(candidates, i + 1, chosen, visit);
            chosen.pop();
        }
    }
    let mut chosen = Vec::new();
    recurse(candidates, 0, &mut chosen, visit);
}
