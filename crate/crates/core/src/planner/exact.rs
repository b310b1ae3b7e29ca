//! Optimal planning by A* over whole simulation steps.
//!
//! The heuristic (outstanding transfers times the transfer charge) is
//! admissible and consistent, so the first goal node popped carries a
//! minimum-cost plan. Intended for desk-scale instances; larger ones run
//! into the expansion budget.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::gear::{PlanStep, StateKey, WorldState};

use super::cost::CostTotals;
use super::search::{heuristic, successors};
use super::{Plan, PlanError, PlannerParams, Scenario};

struct Node {
    state: WorldState,
    totals: CostTotals,
    parent: usize,
    step: Option<PlanStep>,
}

/// Heap entry ordered so the BinaryHeap pops lowest f first, breaking ties
/// by lower h, then by insertion order (oldest first).
struct Open {
    f: f64,
    h: f64,
    seq: u64,
    node: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Find a minimum-total-cost plan, or prove there is none.
///
/// Deterministic: ties on f are broken by lower heuristic, then insertion
/// order, so identical inputs yield identical plans. With a successor cap
/// small enough to prune (it defaults far above desk-scale subset counts),
/// optimality is no longer guaranteed.
pub fn plan_exact(scenario: &Scenario, params: &PlannerParams) -> Result<Plan, PlanError> {
    scenario.validate()?;
    let config = &scenario.config;
    let model = &scenario.cost_model;

    let mut nodes: Vec<Node> = Vec::new();
    let mut open: BinaryHeap<Open> = BinaryHeap::new();
    let mut best: HashMap<StateKey, f64> = HashMap::new();

    let h0 = heuristic(&scenario.start, &scenario.targets, model);
    nodes.push(Node {
        state: scenario.start.clone(),
        totals: CostTotals::ZERO,
        parent: usize::MAX,
        step: None,
    });
    best.insert(scenario.start.key(), 0.0);
    open.push(Open {
        f: h0,
        h: h0,
        seq: 0,
        node: 0,
    });

    let mut seq = 0u64;
    let mut expanded = 0u64;
    while let Some(entry) = open.pop() {
        let (state, totals) = {
            let node = &nodes[entry.node];
            (node.state.clone(), node.totals)
        };
        let g = totals.value(model);
        // A popped entry may be stale if the state was re-reached cheaper.
        match best.get(&state.key()) {
            Some(&known) if known < g => continue,
            _ => {}
        }
        if scenario.targets_met(&state) {
            let steps = reconstruct(&nodes, entry.node);
            return Ok(Plan::from_steps(config, model, steps, true));
        }
        expanded += 1;
        if expanded > params.max_expansions {
            return Err(PlanError::SearchBudget { expanded });
        }
        for succ in successors(config, &state, &scenario.targets, model, params.successor_cap) {
            let next_totals = totals.plus(succ.totals);
            let next_g = next_totals.value(model);
            let key = succ.state.key();
            match best.get(&key) {
                Some(&known) if known <= next_g => continue,
                _ => {}
            }
            best.insert(key, next_g);
            let h = heuristic(&succ.state, &scenario.targets, model);
            seq += 1;
            nodes.push(Node {
                state: succ.state,
                totals: next_totals,
                parent: entry.node,
                step: Some(succ.step),
            });
            open.push(Open {
                f: next_g + h,
                h,
                seq,
                node: nodes.len() - 1,
            });
        }
    }
    Err(PlanError::Unsolvable)
}

fn reconstruct(nodes: &[Node], mut index: usize) -> Vec<PlanStep> {
    let mut steps = Vec::new();
    while let Some(step) = &nodes[index].step {
        steps.push(step.clone());
        index = nodes[index].parent;
    }
    steps.reverse();
    steps
}
