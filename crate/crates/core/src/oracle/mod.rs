//! Ground truth by exhaustion.
//!
//! Searches the complete state graph of small platforms to answer the
//! questions the planners answer heuristically, and runs executable checks
//! of the structural claims everything else leans on: the two-sensor base
//! set, the in-place swap, checkerboard transferability, and the capacity
//! bound.
//!
//! Successor sets here are re-derived from the evolution rule and the
//! enumerated connection lists, not borrowed from the planner's search
//! code, so agreement between oracle and planner is evidence rather than
//! tautology.

mod checks;
mod graph;

pub use checks::{check_capacity, check_checkerboard, check_g2, check_swap};
pub use graph::{bfs_reach, dijkstra_optimal_cost};

pub(crate) use graph::explore;

use thiserror::Error;

use crate::gear::GridConfig;
use crate::planner::{Plan, ScenarioError};

/// Hard ceiling on labeled states an exhaustive search may visit.
pub const STATE_GUARD: u64 = 10_000_000;

/// Why an oracle query was refused or came back empty.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("state space estimate {estimate} exceeds the oracle guard {limit}")]
    StateSpaceTooLarge { estimate: u64, limit: u64 },
    #[error("the goal is unreachable from the start state")]
    Unreachable,
    #[error("scenario rejected: {0}")]
    Scenario(#[from] ScenarioError),
}

/// Upper bound on the labeled state count: ordered placements of `sensors`
/// distinct slots, times the rotation period. Saturates at `u64::MAX`.
pub fn state_space_estimate(config: &GridConfig, sensors: usize) -> u64 {
    let slots = config.slot_count() as u128;
    let mut total = config.period() as u128;
    for drawn in 0..sensors as u128 {
        if drawn >= slots {
            return 0; // more sensors than slots: nothing to search
        }
        total = total.saturating_mul(slots - drawn);
        if total > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    total as u64
}

pub(crate) fn guard(config: &GridConfig, sensors: usize) -> Result<(), OracleError> {
    let estimate = state_space_estimate(config, sensors);
    if estimate > STATE_GUARD {
        Err(OracleError::StateSpaceTooLarge {
            estimate,
            limit: STATE_GUARD,
        })
    } else {
        Ok(())
    }
}

/// Summary of one exhaustive reachability query.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGraphStats {
    /// States in the start's reachable component.
    pub reachable_count: u64,
    /// Fewest simulation steps to a goal state, when one is reachable.
    pub optimal_steps: Option<u64>,
    /// Least total cost to a goal state under the default cost model.
    pub optimal_cost: Option<f64>,
}

/// Which structural claim a report is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    G2,
    Swap,
    Checkerboard,
    Capacity,
}

impl Claim {
    pub fn id(self) -> &'static str {
        match self {
            Claim::G2 => "g2",
            Claim::Swap => "swap",
            Claim::Checkerboard => "checkerboard",
            Claim::Capacity => "capacity",
        }
    }
}

/// Outcome of one executable check: what was tested, whether it held, the
/// figures behind the verdict, and a replayable witness plan when the check
/// produces one.
#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub claim: Claim,
    pub config: GridConfig,
    pub holds: bool,
    pub details: serde_json::Value,
    pub witness: Option<Plan>,
}
