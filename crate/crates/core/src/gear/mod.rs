//! The gear-matrix model: grid configuration, channel geometry, and the
//! step-by-step evolution rule with its safety constraint.

mod connect;
mod state;
mod types;

pub use connect::{
    carried_channel, channel_angle, connected_partners, connections_at, conservation_key,
    partner_channel, rail_at, ChannelPair, ConnectionSet, Rail,
};
pub use state::{
    apply_step, legal_rotation, state_from, validate_state, PlanStep, StateKey, StateViolation,
    StepError, Transfer, WorldState,
};
pub use types::{
    capacity, checkerboard_classes, ConfigError, CostModel, GearPos, GridConfig, SensorId, Slot,
};
