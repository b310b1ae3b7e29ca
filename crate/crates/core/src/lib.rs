//! Kinematic model, planners, and verification oracle for gear-matrix
//! sensor platforms.
//!
//! A platform is a grid of meshed gears whose rims carry sensor channels.
//! Rotating the matrix realigns the channels; at certain alignments a
//! sensor can hop between adjacent gears. This crate models that machine
//! exactly, in integer degrees, and builds on the model in layers:
//!
//! - [`gear`]: grid geometry, channel alignment, the step evolution rule,
//!   and the pairwise occupancy constraint every state must satisfy.
//! - [`planner`]: an optimal A* planner for small instances, a scalable
//!   greedy planner, and plan validation by replay.
//! - [`oracle`]: exhaustive ground truth for small platforms and
//!   executable checks of the structural claims.
//! - [`sim`]: seeded scenario generation, batch experiments, and CSV
//!   emission.
//! - [`formats`]: JSON interchange documents and the actuator command
//!   script.
//! - [`rng`]: a small deterministic PRNG, so results are reproducible
//!   byte for byte across platforms.

pub mod formats;
pub mod gear;
pub mod oracle;
pub mod planner;
pub mod rng;
pub mod sim;
