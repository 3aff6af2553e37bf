//! Actor-critic learning over state transitions.
//!
//! The learner estimates a state-transition value `Φ(s, s')` and a
//! deterministic next-state policy `μ(s)`; an inverse transition model turns a
//! chosen next state back into an action. A DDPG baseline shares the same
//! plumbing, and an occupancy probe estimates the ratio `k = R2 / R1` from
//! logged trajectories.

pub mod agent;
pub mod behavior;
pub mod curve;
pub mod ddpg;
pub mod env;
pub mod harness;
pub mod error;
pub mod mmrp;
pub mod nn;
pub mod probe;
pub mod transition;

pub use error::{Error, Result};
