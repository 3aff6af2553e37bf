//! State-action baseline on the shared actor-critic plumbing.
//!
//! The critic scores `(s, a)` and the actor proposes actions inside the
//! action box. Everything else (buffer, delayed copies, evaluation) is the
//! code path the transition learner uses.

use crate::agent::{train, Actor, AgentConfig, Critic, Formulation, TrainOutcome};
use crate::error::Result;
use crate::mmrp::Environment;

/// Critic over `concat(s, a)`.
pub type SavCritic = Critic;
/// Actor `s → a`, squashed into the action box.
pub type DdpgActor = Actor;

/// Trains the baseline with the same schedule as the transition learner.
pub fn ddpg_train(env: &dyn Environment, config: &AgentConfig, seed: u64) -> Result<TrainOutcome> {
    train(env, Formulation::StateAction, config, seed)
}
