//! Deterministic actor-critic learners.
//!
//! One implementation serves two formulations: the transition learner, whose
//! critic scores `(s, s')` and whose actor proposes next states, and the
//! state-action baseline, whose critic scores `(s, a)` and whose actor
//! proposes actions. [`UpdatePath`] records exactly where they differ.

mod config;
mod learner;
mod networks;
mod projection;
mod train;
pub mod update;

pub use config::AgentConfig;
pub use learner::{ActorCritic, StepLosses};
pub use networks::{normalize_rows, Actor, Critic, CriticSurface, TargetPolicy};
pub use projection::{act, nearest_index, project_next_state, resolve_action, Decision};
pub use train::{eval_seed, evaluate_returns, random_policy_returns, train, TrainOutcome};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mmrp::{BoxBounds, EnvSpec, TransitionSample};
use crate::nn::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Critic over `(s, s')`, actor `s → s'`.
    StateTransition,
    /// Critic over `(s, a)`, actor `s → a`.
    StateAction,
}

impl Formulation {
    /// Configuration-file name of the algorithm using this formulation.
    pub fn algo_name(self) -> &'static str {
        match self {
            Formulation::StateTransition => "sasrl",
            Formulation::StateAction => "ddpg",
        }
    }

    pub fn update_path(self) -> UpdatePath {
        let right = match self {
            Formulation::StateTransition => Slot::NextState,
            Formulation::StateAction => Slot::Action,
        };
        UpdatePath {
            critic_left: Slot::State,
            critic_right: right,
            actor_output: right,
            gradient_slot: right,
            bootstrap: "r + gamma * target_critic(s', target_actor(s')), cut at done",
            critic_loss: "mean squared td(0) error",
            actor_direction: Direction::Maximize,
            target_tracking: "target = eps * online + (1 - eps) * target",
            replay: "uniform with replacement",
            steps_per_iteration: "critic, actor, soft update",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.algo_name())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sasrl" => Ok(Formulation::StateTransition),
            "ddpg" => Ok(Formulation::StateAction),
            other => Err(Error::Config(format!("unknown algo `{other}` (sasrl|ddpg)"))),
        }
    }
}

/// Which field of a sample feeds a network slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    State,
    NextState,
    Action,
}

impl Slot {
    pub fn pick(self, t: &TransitionSample) -> &[f64] {
        match self {
            Slot::State => &t.s,
            Slot::NextState => &t.s_next,
            Slot::Action => &t.a,
        }
    }

    pub fn bounds(self, spec: &EnvSpec) -> &BoxBounds {
        match self {
            Slot::State | Slot::NextState => &spec.state_box,
            Slot::Action => &spec.action_box,
        }
    }
}

/// Declarative description of one learner's update wiring. The update code
/// reads its slots from here.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdatePath {
    pub critic_left: Slot,
    pub critic_right: Slot,
    pub actor_output: Slot,
    pub gradient_slot: Slot,
    pub bootstrap: &'static str,
    pub critic_loss: &'static str,
    pub actor_direction: Direction,
    pub target_tracking: &'static str,
    pub replay: &'static str,
    pub steps_per_iteration: &'static str,
}

impl UpdatePath {
    /// Names of the fields on which two paths disagree.
    pub fn differences(&self, other: &UpdatePath) -> Vec<&'static str> {
        let mut out = Vec::new();
        macro_rules! cmp {
            ($($field:ident),*) => {
                $(if self.$field != other.$field {
                    out.push(stringify!($field));
                })*
            };
        }
        cmp!(
            critic_left,
            critic_right,
            actor_output,
            gradient_slot,
            bootstrap,
            critic_loss,
            actor_direction,
            target_tracking,
            replay,
            steps_per_iteration
        );
        out
    }
}
