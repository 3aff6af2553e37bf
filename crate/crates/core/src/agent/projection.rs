use rand_distr::{Distribution, StandardNormal};

use super::{ActorCritic, Formulation};
use crate::error::{Error, Result};
use crate::mmrp::{ActionVec, EnvState, Environment, SimRng};
use crate::transition::TransitionModel;

/// Index of the Euclidean-nearest candidate; the lowest index wins ties.
pub fn nearest_index(candidates: &[EnvState], raw: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let d: f64 = c.iter().zip(raw).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Maps a raw next-state proposal onto the nearest of `n` feasible
/// candidates reachable from `s`.
pub fn project_next_state(env: &dyn Environment, s: &EnvState, raw: &[f64], n: usize) -> Result<EnvState> {
    let candidates = env.feasible_candidates(s, n);
    let idx = nearest_index(&candidates, raw)
        .ok_or_else(|| Error::Config(format!("no feasible candidates (n = {n})")))?;
    Ok(candidates[idx].clone())
}

/// What the agent wants to do from a state.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    /// Projected next state; only for the transition formulation.
    pub target: Option<EnvState>,
    /// Action, unless it has to come from a transition model.
    pub action: Option<ActionVec>,
}

/// Greedy (`noise = None`) or Gaussian-perturbed decision. The noise scale is
/// `sigma` times the half-width of the actor's output box.
pub fn act(
    agent: &ActorCritic,
    env: &dyn Environment,
    s: &EnvState,
    projection_candidates: usize,
    sigma: f64,
    noise: Option<&mut SimRng>,
) -> Result<Decision> {
    let mut raw = agent.actor.propose_one(s);
    let out_box = agent.actor.output_box();
    if let Some(rng) = noise {
        if sigma > 0.0 {
            let half = out_box.half_width();
            for (v, h) in raw.iter_mut().zip(&half) {
                let z: f64 = StandardNormal.sample(rng);
                *v += sigma * h * z;
            }
            raw = out_box.clamp(&raw);
        }
    }
    match agent.formulation {
        Formulation::StateTransition => {
            let target = project_next_state(env, s, &raw, projection_candidates)?;
            let action = env.inverse_action(s, &target);
            Ok(Decision {
                target: Some(target),
                action,
            })
        }
        Formulation::StateAction => Ok(Decision {
            target: None,
            action: Some(ActionVec::new(raw)),
        }),
    }
}

/// Completes a decision, asking the transition model when the environment
/// could not supply the action.
pub fn resolve_action(decision: &Decision, s: &EnvState, model: Option<&TransitionModel>) -> Result<ActionVec> {
    if let Some(a) = &decision.action {
        return Ok(a.clone());
    }
    let target = decision
        .target
        .as_ref()
        .ok_or_else(|| Error::NotReady("decision carries neither an action nor a target".into()))?;
    let model = model.ok_or_else(|| Error::NotReady("transition needs an inverse model, none is trained".into()))?;
    Ok(model.predict(s, target))
}
