use ndarray::Array2;
use rand::Rng;

use super::networks::{Actor, Critic};
use super::update::{actor_step, critic_step, soft_update, stack_rows};
use super::{AgentConfig, Formulation, UpdatePath};
use crate::error::{Error, Result};
use crate::mmrp::{EnvSpec, TransitionSample};
use crate::nn::Adam;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLosses {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

/// Online and delayed actor/critic pairs with their optimizers.
#[derive(Clone, Debug)]
pub struct ActorCritic {
    pub formulation: Formulation,
    pub actor: Actor,
    pub actor_target: Actor,
    pub critic: Critic,
    pub critic_target: Critic,
    actor_opt: Adam,
    critic_opt: Adam,
    path: UpdatePath,
    gamma: f64,
    soft_eps: f64,
}

impl ActorCritic {
    pub fn new<R: Rng + ?Sized>(spec: &EnvSpec, formulation: Formulation, config: &AgentConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let path = formulation.update_path();
        let left = path.critic_left.bounds(spec).clone();
        let right = path.critic_right.bounds(spec).clone();
        let out = path.actor_output.bounds(spec).clone();
        let critic = Critic::new(left, right, &config.hidden, rng)?;
        let actor = Actor::new(spec.state_box.clone(), out, &config.hidden, rng)?;
        Ok(Self::from_parts(actor, critic, formulation, config.gamma.unwrap_or(spec.gamma), config))
    }

    pub fn from_parts(actor: Actor, critic: Critic, formulation: Formulation, gamma: f64, config: &AgentConfig) -> Self {
        ActorCritic {
            formulation,
            actor_opt: Adam::new(&actor.net, config.actor_lr),
            critic_opt: Adam::new(&critic.net, config.critic_lr),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            path: formulation.update_path(),
            gamma,
            soft_eps: config.soft_eps,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn update_path(&self) -> &UpdatePath {
        &self.path
    }

    /// Critic step, actor step, then soft update of both delayed copies.
    pub fn train_step(&mut self, batch: &[&TransitionSample]) -> Result<StepLosses> {
        if batch.is_empty() {
            return Err(Error::NotReady("empty minibatch".into()));
        }
        let critic_loss = critic_step(
            &mut self.critic,
            &mut self.critic_opt,
            batch,
            &self.path,
            &self.actor_target,
            &self.critic_target,
            self.gamma,
        )?;
        let states: Array2<f64> = stack_rows(batch, |t| &t.s);
        let actor_objective = actor_step(&mut self.actor, &mut self.actor_opt, &self.critic, states.view())?;
        soft_update(&self.critic.net, &mut self.critic_target.net, self.soft_eps);
        soft_update(&self.actor.net, &mut self.actor_target.net, self.soft_eps);
        Ok(StepLosses {
            critic_loss,
            actor_objective,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_env, EnvKind};
    use crate::mmrp::sim_rng;

    #[test]
    fn shapes_follow_the_formulation() {
        let env = make_env(EnvKind::Berzerk);
        let spec = env.spec();
        let cfg = AgentConfig::default();
        let sas = ActorCritic::new(spec, Formulation::StateTransition, &cfg, &mut sim_rng(0)).unwrap();
        assert_eq!(sas.critic.net.dims(), &[20, 64, 64, 1]);
        assert_eq!(sas.actor.net.dims(), &[10, 64, 64, 10]);
        let dd = ActorCritic::new(spec, Formulation::StateAction, &cfg, &mut sim_rng(0)).unwrap();
        assert_eq!(dd.critic.net.dims(), &[12, 64, 64, 1]);
        assert_eq!(dd.actor.net.dims(), &[10, 64, 64, 2]);
        assert_eq!(sas.actor_target, sas.actor);
        assert_eq!(sas.gamma(), 0.99);
    }
}
