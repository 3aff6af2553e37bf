use std::cell::RefCell;

use rand::Rng;

use super::projection::{act, resolve_action};
use super::{ActorCritic, AgentConfig, Formulation};
use crate::behavior::{BehaviorPolicy, Collection};
use crate::curve::{CurveRow, LearningCurve};
use crate::error::{Error, Result};
use crate::mmrp::{derive_seed, rollout, sim_rng, ActionVec, EnvState, Environment, ReplayBuffer, TransitionSample};
use crate::transition::{LossKind, TransitionModel};

const INIT_STREAM: u64 = 1;
const REPLAY_STREAM: u64 = 2;
const BEHAVIOR_STREAM: u64 = 3;
const EPISODE_STREAM: u64 = 4;
const NOISE_STREAM: u64 = 5;
const TRANSITION_STREAM: u64 = 6;
const EVAL_STREAM: u64 = 1 << 20;

/// Everything a finished run produced.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub curve: LearningCurve,
    pub agent: ActorCritic,
    pub transition_model: Option<TransitionModel>,
    /// Behaviour-policy samples used to fill the buffer.
    pub prefill: Vec<TransitionSample>,
    pub gradient_steps: usize,
    pub stopped_early: bool,
}

/// Rollout seed of evaluation episode `i` for run seed `seed`; shared by
/// every algorithm so that evaluations see the same start states.
pub fn eval_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, EVAL_STREAM + i as u64)
}

/// Undiscounted returns of `episodes` roll-outs on the evaluation seeds.
pub fn evaluate_returns<P>(env: &dyn Environment, mut policy: P, episodes: usize, seed: u64) -> Result<Vec<f64>>
where
    P: FnMut(&dyn Environment, &EnvState) -> Result<ActionVec>,
{
    let max_steps = env.spec().max_episode_steps;
    let mut out = Vec::with_capacity(episodes);
    for i in 0..episodes {
        let mut sim = env.boxed_clone();
        let failure = RefCell::new(None);
        let ep = rollout(
            sim.as_mut(),
            |e: &dyn Environment, s: &EnvState| match policy(e, s) {
                Ok(a) => a,
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    ActionVec::new(e.spec().action_box.center())
                }
            },
            max_steps,
            eval_seed(seed, i),
        )?;
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        out.push(ep.episode_return);
    }
    Ok(out)
}

/// Returns of the uniform-random continuous policy on the evaluation seeds.
pub fn random_policy_returns(env: &dyn Environment, episodes: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = sim_rng(derive_seed(seed, BEHAVIOR_STREAM));
    let action_box = env.spec().action_box.clone();
    evaluate_returns(env, |_, _| Ok(ActionVec::new(action_box.sample_uniform(&mut rng))), episodes, seed)
}

fn greedy_returns(
    env: &dyn Environment,
    agent: &ActorCritic,
    model: Option<&TransitionModel>,
    config: &AgentConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = config.projection_candidates;
    evaluate_returns(
        env,
        |e, s| {
            let d = act(agent, e, s, n, 0.0, None)?;
            resolve_action(&d, s, model)
        },
        config.eval_episodes,
        seed,
    )
}

/// Trains one learner on `env`. The environment instance is only used as a
/// template; every episode runs on a fresh clone.
pub fn train(env: &dyn Environment, formulation: Formulation, config: &AgentConfig, seed: u64) -> Result<TrainOutcome> {
    config.validate()?;
    let spec = env.spec().clone();
    let mut init_rng = sim_rng(derive_seed(seed, INIT_STREAM));
    let mut agent = ActorCritic::new(&spec, formulation, config, &mut init_rng)?;
    let mut buffer = ReplayBuffer::new(config.replay_capacity, derive_seed(seed, REPLAY_STREAM));
    let behavior = BehaviorPolicy::new(config.granularity, &spec);
    let mut behavior_rng = sim_rng(derive_seed(seed, BEHAVIOR_STREAM));
    let mut episode_rng = sim_rng(derive_seed(seed, EPISODE_STREAM));
    let mut noise_rng = sim_rng(derive_seed(seed, NOISE_STREAM));

    let mut prefill = Vec::with_capacity(config.prefill);
    while prefill.len() < config.prefill {
        let mut sim = env.boxed_clone();
        let ep = rollout(
            sim.as_mut(),
            |_: &dyn Environment, _: &EnvState| behavior.sample(&mut behavior_rng),
            spec.max_episode_steps,
            episode_rng.random(),
        )?;
        let room = config.prefill - prefill.len();
        prefill.extend(ep.samples.into_iter().take(room));
    }
    for t in &prefill {
        buffer.push(t.clone())?;
    }

    let needs_model = formulation == Formulation::StateTransition && (!env.has_inverse_action() || config.train_transition_model);
    let model = if needs_model {
        let mut rng = sim_rng(derive_seed(seed, TRANSITION_STREAM));
        let mut m = TransitionModel::new(
            spec.state_box.clone(),
            spec.action_box.clone(),
            LossKind::MseContinuous,
            &config.hidden,
            config.transition_lr,
            &mut rng,
        )?;
        let refs: Vec<&TransitionSample> = prefill.iter().collect();
        let loss = m
            .fit(&refs, config.transition_epochs, config.transition_batch, &mut rng)
            .map_err(|e| Error::Divergence(format!("transition model fit: {e}")))?;
        log::info!("transition model fitted on {} samples, loss {loss:.6}", refs.len());
        Some(m)
    } else {
        None
    };

    let mut curve = LearningCurve::new();
    let mut best = f64::NEG_INFINITY;
    let mut since_best = 0usize;
    let mut steps_done = 0usize;
    let mut stopped_early = false;
    for step in 1..=config.max_gradient_steps {
        let batch = buffer.sample(config.batch_size)?;
        let losses = agent
            .train_step(&batch)
            .map_err(|e| Error::Divergence(format!("gradient step {step}: {e}")))?;
        steps_done = step;
        if step % config.eval_interval != 0 {
            continue;
        }

        let returns = greedy_returns(env, &agent, model.as_ref(), config, seed)?;
        let row = CurveRow::from_returns(step, &returns)?;
        log::info!(
            "{} step {step}: return {:.3} [{:.3}, {:.3}], critic loss {:.5}",
            formulation,
            row.mean_return,
            row.min_return,
            row.max_return,
            losses.critic_loss
        );
        curve.push(row)?;
        if row.mean_return > best {
            best = row.mean_return;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if config.patience > 0 && since_best >= config.patience {
            stopped_early = true;
            log::info!("no improvement for {since_best} evaluations, stopping at step {step}");
            break;
        }

        for _ in 0..config.collect_episodes {
            let mut sim = env.boxed_clone();
            let failure = RefCell::new(None);
            let ep = rollout(
                sim.as_mut(),
                |e: &dyn Environment, s: &EnvState| {
                    let a = match config.collection {
                        Collection::UniformRandom => Ok(behavior.sample(&mut behavior_rng)),
                        Collection::NoisyActor => act(
                            &agent,
                            e,
                            s,
                            config.projection_candidates,
                            config.exploration_sigma,
                            Some(&mut noise_rng),
                        )
                        .and_then(|d| resolve_action(&d, s, model.as_ref()))
                        .map(|a| behavior.quantize(&a)),
                    };
                    a.unwrap_or_else(|err| {
                        failure.borrow_mut().get_or_insert(err);
                        ActionVec::new(e.spec().action_box.center())
                    })
                },
                spec.max_episode_steps,
                episode_rng.random(),
            )?;
            if let Some(err) = failure.into_inner() {
                return Err(err);
            }
            for t in ep.samples {
                buffer.push(t)?;
            }
        }
    }

    Ok(TrainOutcome {
        curve,
        agent,
        transition_model: model,
        prefill,
        gradient_steps: steps_done,
        stopped_early,
    })
}
