//! The four update operations: bootstrap targets, critic descent, actor
//! ascent through the critic's right-hand gradient, and soft target tracking.
//!
//! Nothing here touches an environment; updates read only samples and nets.

use ndarray::{Array1, Array2, ArrayView2};

use super::networks::{Actor, Critic, CriticSurface, TargetPolicy};
use super::UpdatePath;
use crate::error::{Error, Result};
use crate::mmrp::TransitionSample;
use crate::nn::{mse_loss, Adam, Direction, GradientTape, Mlp};

/// Stacks one slice per sample into a matrix.
pub fn stack_rows<'a, F>(batch: &[&'a TransitionSample], pick: F) -> Array2<f64>
where
    F: Fn(&'a TransitionSample) -> &'a [f64],
{
    let width = batch.first().map(|s| pick(s).len()).unwrap_or(0);
    let mut out = Array2::zeros((batch.len(), width));
    for (i, sample) in batch.iter().enumerate() {
        let v = pick(sample);
        assert_eq!(v.len(), width, "ragged batch");
        out.row_mut(i).assign(&ndarray::ArrayView1::from(v));
    }
    out
}

/// `r` when `done`, else `r + γ·critic_target(s', policy_target(s'))`.
pub fn td_target(
    r: f64,
    s_next: &[f64],
    done: bool,
    policy_target: &dyn TargetPolicy,
    critic_target: &dyn CriticSurface,
    gamma: f64,
) -> Result<f64> {
    if done || gamma == 0.0 {
        return Ok(r);
    }
    let sn = ArrayView2::from_shape((1, s_next.len()), s_next).expect("row");
    let x = policy_target.propose(sn);
    let v = critic_target.values(sn, x.view())[0];
    if !v.is_finite() {
        return Err(Error::Divergence(format!("target critic produced {v}")));
    }
    Ok(r + gamma * v)
}

pub fn td_targets(
    batch: &[&TransitionSample],
    policy_target: &dyn TargetPolicy,
    critic_target: &dyn CriticSurface,
    gamma: f64,
) -> Result<Array1<f64>> {
    let sn = stack_rows(batch, |t| &t.s_next);
    let x = policy_target.propose(sn.view());
    let v = critic_target.values(sn.view(), x.view());
    let mut y = Array1::zeros(batch.len());
    for (i, t) in batch.iter().enumerate() {
        y[i] = if t.done || gamma == 0.0 { t.r } else { t.r + gamma * v[i] };
        if !y[i].is_finite() {
            return Err(Error::Divergence(format!("non-finite TD target {} (bootstrap {})", y[i], v[i])));
        }
    }
    Ok(y)
}

/// Mean squared TD error against fixed `targets` and its parameter gradient.
pub fn critic_loss_and_tape(
    critic: &Critic,
    batch: &[&TransitionSample],
    targets: &Array1<f64>,
    path: &UpdatePath,
) -> Result<(f64, GradientTape)> {
    if batch.is_empty() {
        return Err(Error::NotReady("critic step on an empty batch".into()));
    }
    let s = stack_rows(batch, |t| &t.s);
    let x = stack_rows(batch, |t| path.critic_right.pick(t));
    let trace = critic.net.forward_trace(critic.inputs(s.view(), x.view()).view());
    let pred = trace.output().column(0).to_vec();
    let (loss, grad) = mse_loss(&pred, targets.as_slice().expect("contiguous targets"))?;
    if !loss.is_finite() {
        return Err(Error::Divergence(format!("critic loss is {loss}")));
    }
    let g = Array2::from_shape_vec((batch.len(), 1), grad).expect("column");
    Ok((loss, critic.net.backward_batch(&trace, g.view())))
}

/// One descent step on the mean squared TD(0) error. Returns the pre-step loss.
#[allow(clippy::too_many_arguments)]
pub fn critic_step(
    critic: &mut Critic,
    optimizer: &mut Adam,
    batch: &[&TransitionSample],
    path: &UpdatePath,
    policy_target: &dyn TargetPolicy,
    critic_target: &dyn CriticSurface,
    gamma: f64,
) -> Result<f64> {
    let targets = td_targets(batch, policy_target, critic_target, gamma)?;
    let (loss, tape) = critic_loss_and_tape(critic, batch, &targets, path)?;
    optimizer.apply(&mut critic.net, &tape, Direction::Minimize)?;
    Ok(loss)
}

/// Objective `J = mean_b critic(s_b, actor(s_b))` and its gradient with
/// respect to the actor parameters, chained through the critic's right-hand
/// input gradient.
pub fn actor_gradient(actor: &Actor, critic: &dyn CriticSurface, states: ArrayView2<'_, f64>) -> (f64, GradientTape) {
    let n = states.nrows();
    assert!(n > 0, "actor step on an empty batch");
    let (trace, x) = actor.trace(states);
    let objective = critic.values(states, x.view()).mean().expect("non-empty");
    let mut g = critic.right_gradients(states, x.view());
    let half = actor.output_box().half_width();
    for mut row in g.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= half[j] / n as f64;
        }
    }
    (objective, actor.net.backward_batch(&trace, g.view()))
}

/// One ascent step on `J`; the critic is read only. Returns the pre-step `J`.
pub fn actor_step(
    actor: &mut Actor,
    optimizer: &mut Adam,
    critic: &dyn CriticSurface,
    states: ArrayView2<'_, f64>,
) -> Result<f64> {
    let (objective, tape) = actor_gradient(actor, critic, states);
    optimizer.apply(&mut actor.net, &tape, Direction::Maximize)?;
    Ok(objective)
}

/// `target ← eps·online + (1 − eps)·target`, per parameter.
pub fn soft_update(online: &Mlp, target: &mut Mlp, eps: f64) {
    target.soft_update_from(online, eps);
}
