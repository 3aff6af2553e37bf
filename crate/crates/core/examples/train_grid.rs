//! Short transition-value run on the grid world, then a greedy episode that
//! shows each proposed next state and the action that realises it.
//!
//! ```bash
//! cargo run --release --example train_grid
//! ```

use sasrl::agent::{act, resolve_action, train, AgentConfig, Formulation};
use sasrl::env::{make_env, EnvKind};
use sasrl::mmrp::sim_rng;

fn main() -> sasrl::Result<()> {
    let mut env = make_env(EnvKind::GridWorld);
    let config = AgentConfig {
        max_gradient_steps: 3_000,
        ..AgentConfig::default()
    };
    let out = train(&*env, Formulation::StateTransition, &config, 0)?;
    for row in out.curve.rows() {
        println!("step {:>6}  mean return {:>7.2}", row.gradient_step, row.mean_return);
    }

    let mut s = env.reset(&mut sim_rng(5));
    for t in 0..env.spec().max_episode_steps {
        let d = act(&out.agent, &*env, &s, config.projection_candidates, 0.0, None)?;
        let a = resolve_action(&d, &s, out.transition_model.as_ref())?;
        let step = env.step(&a);
        println!(
            "t={t:>2} s={:?} target={:?} a={:?} r={:.2}",
            s.as_slice(),
            d.target.as_deref(),
            a.as_slice(),
            step.reward
        );
        s = step.s_next;
        if step.done {
            break;
        }
    }
    Ok(())
}
