//! Tour of the three simulators: spec, a random rollout, and the one-step
//! feasible set the next-state actor is projected onto.
//!
//! ```bash
//! cargo run --example environments
//! ```

use sasrl::env::{make_env, EnvKind};
use sasrl::mmrp::{rollout, sim_rng, ActionVec};

fn main() -> sasrl::Result<()> {
    for kind in EnvKind::ALL {
        let mut env = make_env(kind);
        let spec = env.spec().clone();
        println!("== {kind}");
        println!("  state box  {:?} .. {:?}", spec.state_box.low, spec.state_box.high);
        println!("  action box {:?} .. {:?}", spec.action_box.low, spec.action_box.high);
        println!("  gamma {}  horizon {}  geometry {:?}", spec.gamma, spec.max_episode_steps, spec.action_geometry);

        let mut rng = sim_rng(7);
        let ep = rollout(
            &mut *env,
            |e, _| ActionVec::new(e.spec().action_box.sample_uniform(&mut rng)),
            spec.max_episode_steps,
            3,
        )?;
        println!(
            "  random episode: {} steps, return {:.2}, discounted {:.2}",
            ep.samples.len(),
            ep.episode_return,
            ep.discounted_return
        );

        let s = env.reset(&mut sim_rng(1));
        let candidates = env.feasible_candidates(&s, 8);
        println!("  from {:?}, {} feasible successors, e.g.", s.as_slice(), candidates.len());
        for c in candidates.iter().take(3) {
            let a = env.inverse_action(&s, c);
            println!("    {:?} via {:?}", c.as_slice(), a.as_deref());
        }
        println!("  inverse available: {}", env.has_inverse_action());
    }
    Ok(())
}
