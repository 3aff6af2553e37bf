//! Inverse transition model on the grid world: learn (s, s') -> a from random
//! play and compare against the analytic inverse.
//!
//! ```bash
//! cargo run --release --example transition_model
//! ```

use sasrl::env::{make_env, EnvKind};
use sasrl::mmrp::{sim_rng, TransitionSample};
use sasrl::probe::uniform_random_log;
use sasrl::transition::{LossKind, TransitionModel};

fn main() -> sasrl::Result<()> {
    let env = make_env(EnvKind::GridWorld);
    let spec = env.spec().clone();
    let data = uniform_random_log(&*env, 50_000, 0)?;
    let (train, test) = data.split_at(40_000);

    let mut rng = sim_rng(1);
    let mut model = TransitionModel::new(spec.state_box, spec.action_box, LossKind::MseContinuous, &[64, 64], 1e-3, &mut rng)?;
    let refs: Vec<&TransitionSample> = train.iter().collect();
    for round in 1..=5 {
        model.fit(&refs, 4, 128, &mut rng)?;
        let held: Vec<&TransitionSample> = test.iter().collect();
        println!("after {:>2} epochs: held-out loss {:.3e}", round * 4, model.evaluate(&held)?);
    }

    for t in test.iter().take(5) {
        let predicted = model.predict(&t.s, &t.s_next);
        let exact = env.inverse_action(&t.s, &t.s_next).expect("logged moves are reachable");
        println!(
            "{:?} -> {:?}: model {:?}, exact {:?}",
            t.s.as_slice(),
            t.s_next.as_slice(),
            predicted.as_slice(),
            exact.as_slice()
        );
    }
    Ok(())
}
