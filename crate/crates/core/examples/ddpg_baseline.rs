//! State-action baseline and the transition-value agent on the slot machine,
//! trained with identical settings on the same seeds.
//!
//! ```bash
//! cargo run --release --example ddpg_baseline
//! ```

use sasrl::agent::{train, AgentConfig, Formulation};
use sasrl::ddpg::ddpg_train;
use sasrl::env::{make_env, EnvKind};

fn main() -> sasrl::Result<()> {
    let env = make_env(EnvKind::Slot);
    let config = AgentConfig {
        max_gradient_steps: 4_000,
        ..AgentConfig::default()
    };
    println!("{:>4}  {:>14}  {:>14}", "seed", "ddpg plateau", "sasrl plateau");
    for seed in 0..3 {
        let ddpg = ddpg_train(&*env, &config, seed)?;
        let sas = train(&*env, Formulation::StateTransition, &config, seed)?;
        let fmt = |p: Option<f64>| p.map_or("-".to_string(), |v| format!("{v:.2}"));
        println!("{seed:>4}  {:>14}  {:>14}", fmt(ddpg.curve.plateau()), fmt(sas.curve.plateau()));
    }
    Ok(())
}
