//! Occupancy-ratio probe on uniform-random logs of every environment.
//!
//! `k = R2 / R1` compares how concentrated the (s, s') occupancy is against
//! the (s, a) occupancy; `k > 1` predicts the transition formulation trains
//! faster.
//!
//! ```bash
//! cargo run --release --example probe_k
//! ```

use sasrl::env::{make_env, EnvKind};
use sasrl::probe::{uniform_random_log, Discretizer, OccupancyStats, DEFAULT_SUPPORT_THRESHOLD};

fn main() -> sasrl::Result<()> {
    println!("{:<10} {:>8} {:>10} {:>10} {:>8}  regime", "env", "W", "R1", "R2", "k");
    for kind in EnvKind::ALL {
        let env = make_env(kind);
        let disc = Discretizer::for_spec(env.spec())?;
        let mut stats = OccupancyStats::new();
        for seed in 0..4 {
            stats.accumulate(&uniform_random_log(&*env, 25_000, seed)?, &disc);
        }
        let k = stats.estimate_k(DEFAULT_SUPPORT_THRESHOLD)?;
        println!(
            "{:<10} {:>8} {:>10.3e} {:>10.3e} {:>8.3}  {}",
            kind.name(),
            k.w,
            k.r1,
            k.r2,
            k.k,
            k.regime().name()
        );
    }
    Ok(())
}
