//! Multi-seed runs written to disk, then compared by plateau return. The same
//! flow as `sasrl train` followed by `sasrl compare`.
//!
//! ```bash
//! cargo run --release --example compare_runs
//! ```

use sasrl::agent::Formulation;
use sasrl::env::EnvKind;
use sasrl::harness::{compare_report, run_experiment, RunConfig};

fn main() -> sasrl::Result<()> {
    let root = tempfile::tempdir()?;
    let mut dirs = Vec::new();
    for algo in [Formulation::StateTransition, Formulation::StateAction] {
        let mut cfg = RunConfig {
            algo,
            env: EnvKind::Slot,
            seeds: vec![0, 1, 2],
            ..RunConfig::default()
        };
        cfg.set("max_gradient_steps", "2000")?;
        let dir = root.path().join(algo.to_string());
        let summary = run_experiment(&cfg, &dir)?;
        println!("{algo}: {} seeds, k probe {:?}", summary.runs.len(), summary.k.as_ref().map(|k| k.k));
        dirs.push(dir);
    }
    print!("{}", compare_report(&dirs)?.table());
    Ok(())
}
