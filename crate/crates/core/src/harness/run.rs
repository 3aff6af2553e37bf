use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use rand::seq::SliceRandom;

use super::{RunConfig, AGGREGATE_FILE, FAILURES_FILE, KPROBE_FILE, KPROBE_HISTOGRAM_FILE, MANIFEST_FILE};
use crate::agent::train;
use crate::curve::LearningCurve;
use crate::error::{Error, Result};
use crate::mmrp::{derive_seed, read_trajectory_log, sim_rng, write_trajectory_log, Environment, TrajectoryHeader, TransitionSample};
use crate::nn::save_snapshot;
use crate::probe::{Discretizer, KEstimate, OccupancyStats};
use crate::transition::{LossKind, TransitionModel};

/// Per-seed result of a finished sub-run.
#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub curve: LearningCurve,
    pub gradient_steps: usize,
    pub stopped_early: bool,
    /// Occupancy counts of the behaviour-policy prefill.
    pub occupancy: OccupancyStats,
}

#[derive(Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub runs: Vec<SeedRun>,
    pub failures: Vec<(u64, Error)>,
    pub aggregate: LearningCurve,
    pub k: Result<KEstimate>,
}

pub fn seed_stem(seed: u64) -> String {
    format!("seed_{seed}")
}

fn seed_path(dir: &Path, seed: u64, ext: &str) -> PathBuf {
    dir.join(format!("{}.{ext}", seed_stem(seed)))
}

fn write_manifest(config: &RunConfig, dir: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(dir.join(MANIFEST_FILE))?);
    writeln!(out, "# sasrl {}", env!("CARGO_PKG_VERSION"))?;
    out.write_all(config.to_text().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run_seed(env: &dyn Environment, config: &RunConfig, disc: &Discretizer, seed: u64, dir: &Path) -> Result<SeedRun> {
    let out = train(env, config.algo, &config.agent, seed)?;
    out.curve.save(&seed_path(dir, seed, "csv"))?;
    save_snapshot(&out.agent.actor.net, &seed_path(dir, seed, "actor"))?;
    save_snapshot(&out.agent.critic.net, &seed_path(dir, seed, "critic"))?;
    if let Some(m) = &out.transition_model {
        save_snapshot(&m.net, &seed_path(dir, seed, "tmodel"))?;
    }
    let spec = env.spec();
    let header = TrajectoryHeader {
        env: spec.name.clone(),
        state_box: spec.state_box.clone(),
        action_box: spec.action_box.clone(),
    };
    let traj = BufWriter::new(File::create(seed_path(dir, seed, "traj"))?);
    write_trajectory_log(traj, &header, &out.prefill)?;
    let mut occupancy = OccupancyStats::new();
    occupancy.accumulate(&out.prefill, disc);
    Ok(SeedRun {
        seed,
        curve: out.curve,
        gradient_steps: out.gradient_steps,
        stopped_early: out.stopped_early,
        occupancy,
    })
}

/// Trains every seed into `dir` and writes the per-seed curves, the
/// aggregate, checkpoints, prefill trajectories, the occupancy probe and a
/// manifest. A failed seed is recorded and left out of the aggregate.
pub fn run_experiment(config: &RunConfig, dir: &Path) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(dir)?;
    write_manifest(config, dir)?;
    let env = config.env_params.build(config.env)?;
    let disc = Discretizer::uniform(
        &env.spec().state_box,
        &env.spec().action_box,
        config.probe_state_bins,
        config.probe_action_bins,
    )?;
    let workers = match config.workers {
        0 => thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(config.seeds.len());

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<SeedRun>>>> = Mutex::new((0..config.seeds.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..workers {
            let env = env.boxed_clone();
            let (next, slots, disc) = (&next, &slots, &disc);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&seed) = config.seeds.get(i) else { break };
                log::info!("seed {seed}: training {} on {}", config.algo, config.env);
                let result = run_seed(env.as_ref(), config, disc, seed, dir);
                slots.lock().expect("result slots")[i] = Some(result);
            });
        }
    });

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, slot) in config.seeds.iter().zip(slots.into_inner().expect("result slots")) {
        match slot.expect("every seed is claimed") {
            Ok(r) => runs.push(r),
            Err(e) => {
                log::warn!("seed {seed} failed: {e}");
                failures.push((*seed, e));
            }
        }
    }
    if !failures.is_empty() {
        let mut out = BufWriter::new(File::create(dir.join(FAILURES_FILE))?);
        for (seed, e) in &failures {
            writeln!(out, "{seed} {e}")?;
        }
        out.flush()?;
        log::warn!("aggregating over {} of {} seeds", runs.len(), config.seeds.len());
    }

    let curves: Vec<LearningCurve> = runs.iter().map(|r| r.curve.clone()).collect();
    let aggregate = LearningCurve::aggregate(&curves)?;
    aggregate.save(&dir.join(AGGREGATE_FILE))?;

    let mut occupancy = OccupancyStats::new();
    for r in &runs {
        occupancy.merge(&r.occupancy);
    }
    let k = occupancy.estimate_k(config.probe_support);
    let report = match &k {
        Ok(e) => e.report_line(),
        Err(e) => format!("# {e}"),
    };
    fs::write(dir.join(KPROBE_FILE), format!("{report}\n"))?;
    occupancy.write_histogram(BufWriter::new(File::create(dir.join(KPROBE_HISTOGRAM_FILE))?))?;

    Ok(RunSummary {
        dir: dir.to_path_buf(),
        runs,
        failures,
        aggregate,
        k,
    })
}

/// Offline inverse-model fit on one seed's prefill trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSummary {
    pub seed: u64,
    pub train_samples: usize,
    pub holdout_samples: usize,
    pub train_loss: f64,
    pub holdout_loss: f64,
}

/// Fits a transition model to each seed's logged prefill in a run
/// directory, holding out a fifth of the pairs, and saves it as
/// `seed_{s}.tmodel`.
pub fn fit_transition(dir: &Path) -> Result<Vec<FitSummary>> {
    let config = RunConfig::load(&dir.join(MANIFEST_FILE))?;
    config.validate()?;
    let a = &config.agent;
    let mut out = Vec::new();
    for &seed in &config.seeds {
        let path = seed_path(dir, seed, "traj");
        if !path.exists() {
            log::warn!("{} missing, skipping seed {seed}", path.display());
            continue;
        }
        let (header, mut samples) = read_trajectory_log(BufReader::new(File::open(&path)?))?;
        let mut rng = sim_rng(derive_seed(seed, 0x7f17));
        samples.shuffle(&mut rng);
        let holdout = samples.len() / 5;
        let (test, train_set) = samples.split_at(holdout);
        if train_set.is_empty() {
            return Err(Error::NotEnoughData(format!("{} holds too few transitions", path.display())));
        }
        let mut model = TransitionModel::new(
            header.state_box,
            header.action_box,
            LossKind::MseContinuous,
            &a.hidden,
            a.transition_lr,
            &mut rng,
        )?;
        let refs: Vec<&TransitionSample> = train_set.iter().collect();
        let train_loss = model.fit(&refs, a.transition_epochs, a.transition_batch, &mut rng)?;
        let test_refs: Vec<&TransitionSample> = test.iter().collect();
        let holdout_loss = if test_refs.is_empty() { f64::NAN } else { model.evaluate(&test_refs)? };
        save_snapshot(&model.net, &seed_path(dir, seed, "tmodel"))?;
        out.push(FitSummary {
            seed,
            train_samples: train_set.len(),
            holdout_samples: test.len(),
            train_loss,
            holdout_loss,
        });
    }
    if out.is_empty() {
        return Err(Error::NotEnoughData(format!("no trajectory logs in {}", dir.display())));
    }
    Ok(out)
}
