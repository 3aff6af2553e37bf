//! Acceptance criteria, one line each.
//!
//! Runs as a plain binary so every verdict is printed. Set
//! `ACCEPTANCE_ONLY=1,4` to run a subset. The process fails if a criterion
//! outside `EXPECTED_FAILURES` fails; expected failures still print FAIL.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use sasrl::agent::update::{actor_gradient, critic_loss_and_tape, critic_step, soft_update};
use sasrl::agent::{random_policy_returns, Actor, Critic, CriticSurface, Formulation, TargetPolicy};
use sasrl::behavior::Granularity;
use sasrl::env::{make_env, EnvKind, SlotMachine, SlotParams};
use sasrl::harness::{compare_report, run_experiment, RunConfig, RunSummary};
use sasrl::mmrp::{sim_rng, ActionVec, BoxBounds, EnvState, Environment, ReplayBuffer, SimRng, TransitionSample};
use sasrl::nn::{Adam, Mlp};
use sasrl::probe::{uniform_random_log, Discretizer, OccupancyStats, DEFAULT_SUPPORT_THRESHOLD};
use sasrl::transition::{LossKind, TransitionModel};

/// Criteria whose failure at the shipped defaults has been analysed.
const EXPECTED_FAILURES: &[u32] = &[5, 6, 9];

// Pinned tolerances.
const PARAM_REL_TOL: f64 = 1e-4;
const CHAINED_REL_TOL: f64 = 1e-3;
const MIN_PROBES: usize = 100;
const FIXED_POINT_TOL: f64 = 1e-2;
const FIXED_POINT_ITER_TOL: f64 = 1e-10;
const FIXED_POINT_MAX_STEPS: usize = 50_000;
const ACTOR_OPTIMUM_TOL: f64 = 1e-2;
const K_FIVE_TOL: f64 = 0.25;
const K_ONE_TOL: f64 = 0.05;
const PROGRESS_MARGIN: f64 = 5.0;
const PROGRESS_MIN_SEEDS: usize = 8;
const REPLAY_MIN_FRACTION: f64 = 0.9;
const GRID_ACTION_ERR_FRACTION_OF_D: f64 = 0.01;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

fn grid_batch(n: usize, seed: u64) -> Vec<TransitionSample> {
    uniform_random_log(&*make_env(EnvKind::GridWorld), n, seed).unwrap()
}

/// Central-difference check of a scalar function's parameter gradient at
/// random coordinates. Returns (probes, worst relative error).
fn check_parameter_gradient<F>(net: &Mlp, analytic: &[f64], mut loss: F, probes: usize, rng: &mut SimRng) -> (usize, f64)
where
    F: FnMut(&Mlp) -> f64,
{
    let base = net.parameters();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut tries = 0;
    while done < probes && tries < 50 * probes {
        tries += 1;
        let i = rng.random_range(0..base.len());
        let h = 1e-6 * base[i].abs().max(1.0);
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_parameters(&p);
        let up = loss(&probe);
        p[i] = base[i] - h;
        probe.set_parameters(&p);
        let down = loss(&probe);
        let fd = (up - down) / (2.0 * h);
        // parameters of dead units carry no signal
        if fd.abs().max(analytic[i].abs()) < 1e-9 {
            continue;
        }
        worst = worst.max(rel_err(analytic[i], fd));
        done += 1;
    }
    (done, worst)
}

fn criterion_1() -> Verdict {
    let mut rng = sim_rng(101);
    let env = make_env(EnvKind::GridWorld);
    let spec = env.spec().clone();
    let data = grid_batch(32, 5);
    let batch: Vec<&TransitionSample> = data.iter().collect();
    let mut lines = Vec::new();
    let mut ok = true;

    for f in [Formulation::StateTransition, Formulation::StateAction] {
        let path = f.update_path();
        let right = path.critic_right.bounds(&spec).clone();
        let critic = Critic::new(spec.state_box.clone(), right.clone(), &[16, 16], &mut rng).unwrap();
        let targets = Array1::from_shape_fn(batch.len(), |_| rng.random_range(-2.0..2.0));

        // parameters
        let (_, tape) = critic_loss_and_tape(&critic, &batch, &targets, &path).unwrap();
        let analytic = tape.parameter_values();
        let (n, worst) = check_parameter_gradient(
            &critic.net,
            &analytic,
            |net| {
                let c = Critic::from_net(net.clone(), critic.left_box().clone(), critic.right_box().clone());
                critic_loss_and_tape(&c, &batch, &targets, &path).unwrap().0
            },
            MIN_PROBES,
            &mut rng,
        );
        ok &= n >= MIN_PROBES && worst < PARAM_REL_TOL;
        lines.push(format!("{f} critic params {n} probes max {worst:.1e}"));

        // right-hand input
        let s = Array2::from_shape_fn((1, 2), |_| rng.random_range(0.0..1.0));
        let mut worst = 0.0f64;
        let mut n = 0;
        while n < MIN_PROBES {
            let x = Array2::from_shape_fn((1, 2), |(_, j)| rng.random_range(right.low[j]..right.high[j]));
            let g = critic.right_gradients(s.view(), x.view());
            for j in 0..2 {
                let h = 1e-6;
                let mut up = x.clone();
                up[[0, j]] += h;
                let mut down = x.clone();
                down[[0, j]] -= h;
                let fd = (critic.values(s.view(), up.view())[0] - critic.values(s.view(), down.view())[0]) / (2.0 * h);
                if fd.abs().max(g[[0, j]].abs()) < 1e-9 {
                    continue;
                }
                worst = worst.max(rel_err(g[[0, j]], fd));
                n += 1;
            }
        }
        ok &= worst < PARAM_REL_TOL;
        lines.push(format!("{f} critic input {n} probes max {worst:.1e}"));

        // actor chain rule, directional
        let out = path.actor_output.bounds(&spec).clone();
        let states = Array2::from_shape_fn((16, 2), |_| rng.random_range(0.0..1.0));
        let mut worst = 0.0f64;
        let mut n = 0;
        for _ in 0..10 {
            let actor = Actor::new(spec.state_box.clone(), out.clone(), &[16, 16], &mut rng).unwrap();
            let (_, tape) = actor_gradient(&actor, &critic, states.view());
            let g = tape.parameter_values();
            let theta = actor.net.parameters();
            for _ in 0..10 {
                let u: Vec<f64> = {
                    let raw: Vec<f64> = (0..theta.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
                    raw.into_iter().map(|v| v / norm).collect()
                };
                let h = 1e-6;
                let objective = |sign: f64| {
                    let p: Vec<f64> = theta.iter().zip(&u).map(|(t, d)| t + sign * h * d).collect();
                    let mut probe = actor.clone();
                    probe.net.set_parameters(&p);
                    actor_gradient(&probe, &critic, states.view()).0
                };
                let fd = (objective(1.0) - objective(-1.0)) / (2.0 * h);
                let an: f64 = g.iter().zip(&u).map(|(a, b)| a * b).sum();
                worst = worst.max(rel_err(an, fd));
                n += 1;
            }
        }
        ok &= n >= MIN_PROBES && worst < CHAINED_REL_TOL;
        lines.push(format!("{f} actor chain {n} probes max {worst:.1e}"));
    }

    // transition model, both losses
    for kind in [LossKind::MseContinuous, LossKind::BceBinary] {
        let (samples, sb, ab) = match kind {
            LossKind::MseContinuous => (data.clone(), spec.state_box.clone(), spec.action_box.clone()),
            LossKind::BceBinary => {
                let unit = BoxBounds::uniform(2, 0.0, 1.0);
                let s: Vec<TransitionSample> = (0..32)
                    .map(|_| {
                        let s = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
                        let sn = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
                        let a = vec![f64::from(sn[0] > s[0]), f64::from(sn[1] > s[1])];
                        TransitionSample {
                            s: EnvState::new(s),
                            s_next: EnvState::new(sn),
                            a: ActionVec::new(a),
                            r: 0.0,
                            done: false,
                        }
                    })
                    .collect();
                (s, unit.clone(), unit)
            }
        };
        let model = TransitionModel::new(sb, ab, kind, &[16, 16], 1e-3, &mut rng).unwrap();
        let refs: Vec<&TransitionSample> = samples.iter().collect();
        let pairs = model.preprocess(&refs);
        let analytic = model.loss_and_tape(&pairs).unwrap().1.parameter_values();
        let (n, worst) = check_parameter_gradient(
            &model.net,
            &analytic,
            |net| {
                let mut m = model.clone();
                m.net = net.clone();
                m.loss_and_tape(&pairs).unwrap().0
            },
            MIN_PROBES,
            &mut rng,
        );
        ok &= n >= MIN_PROBES && worst < PARAM_REL_TOL;
        lines.push(format!("{kind:?} model params {n} probes max {worst:.1e}"));
    }
    verdict(ok, format!("tol {PARAM_REL_TOL:.0e}/{CHAINED_REL_TOL:.0e}; {}", lines.join("; ")))
}

/// Always moves one state to the right; state 4 is terminal.
struct RightWalk;

impl TargetPolicy for RightWalk {
    fn propose(&self, s: ArrayView2<'_, f64>) -> Array2<f64> {
        s.mapv(|v| (v + 1.0).min(4.0))
    }
}

fn chain_reward(s: usize, sn: usize) -> f64 {
    let base = 0.5 * s as f64 - 0.3 * sn as f64;
    if sn == 4 {
        base + 2.0
    } else {
        base
    }
}

fn criterion_2() -> Verdict {
    let gamma = 0.9;
    // every one-step move (left, stay, right) from the four live states
    let mut pairs = Vec::new();
    for s in 0..4usize {
        for sn in [s.saturating_sub(1), s, s + 1] {
            if !pairs.contains(&(s, sn)) {
                pairs.push((s, sn));
            }
        }
    }
    // fixed point by iteration on the table
    let mut table: BTreeMap<(usize, usize), f64> = pairs.iter().map(|&p| (p, 0.0)).collect();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta = 0.0f64;
        for &(s, sn) in &pairs {
            let boot = if sn == 4 { 0.0 } else { table[&(sn, sn + 1)] };
            let v = chain_reward(s, sn) + gamma * boot;
            delta = delta.max((v - table[&(s, sn)]).abs());
            table.insert((s, sn), v);
        }
        if delta < FIXED_POINT_ITER_TOL {
            break;
        }
    }

    let samples: Vec<TransitionSample> = pairs
        .iter()
        .map(|&(s, sn)| TransitionSample {
            s: EnvState::new(vec![s as f64]),
            s_next: EnvState::new(vec![sn as f64]),
            a: ActionVec::new(vec![sn as f64 - s as f64]),
            r: chain_reward(s, sn),
            done: sn == 4,
        })
        .collect();
    let batch: Vec<&TransitionSample> = samples.iter().collect();
    let line = BoxBounds::uniform(1, 0.0, 4.0);
    let mut critic = Critic::new(line.clone(), line, &[64, 64], &mut sim_rng(3)).unwrap();
    let mut target = critic.clone();
    let mut opt = Adam::new(&critic.net, 1e-3);
    let path = Formulation::StateTransition.update_path();
    let err = |c: &Critic| {
        pairs
            .iter()
            .map(|&(s, sn)| (c.value(&[s as f64], &[sn as f64]) - table[&(s, sn)]).abs())
            .fold(0.0f64, f64::max)
    };
    let mut steps = 0;
    while steps < FIXED_POINT_MAX_STEPS {
        critic_step(&mut critic, &mut opt, &batch, &path, &RightWalk, &target, gamma).unwrap();
        soft_update(&critic.net, &mut target.net, 0.005);
        steps += 1;
        if steps % 1000 == 0 && err(&critic) < FIXED_POINT_TOL / 10.0 {
            break;
        }
    }
    let worst = err(&critic);
    verdict(
        worst < FIXED_POINT_TOL,
        format!(
            "{} pairs, oracle converged in {iterations} sweeps, max |Φ - Φ*| = {worst:.2e} after {steps} steps (tol {FIXED_POINT_TOL:.0e})",
            pairs.len()
        ),
    )
}

struct Bowl {
    centre: Vec<f64>,
}

impl CriticSurface for Bowl {
    fn values(&self, _s: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>) -> Array1<f64> {
        x.rows()
            .into_iter()
            .map(|r| -r.iter().zip(&self.centre).map(|(v, c)| (v - c).powi(2)).sum::<f64>())
            .collect()
    }
    fn right_gradients(&self, _s: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>) -> Array2<f64> {
        Array2::from_shape_fn(x.raw_dim(), |(i, j)| -2.0 * (x[[i, j]] - self.centre[j]))
    }
}

fn criterion_3() -> Verdict {
    let unit = BoxBounds::uniform(2, 0.0, 1.0);
    let critic = Bowl { centre: vec![0.7, 0.2] };
    let mut actor = Actor::new(unit.clone(), unit, &[32, 32], &mut sim_rng(17)).unwrap();
    let mut opt = Adam::new(&actor.net, 1e-3);
    let mut rng = sim_rng(18);
    for _ in 0..4000 {
        let states = Array2::from_shape_fn((32, 2), |_| rng.random_range(0.0..1.0));
        let (_, tape) = actor_gradient(&actor, &critic, states.view());
        opt.apply(&mut actor.net, &tape, sasrl::nn::Direction::Maximize).unwrap();
    }
    let mut worst = 0.0f64;
    for i in 0..=10 {
        for j in 0..=10 {
            let out = actor.propose_one(&[i as f64 / 10.0, j as f64 / 10.0]);
            worst = worst.max((out[0] - 0.7).abs()).max((out[1] - 0.2).abs());
        }
    }
    verdict(
        worst < ACTOR_OPTIMUM_TOL,
        format!("121 probe states, max |mu(s) - c| = {worst:.2e} (tol {ACTOR_OPTIMUM_TOL:.0e})"),
    )
}

fn line_sample(s: f64, a: f64, sn: f64) -> TransitionSample {
    TransitionSample {
        s: EnvState::new(vec![s]),
        s_next: EnvState::new(vec![sn]),
        a: ActionVec::new(vec![a]),
        r: 0.0,
        done: false,
    }
}

/// One source state; actions drawn with probabilities (0.1, 0.4, 0.5), the
/// first two reaching state 1 and the third state 2.
fn three_action_stats(w: usize, rng: &mut SimRng) -> OccupancyStats {
    let line = BoxBounds::uniform(1, 0.0, 2.0);
    let disc = Discretizer::new(line.clone(), line, vec![3], vec![3]).unwrap();
    let samples: Vec<TransitionSample> = (0..w)
        .map(|_| match rng.random::<f64>() {
            u if u < 0.1 => line_sample(0.0, 0.0, 1.0),
            u if u < 0.5 => line_sample(0.0, 1.0, 1.0),
            _ => line_sample(0.0, 2.0, 2.0),
        })
        .collect();
    let mut st = OccupancyStats::new();
    st.accumulate(&samples, &disc);
    st
}

fn criterion_4() -> Verdict {
    // exact enumeration: p_sa = {0.1, 0.4, 0.5}, p_ss = {0.5, 0.5}; the flat
    // p_ss gives r2 = 1
    let (r1_exact, r2_exact) = (0.1 / 0.5, 1.0);
    let k_exact = r2_exact / r1_exact;
    let five = three_action_stats(100_000, &mut sim_rng(1)).estimate_k(DEFAULT_SUPPORT_THRESHOLD).unwrap();

    let unit = BoxBounds::uniform(1, 0.0, 1.0);
    let disc = Discretizer::new(unit.clone(), unit, vec![2], vec![2]).unwrap();
    let mut rng = sim_rng(2);
    let mut s = 0.0;
    let mut chain = Vec::new();
    for _ in 0..100_000 {
        let a = if rng.random::<bool>() { 1.0 } else { 0.0 };
        chain.push(line_sample(s, a, a));
        s = a;
    }
    let mut st = OccupancyStats::new();
    st.accumulate(&chain, &disc);
    let one = st.estimate_k(DEFAULT_SUPPORT_THRESHOLD).unwrap();

    let mut errors = Vec::new();
    let mut rng = sim_rng(40);
    for w in [1_000, 10_000, 100_000] {
        let reps = 20;
        let e = (0..reps)
            .map(|_| {
                let k = three_action_stats(w, &mut rng).estimate_k(DEFAULT_SUPPORT_THRESHOLD).unwrap();
                (k.r1 - r1_exact).abs() + (k.r2 - r2_exact).abs()
            })
            .sum::<f64>()
            / reps as f64;
        errors.push(e);
    }
    let shrinking = errors.windows(2).all(|w| w[1] < w[0]);
    let passed = (five.k - k_exact).abs() <= K_FIVE_TOL && (one.k - 1.0).abs() <= K_ONE_TOL && shrinking;
    verdict(
        passed,
        format!(
            "k = {:.3} (want 5 +/- {K_FIVE_TOL}), symmetric k = {:.4} (want 1 +/- {K_ONE_TOL}), mean error at W = 1e3/1e4/1e5: {:.4}/{:.4}/{:.4}",
            five.k, one.k, errors[0], errors[1], errors[2]
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in EnvKind::ALL {
        let env = make_env(kind);
        let log = uniform_random_log(&*env, 100_000, 11).unwrap();
        let disc = Discretizer::for_spec(env.spec()).unwrap();
        let mut st = OccupancyStats::new();
        st.accumulate(&log, &disc);
        match st.estimate_k(DEFAULT_SUPPORT_THRESHOLD) {
            Ok(k) => {
                ok &= k.k > 1.0;
                parts.push(format!("{kind} k = {:.3} (r1 {:.3e}, r2 {:.3e})", k.k, k.r1, k.r2));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{kind}: {e}"));
            }
        }
    }
    verdict(ok, format!("W = 1e5 uniform-random steps, bins 10/8, want k > 1: {}", parts.join("; ")))
}

fn run(config: &RunConfig, dir: &Path) -> RunSummary {
    let summary = run_experiment(config, dir).unwrap();
    assert!(summary.failures.is_empty(), "seeds failed: {:?}", summary.failures);
    summary
}

fn grid_config(granularity: Granularity) -> RunConfig {
    let mut c = RunConfig {
        env: EnvKind::GridWorld,
        ..RunConfig::default()
    };
    c.agent.granularity = granularity;
    c
}

fn final_returns(summary: &RunSummary) -> Vec<(u64, f64)> {
    summary.runs.iter().map(|r| (r.seed, r.curve.last().map_or(f64::NAN, |row| row.mean_return))).collect()
}

fn criterion_6(continuous: &RunSummary) -> Verdict {
    let env = make_env(EnvKind::GridWorld);
    let mut passing = 0;
    let mut parts = Vec::new();
    for (seed, fin) in final_returns(continuous) {
        let random = random_policy_returns(&*env, 10, seed).unwrap();
        let random_mean = random.iter().sum::<f64>() / random.len() as f64;
        if fin >= random_mean + PROGRESS_MARGIN {
            passing += 1;
        }
        parts.push(format!("{seed}:{fin:.1}/{random_mean:.1}"));
    }
    verdict(
        passing >= PROGRESS_MIN_SEEDS,
        format!(
            "{passing}/10 seeds beat random by {PROGRESS_MARGIN} (need {PROGRESS_MIN_SEEDS}); seed:final/random {}",
            parts.join(" ")
        ),
    )
}

fn criterion_7(root: &Path) -> Verdict {
    let mut dirs = Vec::new();
    for algo in [Formulation::StateTransition, Formulation::StateAction] {
        let c = RunConfig {
            env: EnvKind::Slot,
            algo,
            ..RunConfig::default()
        };
        let dir = root.join(format!("slot_{algo}"));
        run(&c, &dir);
        dirs.push(dir);
    }
    let report = compare_report(&dirs).unwrap();
    let (sas, ddpg) = (report.rows[0].plateau.unwrap(), report.rows[1].plateau.unwrap());
    verdict(
        sas >= ddpg,
        format!("plateau sasrl {sas:.3} vs ddpg {ddpg:.3} ({:+.1}%)", report.improvement(0, 1).unwrap_or(f64::NAN)),
    )
}

fn criterion_8() -> Verdict {
    // slot machine: replay predicted timers from the recorded hidden offsets
    let mut slot = SlotMachine::new(SlotParams {
        backdoor: true,
        ..SlotParams::default()
    })
    .unwrap();
    let mut rng = sim_rng(9);
    let mut rows = Vec::new();
    for _ in 0..5_000 {
        let s = slot.reset(&mut rng);
        let offsets = slot.hidden_offsets().unwrap();
        let a = ActionVec::new(slot.spec().action_box.sample_uniform(&mut rng));
        let out = slot.step(&a);
        rows.push((
            offsets,
            TransitionSample {
                s,
                s_next: out.s_next,
                a: out.applied_action,
                r: out.reward,
                done: out.done,
            },
        ));
    }
    let (train_rows, test_rows) = rows.split_at(4_000);
    let spec = slot.spec().clone();
    let mut model = TransitionModel::new(spec.state_box, spec.action_box, LossKind::MseContinuous, &[64, 64], 1e-3, &mut rng).unwrap();
    let refs: Vec<&TransitionSample> = train_rows.iter().map(|(_, t)| t).collect();
    model.fit(&refs, 50, 128, &mut rng).unwrap();
    let hits = test_rows
        .iter()
        .filter(|(offsets, t)| {
            slot.restore_offsets(offsets).unwrap();
            let a = model.predict(&t.s, &t.s_next);
            slot.step(&a).s_next == t.s_next
        })
        .count();
    let replay = hits as f64 / test_rows.len() as f64;

    // grid world: against the analytic displacement on a held-out fifth
    let env = make_env(EnvKind::GridWorld);
    let data = grid_batch(250_000, 3);
    let (train_set, test_set) = data.split_at(data.len() * 4 / 5);
    let spec = env.spec().clone();
    let d = sasrl::env::GridParams::default().move_limit;
    let mut model = TransitionModel::new(spec.state_box, spec.action_box, LossKind::MseContinuous, &[64, 64], 1e-3, &mut rng).unwrap();
    let refs: Vec<&TransitionSample> = train_set.iter().collect();
    model.fit(&refs, 50, 128, &mut rng).unwrap();
    let err = test_set
        .iter()
        .map(|t| {
            let p = model.predict(&t.s, &t.s_next);
            let a = env.inverse_action(&t.s, &t.s_next).expect("logged transitions are reachable");
            (p[0] - a[0]).hypot(p[1] - a[1])
        })
        .sum::<f64>()
        / test_set.len() as f64;
    let limit = GRID_ACTION_ERR_FRACTION_OF_D * d;
    verdict(
        replay >= REPLAY_MIN_FRACTION && err < limit,
        format!(
            "slot replay {hits}/{} (need {:.0}%), grid mean action error {err:.2e} (limit {limit:.2e})",
            test_rows.len(),
            REPLAY_MIN_FRACTION * 100.0
        ),
    )
}

fn criterion_9(continuous: &RunSummary, coarse: &RunSummary) -> Verdict {
    let mean = |s: &RunSummary| {
        let f = final_returns(s);
        f.iter().map(|(_, v)| v).sum::<f64>() / f.len() as f64
    };
    let seeds = |s: &RunSummary| s.runs.iter().map(|r| r.seed).collect::<Vec<_>>();
    let (c, q) = (mean(continuous), mean(coarse));
    verdict(
        seeds(continuous) == seeds(coarse) && c >= q,
        format!("mean final return continuous {c:.3} vs coarse {q:.3} over seeds {:?}", seeds(continuous)),
    )
}

fn criterion_10(root: &Path) -> Verdict {
    let mut rng = sim_rng(77);
    let online = Critic::new(BoxBounds::uniform(2, 0.0, 1.0), BoxBounds::uniform(2, 0.0, 1.0), &[8, 8], &mut rng).unwrap();
    let mut target = Critic::new(BoxBounds::uniform(2, 0.0, 1.0), BoxBounds::uniform(2, 0.0, 1.0), &[8, 8], &mut rng).unwrap();
    let eps: f64 = rng.random_range(0.0..1.0);
    let (o, t0) = (online.net.parameters(), target.net.parameters());
    soft_update(&online.net, &mut target.net, eps);
    let bit_exact = target
        .net
        .parameters()
        .iter()
        .zip(o.iter().zip(&t0))
        .all(|(got, (o, t))| got.to_bits() == (eps * o + (1.0 - eps) * t).to_bits());

    let mut buf = ReplayBuffer::new(50, 1);
    let all: Vec<TransitionSample> = (0..130).map(|i| line_sample(i as f64, 0.0, 0.0)).collect();
    for t in &all {
        buf.push(t.clone()).unwrap();
    }
    let fifo = buf.iter().cloned().collect::<Vec<_>>() == all[80..];

    let mut c = RunConfig {
        seeds: vec![1, 2],
        ..RunConfig::default()
    };
    for (k, v) in [("prefill", "500"), ("max_gradient_steps", "600"), ("eval_interval", "200"), ("eval_episodes", "3")] {
        c.set(k, v).unwrap();
    }
    let (a, b) = (root.join("det_a"), root.join("det_b"));
    run(&c, &a);
    run(&c, &b);
    let identical = ["seed_1.csv", "seed_2.csv", "aggregate.csv"]
        .iter()
        .all(|f| fs::read(a.join(f)).unwrap() == fs::read(b.join(f)).unwrap());
    verdict(
        bit_exact && fifo && identical,
        format!("soft update bit-exact {bit_exact}, FIFO eviction {fifo}, rerun CSVs identical {identical}"),
    )
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|p| p.trim().parse().ok()).collect());
    let wanted = |n: u32| only.as_ref().is_none_or(|o| o.contains(&n));
    let scratch = tempfile::tempdir().unwrap();
    let root = scratch.path();

    let mut results: Vec<(u32, &str, Verdict, f64)> = Vec::new();
    let mut record = |n: u32, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        if !wanted(n) {
            return;
        }
        let t = Instant::now();
        let v = f();
        let secs = t.elapsed().as_secs_f64();
        println!("criterion {n:>2} {name}: {} | {} | {secs:.0}s", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        results.push((n, name, v, secs));
    };

    record(1, "gradient oracles", &mut criterion_1);
    record(2, "tabular fixed point", &mut criterion_2);
    record(3, "synthetic actor optimum", &mut criterion_3);
    record(4, "k estimator", &mut criterion_4);
    record(5, "efficient-training condition", &mut criterion_5);

    // the continuous grid run is shared by 6 and 9 and timed under 6
    let grid = |g: Granularity, name: &str| run(&grid_config(g), &root.join(name));
    let mut continuous: Option<RunSummary> = None;
    record(6, "learning progress", &mut || {
        let c = grid(Granularity::Continuous, "grid_continuous");
        let v = criterion_6(&c);
        continuous = Some(c);
        v
    });
    record(7, "slot comparison", &mut || criterion_7(root));
    record(8, "transition replay", &mut criterion_8);
    record(9, "granularity ablation", &mut || {
        let c = continuous.take().unwrap_or_else(|| grid(Granularity::Continuous, "grid_continuous"));
        criterion_9(&c, &grid(Granularity::Coarse, "grid_coarse"))
    });
    record(10, "mechanical exactness", &mut || criterion_10(root));

    let unexpected: Vec<u32> = results
        .iter()
        .filter(|(n, _, v, _)| !v.passed && !EXPECTED_FAILURES.contains(n))
        .map(|(n, ..)| *n)
        .collect();
    let failed = results.iter().filter(|(_, _, v, _)| !v.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed ({} expected) of {}",
        results.len() - failed,
        failed - unexpected.len(),
        results.len()
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
