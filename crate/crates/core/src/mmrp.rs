//! Core data model: states, actions, transition samples, the replay buffer,
//! the environment contract and episode roll-outs.
//!
//! Rewards are attached to transitions `(s, s')`; an action is only recorded
//! as the thing that caused the transition.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Random source used by every seeded component.
pub type SimRng = ChaCha8Rng;

pub fn sim_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent seed for sub-stream `stream` of a run seeded with `seed`
/// (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Component-wise bounds `[low, high]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxBounds {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl BoxBounds {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Self {
        assert_eq!(low.len(), high.len(), "box bound widths");
        assert!(low.iter().zip(&high).all(|(l, h)| l <= h), "box low exceeds high");
        BoxBounds { low, high }
    }

    pub fn uniform(width: usize, low: f64, high: f64) -> Self {
        Self::new(vec![low; width], vec![high; width])
    }

    pub fn width(&self) -> usize {
        self.low.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.low.iter().zip(&self.high).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn half_width(&self) -> Vec<f64> {
        self.low.iter().zip(&self.high).map(|(l, h)| 0.5 * (h - l)).collect()
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.width() && v.iter().zip(self.low.iter().zip(&self.high)).all(|(x, (l, h))| l <= x && x <= h)
    }

    pub fn clamp(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.width(), "clamp width");
        v.iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(x, (l, h))| x.clamp(*l, *h))
            .collect()
    }

    /// Maps `x` affinely so the box becomes `[-1, 1]` per component;
    /// degenerate components map to 0.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(v, (l, h))| if h > l { (2.0 * v - l - h) / (h - l) } else { 0.0 })
            .collect()
    }

    /// Inverse of [`BoxBounds::normalize`].
    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(v, (l, h))| 0.5 * (l + h) + 0.5 * (h - l) * v)
            .collect()
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(&l, &h)| if l == h { l } else { rng.random_range(l..=h) })
            .collect()
    }
}

macro_rules! real_vector_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(values: Vec<f64>) -> Self {
                $name(values)
            }

            pub fn width(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(values: Vec<f64>) -> Self {
                $name(values)
            }
        }
    };
}

real_vector_newtype!(
    /// A fixed-width environment state.
    EnvState
);
real_vector_newtype!(
    /// A fixed-width action.
    ActionVec
);

/// One experience tuple `(s, s', a, r, done)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionSample {
    pub s: EnvState,
    pub s_next: EnvState,
    pub a: ActionVec,
    pub r: f64,
    pub done: bool,
}

impl TransitionSample {
    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() {
            return Err(Error::InvalidSample(format!("non-finite reward {}", self.r)));
        }
        if self.s.width() != self.s_next.width() {
            return Err(Error::InvalidSample(format!(
                "state widths differ: {} vs {}",
                self.s.width(),
                self.s_next.width()
            )));
        }
        if !self.s.is_finite() || !self.s_next.is_finite() || !self.a.is_finite() {
            return Err(Error::InvalidSample("non-finite state or action entry".into()));
        }
        Ok(())
    }
}

/// Bounded FIFO of samples with seeded uniform minibatch draws.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: VecDeque<TransitionSample>,
    rng: SimRng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            storage: VecDeque::with_capacity(capacity.min(1 << 16)),
            rng: sim_rng(seed),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn push(&mut self, sample: TransitionSample) -> Result<()> {
        if let Err(e) = sample.validate() {
            log::warn!("replay buffer rejected a sample: {e}");
            return Err(e);
        }
        if self.storage.len() == self.capacity {
            self.storage.pop_front();
        }
        self.storage.push_back(sample);
        Ok(())
    }

    /// Draws `n` samples uniformly with replacement.
    pub fn sample(&mut self, n: usize) -> Result<Vec<&TransitionSample>> {
        if self.storage.is_empty() {
            return Err(Error::NotReady("cannot sample from an empty replay buffer".into()));
        }
        let len = self.storage.len();
        let idx: Vec<usize> = (0..n).map(|_| self.rng.random_range(0..len)).collect();
        Ok(idx.into_iter().map(|i| &self.storage[i]).collect())
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &TransitionSample> {
        self.storage.iter()
    }
}

/// How an environment's actions relate to its geometry; used to build the
/// discrete behaviour action sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActionGeometry {
    /// Planar displacement of the agent with norm at most `limit`.
    Displacement { limit: f64 },
    /// Independent per-component timers in `[0, max]`.
    Timers { max: f64 },
    Other,
}

/// Static description of an environment instance.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub state_box: BoxBounds,
    pub action_box: BoxBounds,
    pub gamma: f64,
    pub max_episode_steps: usize,
    pub action_geometry: ActionGeometry,
}

impl EnvSpec {
    pub fn state_width(&self) -> usize {
        self.state_box.width()
    }

    pub fn action_width(&self) -> usize {
        self.action_box.width()
    }
}

/// Result of one environment step. `applied_action` is the action that
/// actually took effect after feasibility projection and obstacle handling.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub s_next: EnvState,
    pub reward: f64,
    pub done: bool,
    pub applied_action: ActionVec,
}

/// Contract implemented by every simulator.
pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode; the only place environments consume randomness.
    fn reset(&mut self, rng: &mut SimRng) -> EnvState;

    fn state(&self) -> EnvState;

    fn step(&mut self, action: &ActionVec) -> StepOutcome;

    /// Maps an arbitrary action into the feasible action set.
    fn project_action(&self, action: &ActionVec) -> ActionVec {
        ActionVec::new(self.spec().action_box.clamp(action))
    }

    /// Whether [`Environment::inverse_action`] can answer at all.
    fn has_inverse_action(&self) -> bool {
        true
    }

    /// States reachable in one step from `s`, laid out deterministically.
    fn feasible_candidates(&self, s: &EnvState, n: usize) -> Vec<EnvState>;

    /// An action that realises `s → s_next`, when the environment can tell.
    fn inverse_action(&self, s: &EnvState, s_next: &EnvState) -> Option<ActionVec>;

    fn boxed_clone(&self) -> Box<dyn Environment>;
}

impl Clone for Box<dyn Environment> {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}

/// A finished (or truncated) episode.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub samples: Vec<TransitionSample>,
    /// Undiscounted sum of rewards.
    pub episode_return: f64,
    pub discounted_return: f64,
}

/// Runs one episode from a seeded reset. The policy sees the environment so
/// it can query feasibility information; the action it returns is projected
/// and the applied action is what gets recorded.
pub fn rollout<P>(env: &mut dyn Environment, mut policy: P, max_steps: usize, rng_seed: u64) -> Result<Episode>
where
    P: FnMut(&dyn Environment, &EnvState) -> ActionVec,
{
    if max_steps == 0 {
        return Err(Error::Config("rollout needs max_steps >= 1".into()));
    }
    let gamma = env.spec().gamma;
    let mut rng = sim_rng(rng_seed);
    let mut s = env.reset(&mut rng);
    let mut samples = Vec::new();
    let mut rewards = Vec::new();
    for _ in 0..max_steps {
        let raw = policy(&*env, &s);
        let projected = env.project_action(&raw);
        let out = env.step(&projected);
        rewards.push(out.reward);
        samples.push(TransitionSample {
            s: s.clone(),
            s_next: out.s_next.clone(),
            a: out.applied_action,
            r: out.reward,
            done: out.done,
        });
        s = out.s_next;
        if out.done {
            break;
        }
    }
    Ok(Episode {
        samples,
        episode_return: rewards.iter().sum(),
        discounted_return: discounted_return(&rewards, gamma),
    })
}

/// `Σ γ^t r_{t+1}` accumulated forwards.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut acc = 0.0;
    let mut weight = 1.0;
    for r in rewards {
        acc += weight * r;
        weight *= gamma;
    }
    acc
}

/// Header information carried by a trajectory log.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryHeader {
    pub env: String,
    pub state_box: BoxBounds,
    pub action_box: BoxBounds,
}

fn format_box(b: &BoxBounds) -> String {
    b.low
        .iter()
        .zip(&b.high)
        .map(|(l, h)| format!("{l}:{h}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_box(text: &str) -> Result<BoxBounds> {
    let mut low = Vec::new();
    let mut high = Vec::new();
    for pair in text.split(',') {
        let (l, h) = pair
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("bad box bound `{pair}`")))?;
        low.push(parse_f64(l)?);
        high.push(parse_f64(h)?);
    }
    Ok(BoxBounds::new(low, high))
}

fn parse_f64(text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("`{text}`: {e}")))
}

/// Writes samples as `s… | a… | s'… | r | done`, one per line, preceded by
/// `#` header lines naming the environment, its boxes and the column order.
pub fn write_trajectory_log<W: Write>(mut out: W, header: &TrajectoryHeader, samples: &[TransitionSample]) -> Result<()> {
    let sw = header.state_box.width();
    let aw = header.action_box.width();
    writeln!(out, "# env={} state_width={sw} action_width={aw}", header.env)?;
    writeln!(out, "# state_box={}", format_box(&header.state_box))?;
    writeln!(out, "# action_box={}", format_box(&header.action_box))?;
    writeln!(out, "# columns: s[0..{sw}] | a[0..{aw}] | s'[0..{sw}] | r | done")?;
    let mut line = String::new();
    for sample in samples {
        line.clear();
        let join = |line: &mut String, v: &[f64]| {
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{x}");
            }
        };
        join(&mut line, &sample.s);
        line.push_str(" | ");
        join(&mut line, &sample.a);
        line.push_str(" | ");
        join(&mut line, &sample.s_next);
        let _ = write!(line, " | {} | {}", sample.r, u8::from(sample.done));
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trajectory_log<R: BufRead>(input: R) -> Result<(TrajectoryHeader, Vec<TransitionSample>)> {
    let mut env = None;
    let mut state_box = None;
    let mut action_box = None;
    let mut samples = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for token in comment.split_whitespace() {
                if let Some(v) = token.strip_prefix("env=") {
                    env = Some(v.to_string());
                } else if let Some(v) = token.strip_prefix("state_box=") {
                    state_box = Some(parse_box(v)?);
                } else if let Some(v) = token.strip_prefix("action_box=") {
                    action_box = Some(parse_box(v)?);
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('|').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(Error::Parse(format!("line {}: expected 5 `|` columns", lineno + 1)));
        }
        let vec = |c: &str| c.split_whitespace().map(parse_f64).collect::<Result<Vec<f64>>>();
        let done = match cols[4] {
            "0" => false,
            "1" => true,
            other => return Err(Error::Parse(format!("line {}: bad done flag `{other}`", lineno + 1))),
        };
        samples.push(TransitionSample {
            s: EnvState::new(vec(cols[0])?),
            a: ActionVec::new(vec(cols[1])?),
            s_next: EnvState::new(vec(cols[2])?),
            r: parse_f64(cols[3])?,
            done,
        });
    }
    let header = TrajectoryHeader {
        env: env.ok_or_else(|| Error::Parse("trajectory log lacks an env= header".into()))?,
        state_box: state_box.ok_or_else(|| Error::Parse("trajectory log lacks a state_box= header".into()))?,
        action_box: action_box.ok_or_else(|| Error::Parse("trajectory log lacks an action_box= header".into()))?,
    };
    for (i, s) in samples.iter().enumerate() {
        if s.s.width() != header.state_box.width() || s.a.width() != header.action_box.width() {
            return Err(Error::Parse(format!("sample {i} widths disagree with the header")));
        }
    }
    Ok((header, samples))
}
