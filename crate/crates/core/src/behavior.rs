//! Data-collection policies and the action granularity used to quantize them.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mmrp::{ActionGeometry, ActionVec, BoxBounds, EnvSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Granularity {
    Continuous,
    Coarse,
    Fine,
}

impl Granularity {
    pub fn name(self) -> &'static str {
        match self {
            Granularity::Continuous => "continuous",
            Granularity::Coarse => "coarse",
            Granularity::Fine => "fine",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "continuous" => Ok(Granularity::Continuous),
            "coarse" => Ok(Granularity::Coarse),
            "fine" => Ok(Granularity::Fine),
            other => Err(Error::Config(format!("unknown granularity `{other}` (continuous|coarse|fine)"))),
        }
    }
}

/// How samples are gathered after the initial buffer fill.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Collection {
    UniformRandom,
    NoisyActor,
}

impl Collection {
    pub fn name(self) -> &'static str {
        match self {
            Collection::UniformRandom => "uniform_random",
            Collection::NoisyActor => "noisy_actor",
        }
    }
}

impl FromStr for Collection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform_random" => Ok(Collection::UniformRandom),
            "noisy_actor" => Ok(Collection::NoisyActor),
            other => Err(Error::Config(format!(
                "unknown behavior policy `{other}` (uniform_random|noisy_actor)"
            ))),
        }
    }
}

/// Uniform behaviour policy over either the action box or a discrete
/// action set determined by the granularity and the action geometry.
#[derive(Clone, Debug)]
pub struct BehaviorPolicy {
    granularity: Granularity,
    action_box: BoxBounds,
    actions: Vec<ActionVec>,
}

impl BehaviorPolicy {
    pub fn new(granularity: Granularity, spec: &EnvSpec) -> Self {
        let actions = match granularity {
            Granularity::Continuous => Vec::new(),
            Granularity::Coarse | Granularity::Fine => discrete_actions(granularity, spec),
        };
        BehaviorPolicy {
            granularity,
            action_box: spec.action_box.clone(),
            actions,
        }
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    /// The discrete action set; empty for continuous granularity.
    pub fn actions(&self) -> &[ActionVec] {
        &self.actions
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ActionVec {
        if self.actions.is_empty() {
            ActionVec::new(self.action_box.sample_uniform(rng))
        } else {
            self.actions[rng.random_range(0..self.actions.len())].clone()
        }
    }

    /// Nearest member of the action set (lowest index on ties), or the
    /// box-clamped action for continuous granularity.
    pub fn quantize(&self, a: &ActionVec) -> ActionVec {
        if self.actions.is_empty() {
            return ActionVec::new(self.action_box.clamp(a));
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.actions.iter().enumerate() {
            let d: f64 = c.iter().zip(a.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        self.actions[best].clone()
    }
}

fn discrete_actions(granularity: Granularity, spec: &EnvSpec) -> Vec<ActionVec> {
    let fine = granularity == Granularity::Fine;
    match spec.action_geometry {
        ActionGeometry::Displacement { limit } => {
            let (directions, magnitudes) = if fine { (32, 4) } else { (8, 1) };
            let mut out = Vec::with_capacity(directions * magnitudes);
            for m in 1..=magnitudes {
                let r = limit * m as f64 / magnitudes as f64;
                for k in 0..directions {
                    let theta = TAU * k as f64 / directions as f64;
                    out.push(ActionVec::new(vec![r * theta.cos(), r * theta.sin()]));
                }
            }
            out
        }
        ActionGeometry::Timers { .. } | ActionGeometry::Other => {
            let levels = if fine { 16 } else { 4 };
            level_grid(&spec.action_box, levels)
        }
    }
}

/// Cartesian grid with `levels` cell-centred values per dimension.
fn level_grid(b: &BoxBounds, levels: usize) -> Vec<ActionVec> {
    let width = b.width();
    let total = levels.pow(width as u32);
    (0..total)
        .map(|mut idx| {
            let mut v = vec![0.0; width];
            for d in (0..width).rev() {
                let j = idx % levels;
                idx /= levels;
                v[d] = b.low[d] + (b.high[d] - b.low[d]) * (j as f64 + 0.5) / levels as f64;
            }
            ActionVec::new(v)
        })
        .collect()
}
