//! Simulators: a continuous grid world with a mine and an exit, a simplified
//! top-down shooter, and a three-reel slot machine.

mod berzerk;
mod grid;
mod slot;

use std::fmt;
use std::str::FromStr;

pub use berzerk::{BerzerkParams, BerzerkWorld, DEAD_ROBOT};
pub use grid::{GridParams, GridWorld};
pub use slot::{SlotMachine, SlotParams, SYMBOL_KINDS};

use crate::error::{Error, Result};
use crate::mmrp::Environment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnvKind {
    GridWorld,
    Berzerk,
    Slot,
}

impl EnvKind {
    pub const ALL: [EnvKind; 3] = [EnvKind::GridWorld, EnvKind::Berzerk, EnvKind::Slot];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::GridWorld => "gridworld",
            EnvKind::Berzerk => "berzerk",
            EnvKind::Slot => "slot",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gridworld" => Ok(EnvKind::GridWorld),
            "berzerk" => Ok(EnvKind::Berzerk),
            "slot" => Ok(EnvKind::Slot),
            other => Err(Error::Config(format!("unknown environment `{other}` (gridworld|berzerk|slot)"))),
        }
    }
}

/// Constants for every environment, overridable by `grid.*`, `berzerk.*` and
/// `slot.*` configuration keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnvParams {
    pub grid: GridParams,
    pub berzerk: BerzerkParams,
    pub slot: SlotParams,
}

impl EnvParams {
    /// Applies one override. Returns `Ok(false)` if the key does not belong
    /// to any environment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        if let Some(k) = key.strip_prefix("grid.") {
            self.grid.set(k, value).map(|_| true)
        } else if let Some(k) = key.strip_prefix("berzerk.") {
            self.berzerk.set(k, value).map(|_| true)
        } else if let Some(k) = key.strip_prefix("slot.") {
            self.slot.set(k, value).map(|_| true)
        } else {
            Ok(false)
        }
    }

    /// Every key and its current value, in a stable order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let prefix = |p: &str, v: Vec<(&'static str, String)>| {
            v.into_iter().map(|(k, val)| (format!("{p}.{k}"), val)).collect::<Vec<_>>()
        };
        let mut out = prefix("grid", self.grid.entries());
        out.extend(prefix("berzerk", self.berzerk.entries()));
        out.extend(prefix("slot", self.slot.entries()));
        out
    }

    pub fn build(&self, kind: EnvKind) -> Result<Box<dyn Environment>> {
        Ok(match kind {
            EnvKind::GridWorld => Box::new(GridWorld::new(self.grid.clone())?),
            EnvKind::Berzerk => Box::new(BerzerkWorld::new(self.berzerk.clone())?),
            EnvKind::Slot => Box::new(SlotMachine::new(self.slot.clone())?),
        })
    }
}

/// Builds an environment with default constants.
pub fn make_env(kind: EnvKind) -> Box<dyn Environment> {
    EnvParams::default().build(kind).expect("default environment constants are valid")
}

pub(crate) fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| Error::Config(format!("bad value `{value}` for `{key}`: {e}")))
}

pub(crate) fn parse_pair(key: &str, value: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("`{key}` expects `x,y`, got `{value}`")));
    }
    Ok([parse_value(key, parts[0])?, parse_value(key, parts[1])?])
}

pub(crate) fn fmt_pair(p: [f64; 2]) -> String {
    format!("{},{}", p[0], p[1])
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Deterministic sunflower layout of `n` offsets inside the disc of radius
/// `radius`: offset `i` sits at distance `radius·sqrt(i/(n-1))` and angle
/// `i·golden_angle`. `n = 1` gives the centre only.
pub fn disc_pattern(radius: f64, n: usize) -> Vec<[f64; 2]> {
    if n <= 1 {
        return vec![[0.0, 0.0]; n];
    }
    (0..n)
        .map(|i| {
            let r = radius * (i as f64 / (n - 1) as f64).sqrt();
            let theta = i as f64 * GOLDEN_ANGLE;
            [r * theta.cos(), r * theta.sin()]
        })
        .collect()
}

/// Scales `a` back onto the disc of radius `limit` when it lies outside.
pub(crate) fn clip_norm(a: [f64; 2], limit: f64) -> [f64; 2] {
    let n = a[0].hypot(a[1]);
    if n > limit && n > 0.0 {
        [a[0] * limit / n, a[1] * limit / n]
    } else {
        a
    }
}

/// Whether the segment `p → q` comes within `radius` of `c`.
pub(crate) fn segment_hits_disc(p: [f64; 2], q: [f64; 2], c: [f64; 2], radius: f64) -> bool {
    let d = [q[0] - p[0], q[1] - p[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((c[0] - p[0]) * d[0] + (c[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    let closest = [p[0] + t * d[0], p[1] + t * d[1]];
    (closest[0] - c[0]).hypot(closest[1] - c[1]) <= radius
}

/// Smallest `t ≥ 0` at which the ray `p + t·dir` (unit `dir`) enters the disc,
/// if it does.
pub(crate) fn ray_disc_entry(p: [f64; 2], dir: [f64; 2], c: [f64; 2], radius: f64) -> Option<f64> {
    let f = [p[0] - c[0], p[1] - c[1]];
    let b = f[0] * dir[0] + f[1] * dir[1];
    let cc = f[0] * f[0] + f[1] * f[1] - radius * radius;
    if cc <= 0.0 {
        return Some(0.0);
    }
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= 0.0).then_some(t)
}
