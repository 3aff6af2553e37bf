//! Occupancy statistics of logged transitions and the ratio `k = R2 / R1`.
//!
//! Continuous states and actions are binned on a per-dimension grid. `R1` is
//! the min/max ratio of empirical `(s, a)` cell probabilities and `R2` the
//! same for `(s, s')`, both over cells visited at least `support_threshold`
//! times.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mmrp::{derive_seed, rollout, sim_rng, ActionVec, BoxBounds, EnvSpec, EnvState, Environment, TransitionSample};

pub const DEFAULT_STATE_BINS: usize = 10;
pub const DEFAULT_ACTION_BINS: usize = 8;
pub const DEFAULT_SUPPORT_THRESHOLD: u64 = 5;
/// Half-width of the band around `k = 1` reported as neutral.
pub const NEUTRAL_BAND: f64 = 0.05;

/// Maps points of a box onto a regular grid of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    bounds: BoxBounds,
    bins: Vec<usize>,
    cells: u64,
}

impl Grid {
    pub fn new(bounds: BoxBounds, bins: Vec<usize>) -> Result<Self> {
        if bins.len() != bounds.width() {
            return Err(Error::Config(format!(
                "{} bin counts for a {}-dimensional box",
                bins.len(),
                bounds.width()
            )));
        }
        if bins.contains(&0) {
            return Err(Error::Config("bin counts must be positive".into()));
        }
        let cells = bins
            .iter()
            .try_fold(1u64, |acc, &b| acc.checked_mul(b as u64))
            .ok_or_else(|| Error::Config("cell count overflows 64 bits".into()))?;
        Ok(Grid { bounds, bins, cells })
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn cell_count(&self) -> u64 {
        self.cells
    }

    /// Cell index of `x` and whether `x` had to be clamped into the box.
    pub fn cell(&self, x: &[f64]) -> (u64, bool) {
        let mut index = 0u64;
        let mut clamped = false;
        for (i, (&v, &b)) in x.iter().zip(&self.bins).enumerate() {
            let (lo, hi) = (self.bounds.low[i], self.bounds.high[i]);
            if !(lo..=hi).contains(&v) {
                clamped = true;
            }
            let bin = if hi > lo {
                let f = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                ((f * b as f64) as usize).min(b - 1)
            } else {
                0
            };
            index = index * b as u64 + bin as u64;
        }
        (index, clamped)
    }
}

/// State and action grids of one environment.
#[derive(Clone, Debug, PartialEq)]
pub struct Discretizer {
    pub state: Grid,
    pub action: Grid,
}

impl Discretizer {
    pub fn new(state_box: BoxBounds, action_box: BoxBounds, state_bins: Vec<usize>, action_bins: Vec<usize>) -> Result<Self> {
        Ok(Discretizer {
            state: Grid::new(state_box, state_bins)?,
            action: Grid::new(action_box, action_bins)?,
        })
    }

    /// The same bin count along every state dimension and every action dimension.
    pub fn uniform(state_box: &BoxBounds, action_box: &BoxBounds, state_bins: usize, action_bins: usize) -> Result<Self> {
        Self::new(
            state_box.clone(),
            action_box.clone(),
            vec![state_bins; state_box.width()],
            vec![action_bins; action_box.width()],
        )
    }

    pub fn for_spec(spec: &EnvSpec) -> Result<Self> {
        Self::uniform(&spec.state_box, &spec.action_box, DEFAULT_STATE_BINS, DEFAULT_ACTION_BINS)
    }
}

/// Which formulation the estimated `k` favours.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeedupRegime {
    MmrpFaster,
    Neutral,
    MdpFaster,
}

impl SpeedupRegime {
    pub fn name(self) -> &'static str {
        match self {
            SpeedupRegime::MmrpFaster => "mMRP_faster",
            SpeedupRegime::Neutral => "neutral",
            SpeedupRegime::MdpFaster => "MDP_faster",
        }
    }
}

impl fmt::Display for SpeedupRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn predict_speedup_regime(k: f64) -> SpeedupRegime {
    if (k - 1.0).abs() <= NEUTRAL_BAND {
        SpeedupRegime::Neutral
    } else if k > 1.0 {
        SpeedupRegime::MmrpFaster
    } else {
        SpeedupRegime::MdpFaster
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KEstimate {
    pub w: u64,
    pub r1: f64,
    pub r2: f64,
    pub k: f64,
}

impl KEstimate {
    pub fn regime(&self) -> SpeedupRegime {
        predict_speedup_regime(self.k)
    }

    /// `W r1 r2 k regime`.
    pub fn report_line(&self) -> String {
        format!("{} {} {} {} {}", self.w, self.r1, self.r2, self.k, self.regime())
    }
}

/// Visit counts of `(s, a)` and `(s, s')` cell pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OccupancyStats {
    w: u64,
    nu_sa: BTreeMap<(u64, u64), u64>,
    nu_ss: BTreeMap<(u64, u64), u64>,
}

impl OccupancyStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn w(&self) -> u64 {
        self.w
    }

    pub fn nu_sa(&self) -> &BTreeMap<(u64, u64), u64> {
        &self.nu_sa
    }

    pub fn nu_ss(&self) -> &BTreeMap<(u64, u64), u64> {
        &self.nu_ss
    }

    /// Counts every sample once in each map. Out-of-box coordinates go to the
    /// nearest boundary cell.
    pub fn accumulate<'a, I>(&mut self, samples: I, disc: &Discretizer)
    where
        I: IntoIterator<Item = &'a TransitionSample>,
    {
        let mut clamped = 0usize;
        for t in samples {
            let (s, c1) = disc.state.cell(&t.s);
            let (a, c2) = disc.action.cell(&t.a);
            let (sn, c3) = disc.state.cell(&t.s_next);
            if c1 || c2 || c3 {
                clamped += 1;
            }
            *self.nu_sa.entry((s, a)).or_insert(0) += 1;
            *self.nu_ss.entry((s, sn)).or_insert(0) += 1;
            self.w += 1;
        }
        if clamped > 0 {
            log::warn!("{clamped} samples lay outside the binning box and were clamped");
        }
    }

    /// Adds another shard's counts.
    pub fn merge(&mut self, other: &OccupancyStats) {
        self.w += other.w;
        for (k, v) in &other.nu_sa {
            *self.nu_sa.entry(*k).or_insert(0) += v;
        }
        for (k, v) in &other.nu_ss {
            *self.nu_ss.entry(*k).or_insert(0) += v;
        }
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> OccupancyStats {
        let scale = |m: &BTreeMap<(u64, u64), u64>| m.iter().map(|(k, v)| (*k, v * factor)).collect();
        OccupancyStats {
            w: self.w * factor,
            nu_sa: scale(&self.nu_sa),
            nu_ss: scale(&self.nu_ss),
        }
    }

    pub fn p_sa(&self) -> BTreeMap<(u64, u64), f64> {
        probabilities(&self.nu_sa, self.w)
    }

    pub fn p_ss(&self) -> BTreeMap<(u64, u64), f64> {
        probabilities(&self.nu_ss, self.w)
    }

    /// `(R1, R2, R2/R1)` over cells with at least `support_threshold` visits.
    pub fn estimate_k(&self, support_threshold: u64) -> Result<KEstimate> {
        if self.w == 0 {
            return Err(Error::NotEnoughData("no transitions recorded".into()));
        }
        let r1 = support_ratio(&self.nu_sa, support_threshold, "(s, a)")?;
        let r2 = support_ratio(&self.nu_ss, support_threshold, "(s, s')")?;
        Ok(KEstimate {
            w: self.w,
            r1,
            r2,
            k: r2 / r1,
        })
    }

    /// One row per visited cell: `map,left_cell,right_cell,count,probability`.
    pub fn write_histogram<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "map,left_cell,right_cell,count,probability")?;
        for (name, map) in [("sa", &self.nu_sa), ("ss", &self.nu_ss)] {
            for (&(l, r), &c) in map {
                writeln!(out, "{name},{l},{r},{c},{}", c as f64 / self.w as f64)?;
            }
        }
        Ok(())
    }
}

fn probabilities(m: &BTreeMap<(u64, u64), u64>, w: u64) -> BTreeMap<(u64, u64), f64> {
    m.iter().map(|(k, &v)| (*k, v as f64 / w as f64)).collect()
}

fn support_ratio(m: &BTreeMap<(u64, u64), u64>, threshold: u64, what: &str) -> Result<f64> {
    let supported = m.values().copied().filter(|&c| c >= threshold.max(1));
    let (lo, hi) = supported.fold((u64::MAX, 0u64), |(lo, hi), c| (lo.min(c), hi.max(c)));
    if hi == 0 {
        let best = m.values().copied().max().unwrap_or(0);
        return Err(Error::NotEnoughData(format!(
            "no {what} cell reaches {threshold} visits (busiest has {best}); record roughly {}x more transitions",
            threshold.div_ceil(best.max(1))
        )));
    }
    Ok(lo as f64 / hi as f64)
}

/// Roll-outs of `policy` until `steps` transitions are logged.
pub fn log_transitions<P>(env: &dyn Environment, mut policy: P, steps: usize, seed: u64) -> Result<Vec<TransitionSample>>
where
    P: FnMut(&dyn Environment, &EnvState) -> ActionVec,
{
    let mut episodes = sim_rng(derive_seed(seed, 0));
    let mut out = Vec::with_capacity(steps);
    while out.len() < steps {
        let mut sim = env.boxed_clone();
        let ep = rollout(sim.as_mut(), &mut policy, env.spec().max_episode_steps, episodes.random())?;
        let room = steps - out.len();
        out.extend(ep.samples.into_iter().take(room));
    }
    Ok(out)
}

/// Transitions from the uniform-random action policy.
pub fn uniform_random_log(env: &dyn Environment, steps: usize, seed: u64) -> Result<Vec<TransitionSample>> {
    let mut rng = sim_rng(derive_seed(seed, 1));
    let action_box = env.spec().action_box.clone();
    log_transitions(env, |_, _| ActionVec::new(action_box.sample_uniform(&mut rng)), steps, seed)
}
