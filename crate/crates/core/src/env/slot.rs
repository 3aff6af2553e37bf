use rand::seq::SliceRandom;
use rand::Rng;

use super::parse_value;
use crate::error::{Error, Result};
use crate::mmrp::{sim_rng, ActionGeometry, ActionVec, BoxBounds, EnvSpec, EnvState, Environment, SimRng, StepOutcome};

/// Distinct symbol kinds on every reel.
pub const SYMBOL_KINDS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct SlotParams {
    pub n_reels: usize,
    pub symbols_per_reel: usize,
    /// Strip positions advanced per unit of timer.
    pub spin_rate: f64,
    pub timer_max: f64,
    /// Seeds the per-reel symbol arrangement.
    pub layout_seed: u64,
    /// Three-of-a-kind payout for symbol kinds 0..4.
    pub triple_pay: [f64; SYMBOL_KINDS],
    /// Payout when exactly two reels match.
    pub pair_pay: f64,
    /// Exposes reel strips and offsets through accessor methods.
    pub backdoor: bool,
    pub gamma: f64,
}

impl Default for SlotParams {
    fn default() -> Self {
        SlotParams {
            n_reels: 3,
            symbols_per_reel: 8,
            spin_rate: 4.0,
            timer_max: 1.0,
            layout_seed: 7,
            triple_pay: [20.0, 15.0, 10.0, 5.0],
            pair_pay: 2.0,
            backdoor: false,
            gamma: 0.99,
        }
    }
}

impl SlotParams {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_reels" => self.n_reels = parse_value(key, value)?,
            "symbols_per_reel" => self.symbols_per_reel = parse_value(key, value)?,
            "spin_rate" => self.spin_rate = parse_value(key, value)?,
            "timer_max" => self.timer_max = parse_value(key, value)?,
            "layout_seed" => self.layout_seed = parse_value(key, value)?,
            "triple_pay" => {
                let parts = value
                    .split(',')
                    .map(|v| parse_value::<f64>(key, v))
                    .collect::<Result<Vec<_>>>()?;
                self.triple_pay = parts
                    .try_into()
                    .map_err(|_| Error::Config(format!("`slot.triple_pay` needs {SYMBOL_KINDS} values")))?;
            }
            "pair_pay" => self.pair_pay = parse_value(key, value)?,
            "backdoor" => self.backdoor = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `slot.{key}`"))),
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let pays = self.triple_pay.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        vec![
            ("n_reels", self.n_reels.to_string()),
            ("symbols_per_reel", self.symbols_per_reel.to_string()),
            ("spin_rate", self.spin_rate.to_string()),
            ("timer_max", self.timer_max.to_string()),
            ("layout_seed", self.layout_seed.to_string()),
            ("triple_pay", pays),
            ("pair_pay", self.pair_pay.to_string()),
            ("backdoor", self.backdoor.to_string()),
            ("gamma", self.gamma.to_string()),
        ]
    }
}

/// Slot machine with hidden reel strips. The state is the one-hot encoded
/// display, the action is one spin timer per reel, and every episode is a
/// single spin.
///
/// Each strip repeats a per-reel permutation of the symbol kinds, so the
/// displayed symbol pins down the strip position modulo the period and the
/// next display is a function of the current display and the timers.
#[derive(Clone, Debug)]
pub struct SlotMachine {
    params: SlotParams,
    spec: EnvSpec,
    strips: Vec<Vec<usize>>,
    offsets: Vec<usize>,
}

impl SlotMachine {
    pub fn new(params: SlotParams) -> Result<Self> {
        let p = &params;
        if p.n_reels == 0 || p.symbols_per_reel == 0 || !p.symbols_per_reel.is_multiple_of(SYMBOL_KINDS) {
            return Err(Error::Config(format!(
                "slot machine needs reels >= 1 and a multiple of {SYMBOL_KINDS} symbols per reel"
            )));
        }
        if !(p.spin_rate >= 0.0 && p.timer_max > 0.0) || !(p.gamma > 0.0 && p.gamma < 1.0) {
            return Err(Error::Config("slot machine rates must be positive and gamma in (0,1)".into()));
        }
        let mut layout_rng = sim_rng(p.layout_seed);
        let strips = (0..p.n_reels)
            .map(|_| {
                let mut perm: Vec<usize> = (0..SYMBOL_KINDS).collect();
                perm.shuffle(&mut layout_rng);
                (0..p.symbols_per_reel).map(|i| perm[i % SYMBOL_KINDS]).collect()
            })
            .collect();
        let spec = EnvSpec {
            name: "slot".into(),
            state_box: BoxBounds::uniform(p.n_reels * SYMBOL_KINDS, 0.0, 1.0),
            action_box: BoxBounds::uniform(p.n_reels, 0.0, p.timer_max),
            gamma: p.gamma,
            max_episode_steps: 1,
            action_geometry: ActionGeometry::Timers { max: p.timer_max },
        };
        let offsets = vec![0; p.n_reels];
        Ok(SlotMachine {
            params,
            spec,
            strips,
            offsets,
        })
    }

    pub fn params(&self) -> &SlotParams {
        &self.params
    }

    /// Symbols currently on display, one per reel.
    pub fn display(&self) -> Vec<usize> {
        self.offsets.iter().zip(&self.strips).map(|(&o, strip)| strip[o]).collect()
    }

    /// Decodes a one-hot state into displayed symbols.
    pub fn decode(&self, s: &EnvState) -> Vec<usize> {
        s.chunks(SYMBOL_KINDS)
            .map(|chunk| {
                let mut best = 0;
                for (i, v) in chunk.iter().enumerate() {
                    if *v > chunk[best] {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }

    pub fn encode(&self, display: &[usize]) -> EnvState {
        let mut v = vec![0.0; self.params.n_reels * SYMBOL_KINDS];
        for (r, &sym) in display.iter().enumerate() {
            v[r * SYMBOL_KINDS + sym] = 1.0;
        }
        EnvState::new(v)
    }

    pub fn payout(&self, display: &[usize]) -> f64 {
        let mut counts = [0usize; SYMBOL_KINDS];
        for &s in display {
            counts[s] += 1;
        }
        let n = display.len();
        if let Some(k) = (0..SYMBOL_KINDS).find(|&k| counts[k] == n && n > 1) {
            return self.params.triple_pay[k];
        }
        let most = counts.iter().copied().max().unwrap_or(0);
        if most == 2 {
            self.params.pair_pay
        } else {
            0.0
        }
    }

    /// Positions a timer advances its reel by.
    pub fn advance(&self, timer: f64) -> usize {
        let t = timer.clamp(0.0, self.params.timer_max);
        (self.params.spin_rate * t).floor() as usize
    }

    /// Display after spinning from `display` with `timers`, read off the
    /// periodic strips.
    fn spin_display(&self, display: &[usize], timers: &[f64]) -> Vec<usize> {
        display
            .iter()
            .zip(timers)
            .zip(&self.strips)
            .map(|((&sym, &t), strip)| {
                let phase = strip.iter().position(|&x| x == sym).expect("symbol on strip");
                strip[(phase + self.advance(t)) % strip.len()]
            })
            .collect()
    }

    pub fn hidden_offsets(&self) -> Option<Vec<usize>> {
        self.params.backdoor.then(|| self.offsets.clone())
    }

    pub fn reel_strips(&self) -> Option<Vec<Vec<usize>>> {
        self.params.backdoor.then(|| self.strips.clone())
    }

    pub fn restore_offsets(&mut self, offsets: &[usize]) -> Result<()> {
        if !self.params.backdoor {
            return Err(Error::Config("reel offsets are hidden unless `slot.backdoor = true`".into()));
        }
        if offsets.len() != self.params.n_reels || offsets.iter().any(|&o| o >= self.params.symbols_per_reel) {
            return Err(Error::Config(format!("bad reel offsets {offsets:?}")));
        }
        self.offsets = offsets.to_vec();
        Ok(())
    }

    /// Timer levels per reel used to lay out `n` candidates.
    fn levels_for(&self, n: usize) -> usize {
        let mut m: usize = 1;
        while m.pow(self.params.n_reels as u32) < n {
            m += 1;
        }
        m
    }
}

impl Environment for SlotMachine {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut SimRng) -> EnvState {
        let n = self.params.symbols_per_reel;
        for o in &mut self.offsets {
            *o = rng.random_range(0..n);
        }
        self.state()
    }

    fn state(&self) -> EnvState {
        self.encode(&self.display())
    }

    fn step(&mut self, action: &ActionVec) -> StepOutcome {
        assert_eq!(action.width(), self.params.n_reels, "slot action width");
        let applied = self.project_action(action);
        let n = self.params.symbols_per_reel;
        for (o, &t) in self.offsets.iter_mut().zip(applied.iter()) {
            let adv = (self.params.spin_rate * t).floor() as usize;
            *o = (*o + adv) % n;
        }
        let display = self.display();
        StepOutcome {
            s_next: self.encode(&display),
            reward: self.payout(&display),
            done: true,
            applied_action: applied,
        }
    }

    fn feasible_candidates(&self, s: &EnvState, n: usize) -> Vec<EnvState> {
        let display = self.decode(s);
        let m = self.levels_for(n);
        let reels = self.params.n_reels;
        let tmax = self.params.timer_max;
        (0..n)
            .map(|idx| {
                let mut rest = idx;
                let mut timers = vec![0.0; reels];
                for r in (0..reels).rev() {
                    timers[r] = (((rest % m) as f64) + 0.5) / m as f64 * tmax;
                    rest /= m;
                }
                self.encode(&self.spin_display(&display, &timers))
            })
            .collect()
    }

    fn has_inverse_action(&self) -> bool {
        false
    }

    fn inverse_action(&self, _s: &EnvState, _s_next: &EnvState) -> Option<ActionVec> {
        None
    }

    fn boxed_clone(&self) -> Box<dyn Environment> {
        Box::new(self.clone())
    }
}
