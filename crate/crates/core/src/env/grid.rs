use rand::Rng;

use super::{clip_norm, disc_pattern, fmt_pair, parse_pair, parse_value, segment_hits_disc};
use crate::error::{Error, Result};
use crate::mmrp::{ActionGeometry, ActionVec, BoxBounds, EnvSpec, EnvState, Environment, SimRng, StepOutcome};

#[derive(Clone, Debug, PartialEq)]
pub struct GridParams {
    pub side: f64,
    pub move_limit: f64,
    pub mine_pos: [f64; 2],
    pub exit_pos: [f64; 2],
    pub mine_radius: f64,
    pub exit_radius: f64,
    pub mine_reward: f64,
    pub exit_reward: f64,
    pub time_penalty: f64,
    pub max_steps: usize,
    pub gamma: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            side: 1.0,
            move_limit: 0.15,
            mine_pos: [0.5, 0.5],
            exit_pos: [0.9, 0.9],
            mine_radius: 0.1,
            exit_radius: 0.1,
            mine_reward: -10.0,
            exit_reward: 10.0,
            time_penalty: -0.1,
            max_steps: 200,
            gamma: 0.99,
        }
    }
}

impl GridParams {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "side" => self.side = parse_value(key, value)?,
            "move_limit" => self.move_limit = parse_value(key, value)?,
            "mine_pos" => self.mine_pos = parse_pair(key, value)?,
            "exit_pos" => self.exit_pos = parse_pair(key, value)?,
            "mine_radius" => self.mine_radius = parse_value(key, value)?,
            "exit_radius" => self.exit_radius = parse_value(key, value)?,
            "mine_reward" => self.mine_reward = parse_value(key, value)?,
            "exit_reward" => self.exit_reward = parse_value(key, value)?,
            "time_penalty" => self.time_penalty = parse_value(key, value)?,
            "max_steps" => self.max_steps = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `grid.{key}`"))),
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("side", self.side.to_string()),
            ("move_limit", self.move_limit.to_string()),
            ("mine_pos", fmt_pair(self.mine_pos)),
            ("exit_pos", fmt_pair(self.exit_pos)),
            ("mine_radius", self.mine_radius.to_string()),
            ("exit_radius", self.exit_radius.to_string()),
            ("mine_reward", self.mine_reward.to_string()),
            ("exit_reward", self.exit_reward.to_string()),
            ("time_penalty", self.time_penalty.to_string()),
            ("max_steps", self.max_steps.to_string()),
            ("gamma", self.gamma.to_string()),
        ]
    }
}

/// Point agent in `[0, side]²` that must reach an exit disc while avoiding a
/// mine disc. The state is the agent position.
#[derive(Clone, Debug)]
pub struct GridWorld {
    params: GridParams,
    spec: EnvSpec,
    pos: [f64; 2],
}

impl GridWorld {
    pub fn new(params: GridParams) -> Result<Self> {
        let p = &params;
        if !(p.side > 0.0 && p.move_limit > 0.0 && p.mine_radius >= 0.0 && p.exit_radius > 0.0) {
            return Err(Error::Config("grid world sizes must be positive".into()));
        }
        if !(p.gamma > 0.0 && p.gamma < 1.0) || p.max_steps == 0 {
            return Err(Error::Config("grid world needs gamma in (0,1) and max_steps >= 1".into()));
        }
        let gap = (p.mine_pos[0] - p.exit_pos[0]).hypot(p.mine_pos[1] - p.exit_pos[1]);
        if gap <= p.mine_radius + p.exit_radius {
            return Err(Error::Config("grid world mine and exit regions overlap".into()));
        }
        let spec = EnvSpec {
            name: "gridworld".into(),
            state_box: BoxBounds::uniform(2, 0.0, p.side),
            action_box: BoxBounds::uniform(2, -p.move_limit, p.move_limit),
            gamma: p.gamma,
            max_episode_steps: p.max_steps,
            action_geometry: ActionGeometry::Displacement { limit: p.move_limit },
        };
        let start = [0.1 * p.side, 0.1 * p.side];
        Ok(GridWorld { params, spec, pos: start })
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    /// Places the agent directly; used by tests and by candidate generation.
    pub fn set_position(&mut self, pos: [f64; 2]) {
        self.pos = [pos[0].clamp(0.0, self.params.side), pos[1].clamp(0.0, self.params.side)];
    }

    fn in_disc(p: [f64; 2], c: [f64; 2], r: f64) -> bool {
        (p[0] - c[0]).hypot(p[1] - c[1]) <= r
    }

    /// Reward and termination of moving `from → to`.
    pub fn transition_reward(&self, from: [f64; 2], to: [f64; 2]) -> (f64, bool) {
        let p = &self.params;
        let mut r = p.time_penalty;
        if segment_hits_disc(from, to, p.mine_pos, p.mine_radius) {
            r += p.mine_reward;
            return (r, true);
        }
        if segment_hits_disc(from, to, p.exit_pos, p.exit_radius) {
            r += p.exit_reward;
            return (r, true);
        }
        (r, false)
    }

    fn destination(&self, from: [f64; 2], a: &[f64]) -> [f64; 2] {
        let a = clip_norm([a[0], a[1]], self.params.move_limit);
        let side = self.params.side;
        [(from[0] + a[0]).clamp(0.0, side), (from[1] + a[1]).clamp(0.0, side)]
    }
}

impl Environment for GridWorld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut SimRng) -> EnvState {
        let p = &self.params;
        loop {
            let cand = [rng.random_range(0.0..=p.side), rng.random_range(0.0..=p.side)];
            if !Self::in_disc(cand, p.mine_pos, p.mine_radius) && !Self::in_disc(cand, p.exit_pos, p.exit_radius) {
                self.pos = cand;
                return self.state();
            }
        }
    }

    fn state(&self) -> EnvState {
        EnvState::new(self.pos.to_vec())
    }

    fn step(&mut self, action: &ActionVec) -> StepOutcome {
        assert_eq!(action.width(), 2, "grid world action width");
        let from = self.pos;
        let to = self.destination(from, action);
        let (reward, done) = self.transition_reward(from, to);
        self.pos = to;
        StepOutcome {
            s_next: self.state(),
            reward,
            done,
            applied_action: ActionVec::new(vec![to[0] - from[0], to[1] - from[1]]),
        }
    }

    fn project_action(&self, action: &ActionVec) -> ActionVec {
        let boxed = self.spec.action_box.clamp(action);
        ActionVec::new(clip_norm([boxed[0], boxed[1]], self.params.move_limit).to_vec())
    }

    fn feasible_candidates(&self, s: &EnvState, n: usize) -> Vec<EnvState> {
        let from = [s[0], s[1]];
        disc_pattern(self.params.move_limit, n)
            .into_iter()
            .map(|off| EnvState::new(self.destination(from, &off).to_vec()))
            .collect()
    }

    fn inverse_action(&self, s: &EnvState, s_next: &EnvState) -> Option<ActionVec> {
        if !self.spec.state_box.contains(s_next) {
            return None;
        }
        let d = [s_next[0] - s[0], s_next[1] - s[1]];
        (d[0].hypot(d[1]) <= self.params.move_limit * (1.0 + 1e-12)).then(|| ActionVec::new(d.to_vec()))
    }

    fn boxed_clone(&self) -> Box<dyn Environment> {
        Box::new(self.clone())
    }
}
