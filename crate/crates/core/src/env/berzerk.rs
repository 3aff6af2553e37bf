use rand::Rng;

use super::{clip_norm, disc_pattern, fmt_pair, parse_pair, parse_value, ray_disc_entry};
use crate::error::{Error, Result};
use crate::mmrp::{ActionGeometry, ActionVec, BoxBounds, EnvSpec, EnvState, Environment, SimRng, StepOutcome};

/// Off-arena coordinate that dead robots are frozen at.
pub const DEAD_ROBOT: [f64; 2] = [-0.25, -0.25];

/// Agents stop this far short of a wall they run into.
const WALL_GAP: f64 = 1e-4;

/// Patrol loops as `[x_min, y_min, x_max, y_max]`, walked clockwise.
const PATROLS: [[f64; 4]; 3] = [
    [0.42, 0.30, 0.58, 0.70],
    [0.08, 0.60, 0.28, 0.90],
    [0.72, 0.25, 0.95, 0.40],
];
const PATROL_START: [f64; 3] = [0.0, 0.33, 0.66];

#[derive(Clone, Debug, PartialEq)]
pub struct BerzerkParams {
    pub move_limit: f64,
    pub n_robots: usize,
    pub robot_speed: f64,
    pub robot_radius: f64,
    pub exit_pos: [f64; 2],
    pub exit_radius: f64,
    pub kill_reward: f64,
    pub death_reward: f64,
    pub exit_reward: f64,
    pub time_penalty: f64,
    pub max_steps: usize,
    pub gamma: f64,
}

impl Default for BerzerkParams {
    fn default() -> Self {
        BerzerkParams {
            move_limit: 0.15,
            n_robots: 3,
            robot_speed: 0.05,
            robot_radius: 0.05,
            exit_pos: [0.9, 0.15],
            exit_radius: 0.1,
            kill_reward: 5.0,
            death_reward: -10.0,
            exit_reward: 10.0,
            time_penalty: -0.1,
            max_steps: 200,
            gamma: 0.99,
        }
    }
}

impl BerzerkParams {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "move_limit" => self.move_limit = parse_value(key, value)?,
            "n_robots" => self.n_robots = parse_value(key, value)?,
            "robot_speed" => self.robot_speed = parse_value(key, value)?,
            "robot_radius" => self.robot_radius = parse_value(key, value)?,
            "exit_pos" => self.exit_pos = parse_pair(key, value)?,
            "exit_radius" => self.exit_radius = parse_value(key, value)?,
            "kill_reward" => self.kill_reward = parse_value(key, value)?,
            "death_reward" => self.death_reward = parse_value(key, value)?,
            "exit_reward" => self.exit_reward = parse_value(key, value)?,
            "time_penalty" => self.time_penalty = parse_value(key, value)?,
            "max_steps" => self.max_steps = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `berzerk.{key}`"))),
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("move_limit", self.move_limit.to_string()),
            ("n_robots", self.n_robots.to_string()),
            ("robot_speed", self.robot_speed.to_string()),
            ("robot_radius", self.robot_radius.to_string()),
            ("exit_pos", fmt_pair(self.exit_pos)),
            ("exit_radius", self.exit_radius.to_string()),
            ("kill_reward", self.kill_reward.to_string()),
            ("death_reward", self.death_reward.to_string()),
            ("exit_reward", self.exit_reward.to_string()),
            ("time_penalty", self.time_penalty.to_string()),
            ("max_steps", self.max_steps.to_string()),
            ("gamma", self.gamma.to_string()),
        ]
    }
}

/// Vertical wall `x = x`, spanning `y_low ..= y_high`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wall {
    pub x: f64,
    pub y_low: f64,
    pub y_high: f64,
}

const WALLS: [Wall; 2] = [
    Wall {
        x: 0.35,
        y_low: 0.0,
        y_high: 0.55,
    },
    Wall {
        x: 0.65,
        y_low: 0.45,
        y_high: 1.0,
    },
];

fn perimeter(loop_: &[f64; 4]) -> f64 {
    2.0 * ((loop_[2] - loop_[0]) + (loop_[3] - loop_[1]))
}

/// Position at arc length `u` along a clockwise loop starting bottom-left.
fn loop_point(loop_: &[f64; 4], u: f64) -> [f64; 2] {
    let [x0, y0, x1, y1] = *loop_;
    let (w, h) = (x1 - x0, y1 - y0);
    let u = u.rem_euclid(perimeter(loop_));
    if u < h {
        [x0, y0 + u]
    } else if u < h + w {
        [x0 + (u - h), y1]
    } else if u < 2.0 * h + w {
        [x1, y1 - (u - h - w)]
    } else {
        [x1 - (u - 2.0 * h - w), y0]
    }
}

/// Inverse of [`loop_point`] for a point on (or next to) the loop.
fn loop_arc(loop_: &[f64; 4], p: [f64; 2]) -> f64 {
    let [x0, y0, x1, y1] = *loop_;
    let (w, h) = (x1 - x0, y1 - y0);
    let sides = [
        ((p[0] - x0).abs(), (p[1] - y0).clamp(0.0, h)),
        ((p[1] - y1).abs(), h + (p[0] - x0).clamp(0.0, w)),
        ((p[0] - x1).abs(), h + w + (y1 - p[1]).clamp(0.0, h)),
        ((p[1] - y0).abs(), 2.0 * h + w + (x1 - p[0]).clamp(0.0, w)),
    ];
    let mut best = sides[0];
    for s in &sides[1..] {
        if s.0 < best.0 {
            best = *s;
        }
    }
    best.1
}

/// Simplified top-down shooter: walk to the exit past patrolling robots,
/// shooting along the direction of travel.
#[derive(Clone, Debug)]
pub struct BerzerkWorld {
    params: BerzerkParams,
    spec: EnvSpec,
    agent: [f64; 2],
    /// `None` for a dead robot.
    robots: Vec<Option<[f64; 2]>>,
}

impl BerzerkWorld {
    pub fn new(params: BerzerkParams) -> Result<Self> {
        let p = &params;
        if p.n_robots > PATROLS.len() {
            return Err(Error::Config(format!("berzerk supports at most {} robots", PATROLS.len())));
        }
        if !(p.move_limit > 0.0 && p.robot_speed >= 0.0 && p.robot_radius > 0.0 && p.exit_radius > 0.0) {
            return Err(Error::Config("berzerk sizes must be positive".into()));
        }
        if !(p.gamma > 0.0 && p.gamma < 1.0) || p.max_steps == 0 {
            return Err(Error::Config("berzerk needs gamma in (0,1) and max_steps >= 1".into()));
        }
        let width = 4 + 2 * p.n_robots;
        let mut low = vec![0.0; width];
        let high = vec![1.0; width];
        for v in &mut low[2..2 + 2 * p.n_robots] {
            *v = DEAD_ROBOT[0].min(DEAD_ROBOT[1]);
        }
        let spec = EnvSpec {
            name: "berzerk".into(),
            state_box: BoxBounds::new(low, high),
            action_box: BoxBounds::uniform(2, -p.move_limit, p.move_limit),
            gamma: p.gamma,
            max_episode_steps: p.max_steps,
            action_geometry: ActionGeometry::Displacement { limit: p.move_limit },
        };
        let mut world = BerzerkWorld {
            params,
            spec,
            agent: [0.1, 0.1],
            robots: Vec::new(),
        };
        world.place_robots();
        Ok(world)
    }

    pub fn params(&self) -> &BerzerkParams {
        &self.params
    }

    pub fn walls() -> &'static [Wall] {
        &WALLS
    }

    pub fn robots(&self) -> &[Option<[f64; 2]>] {
        &self.robots
    }

    fn place_robots(&mut self) {
        self.robots = (0..self.params.n_robots)
            .map(|i| Some(loop_point(&PATROLS[i], PATROL_START[i] * perimeter(&PATROLS[i]))))
            .collect();
    }

    /// Rebuilds the full simulator state from a state vector.
    pub fn load_state(&mut self, s: &EnvState) {
        assert_eq!(s.width(), self.spec.state_width(), "berzerk state width");
        self.agent = [s[0], s[1]];
        self.robots = (0..self.params.n_robots)
            .map(|i| {
                let p = [s[2 + 2 * i], s[3 + 2 * i]];
                (p != DEAD_ROBOT).then_some(p)
            })
            .collect();
    }

    /// Places robots and the agent directly; used by tests.
    pub fn set_layout(&mut self, agent: [f64; 2], robots: Vec<Option<[f64; 2]>>) {
        assert_eq!(robots.len(), self.params.n_robots, "robot count");
        self.agent = agent;
        self.robots = robots;
    }

    /// Moves from `p` by `a`, stopping short of walls and the arena edge.
    fn motion(p: [f64; 2], a: [f64; 2]) -> [f64; 2] {
        let mut q = [(p[0] + a[0]).clamp(0.0, 1.0), (p[1] + a[1]).clamp(0.0, 1.0)];
        for wall in &WALLS {
            let dx = q[0] - p[0];
            if dx == 0.0 {
                continue;
            }
            let crosses = (p[0] - wall.x) * (q[0] - wall.x) <= 0.0 && p[0] != wall.x;
            if !crosses {
                continue;
            }
            let t = (wall.x - p[0]) / dx;
            let y = p[1] + t * (q[1] - p[1]);
            if y < wall.y_low || y > wall.y_high {
                continue;
            }
            let stop_x = wall.x - WALL_GAP * dx.signum();
            let t_stop = ((stop_x - p[0]) / dx).max(0.0);
            q = [p[0] + t_stop * dx, p[1] + t_stop * (q[1] - p[1])];
        }
        q
    }

    /// Distance along the unit ray `p + t·dir` to the first wall, if any.
    fn wall_distance(p: [f64; 2], dir: [f64; 2]) -> f64 {
        let mut best = f64::INFINITY;
        for wall in &WALLS {
            if dir[0] == 0.0 {
                continue;
            }
            let t = (wall.x - p[0]) / dir[0];
            if t < 0.0 {
                continue;
            }
            let y = p[1] + t * dir[1];
            if y >= wall.y_low && y <= wall.y_high {
                best = best.min(t);
            }
        }
        best
    }

    fn touching_robot(&self) -> bool {
        let r = self.params.robot_radius;
        self.robots
            .iter()
            .flatten()
            .any(|c| (c[0] - self.agent[0]).hypot(c[1] - self.agent[1]) <= r)
    }

    fn advance_robots(&mut self) {
        let speed = self.params.robot_speed;
        for (i, robot) in self.robots.iter_mut().enumerate() {
            if let Some(p) = robot {
                let u = loop_arc(&PATROLS[i], *p);
                *p = loop_point(&PATROLS[i], u + speed);
            }
        }
    }
}

impl Environment for BerzerkWorld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut SimRng) -> EnvState {
        self.agent = [rng.random_range(0.05..=0.2), rng.random_range(0.05..=0.2)];
        self.place_robots();
        self.state()
    }

    fn state(&self) -> EnvState {
        let mut v = Vec::with_capacity(self.spec.state_width());
        v.extend_from_slice(&self.agent);
        for r in &self.robots {
            v.extend_from_slice(&r.unwrap_or(DEAD_ROBOT));
        }
        v.extend_from_slice(&self.params.exit_pos);
        EnvState::new(v)
    }

    fn step(&mut self, action: &ActionVec) -> StepOutcome {
        assert_eq!(action.width(), 2, "berzerk action width");
        let p = self.params.clone();
        let a = clip_norm([action[0], action[1]], p.move_limit);
        let from = self.agent;
        self.agent = Self::motion(from, a);
        let mut reward = p.time_penalty;

        let norm = a[0].hypot(a[1]);
        if norm > 0.0 {
            let dir = [a[0] / norm, a[1] / norm];
            let wall_t = Self::wall_distance(self.agent, dir);
            let mut hit: Option<(usize, f64)> = None;
            for (i, robot) in self.robots.iter().enumerate() {
                if let Some(c) = robot {
                    // a robot the agent walked into is not shot
                    if let Some(t) = ray_disc_entry(self.agent, dir, *c, p.robot_radius) {
                        if t > 0.0 && t < wall_t && hit.is_none_or(|(_, best)| t < best) {
                            hit = Some((i, t));
                        }
                    }
                }
            }
            if let Some((i, _)) = hit {
                self.robots[i] = None;
                reward += p.kill_reward;
            }
        }

        let mut done = false;
        if self.touching_robot() {
            reward += p.death_reward;
            done = true;
        } else {
            self.advance_robots();
            if self.touching_robot() {
                reward += p.death_reward;
                done = true;
            }
        }
        if !done && (self.agent[0] - p.exit_pos[0]).hypot(self.agent[1] - p.exit_pos[1]) <= p.exit_radius {
            reward += p.exit_reward;
            done = true;
        }
        StepOutcome {
            s_next: self.state(),
            reward,
            done,
            applied_action: ActionVec::new(vec![self.agent[0] - from[0], self.agent[1] - from[1]]),
        }
    }

    fn project_action(&self, action: &ActionVec) -> ActionVec {
        let boxed = self.spec.action_box.clamp(action);
        ActionVec::new(clip_norm([boxed[0], boxed[1]], self.params.move_limit).to_vec())
    }

    fn feasible_candidates(&self, s: &EnvState, n: usize) -> Vec<EnvState> {
        let mut scratch = self.clone();
        disc_pattern(self.params.move_limit, n)
            .into_iter()
            .map(|off| {
                scratch.load_state(s);
                scratch.step(&ActionVec::new(off.to_vec())).s_next
            })
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmrp::{rollout, sim_rng};

    fn world() -> BerzerkWorld {
        BerzerkWorld::new(BerzerkParams::default()).unwrap()
    }

    #[test]
    fn state_layout() {
        let w = world();
        let s = w.state();
        assert_eq!(s.width(), 10);
        assert_eq!(&s[8..10], &[0.9, 0.15]);
        assert!(w.spec().state_box.contains(&s));
    }

    #[test]
    fn shooting_a_robot_in_line() {
        let mut w = world();
        w.set_layout([0.4, 0.05], vec![Some([0.55, 0.2]), Some([0.1, 0.8]), Some([0.8, 0.3])]);
        // move diagonally towards the robot, the bullet continues along the same line
        let out = w.step(&ActionVec::new(vec![0.05, 0.05]));
        assert!(out.reward >= 5.0 - 0.1 - 1e-12, "{}", out.reward);
        assert_eq!(&out.s_next[2..4], &DEAD_ROBOT);
        assert!(!out.done);
    }

    #[test]
    fn walls_stop_bullets() {
        let mut w = world();
        // robot on the far side of the first wall
        w.set_layout([0.2, 0.3], vec![Some([0.5, 0.3]), Some([0.1, 0.8]), Some([0.8, 0.3])]);
        let out = w.step(&ActionVec::new(vec![0.1, 0.0]));
        assert!((out.reward + 0.1).abs() < 1e-12);
        assert_ne!(&out.s_next[2..4], &DEAD_ROBOT);
    }

    #[test]
    fn null_action_moves_robots_only() {
        let mut w = world();
        w.set_layout([0.2, 0.3], vec![Some([0.42, 0.3]), Some([0.08, 0.6]), Some([0.72, 0.25])]);
        let before = w.state();
        let out = w.step(&ActionVec::new(vec![0.0, 0.0]));
        assert!((out.reward + 0.1).abs() < 1e-12);
        assert_eq!(&out.s_next[0..2], &before[0..2]);
        // clockwise: up the left side first
        assert!((out.s_next[2] - 0.42).abs() < 1e-12 && (out.s_next[3] - 0.35).abs() < 1e-12);
    }

    #[test]
    fn walking_into_a_robot_is_fatal() {
        let mut w = world();
        w.set_layout([0.08, 0.52], vec![Some([0.5, 0.5]), Some([0.08, 0.6]), Some([0.8, 0.3])]);
        // moving away from the robot leaves the bullet behind it
        let out = w.step(&ActionVec::new(vec![0.0, 0.1]));
        assert!(out.done);
        assert!((out.reward - (-10.0 - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn walls_block_motion() {
        let mut w = world();
        w.set_layout([0.3, 0.2], vec![Some([0.5, 0.5]), Some([0.1, 0.8]), Some([0.8, 0.3])]);
        let out = w.step(&ActionVec::new(vec![0.15, 0.0]));
        assert!((out.s_next[0] - (0.35 - WALL_GAP)).abs() < 1e-12);
        assert!((out.applied_action[0] - (0.05 - WALL_GAP)).abs() < 1e-12);
    }

    #[test]
    fn agent_never_enters_walls_or_leaves_arena() {
        let mut w = world();
        let mut rng = sim_rng(3);
        let mut steps = 0;
        for ep in 0..40 {
            let mut arng = sim_rng(1000 + ep);
            let episode = rollout(
                &mut w,
                |_: &dyn Environment, _: &EnvState| {
                    ActionVec::new(vec![arng.random_range(-0.15..0.15), arng.random_range(-0.15..0.15)])
                },
                200,
                rng.random(),
            )
            .unwrap();
            for s in &episode.samples {
                steps += 1;
                let (x, y) = (s.s_next[0], s.s_next[1]);
                assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
                let (px, py) = (s.s[0], s.s[1]);
                for wall in BerzerkWorld::walls() {
                    if y >= wall.y_low && y <= wall.y_high {
                        assert!((x - wall.x).abs() >= WALL_GAP * 0.5, "agent at {x},{y}");
                    }
                    if (px - wall.x) * (x - wall.x) < 0.0 {
                        let cross_y = py + (wall.x - px) / (x - px) * (y - py);
                        assert!(cross_y < wall.y_low || cross_y > wall.y_high, "passed through a wall");
                    }
                }
            }
        }
        assert!(steps > 100);
    }

    #[test]
    fn robot_loops_roundtrip() {
        for l in &PATROLS {
            let per = perimeter(l);
            for k in 0..40 {
                let u = per * k as f64 / 40.0;
                let back = loop_arc(l, loop_point(l, u));
                assert!((back - u).abs() < 1e-9 || (back - u).abs() > per - 1e-9, "{u} {back}");
            }
        }
    }

    #[test]
    fn candidates_replay_through_the_inverse_action() {
        let mut w = world();
        let mut rng = sim_rng(8);
        let s = w.reset(&mut rng);
        let cands = w.feasible_candidates(&s, 64);
        assert_eq!(cands.len(), 64);
        let mut replayed = 0;
        for c in &cands {
            let a = w.inverse_action(&s, c).expect("candidate within reach");
            let mut h = w.clone();
            h.load_state(&s);
            if &h.step(&a).s_next == c {
                replayed += 1;
            }
        }
        // only a move truncated to nothing by a wall can lose its bullet
        assert!(replayed >= 63, "{replayed}");
        assert_eq!(w.feasible_candidates(&s, 1)[0][0..2], s[0..2]);
    }

    #[test]
    fn episodes_are_deterministic() {
        let run = || {
            let mut w = world();
            let mut arng = sim_rng(4);
            rollout(
                &mut w,
                move |_: &dyn Environment, _: &EnvState| {
                    ActionVec::new(vec![arng.random_range(-0.15..0.15), arng.random_range(-0.15..0.15)])
                },
                200,
                17,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }
}
