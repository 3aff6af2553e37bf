use crate::behavior::{Collection, Granularity};
use crate::env::parse_value;
use crate::error::{Error, Result};

/// Learner hyperparameters and the data-collection schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    /// Discount; `None` uses the environment's.
    pub gamma: Option<f64>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub soft_eps: f64,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub replay_capacity: usize,
    /// Behaviour-policy samples stored before the first gradient step.
    pub prefill: usize,
    pub max_gradient_steps: usize,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Episodes collected after each evaluation.
    pub collect_episodes: usize,
    pub projection_candidates: usize,
    /// Exploration noise as a fraction of the output box half-width.
    pub exploration_sigma: f64,
    /// Evaluations without a new best mean return before stopping; 0 disables.
    pub patience: usize,
    pub granularity: Granularity,
    pub collection: Collection,
    /// Fit the inverse transition model even when the environment can
    /// invert transitions itself.
    pub train_transition_model: bool,
    pub transition_epochs: usize,
    pub transition_batch: usize,
    pub transition_lr: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: None,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            soft_eps: 0.005,
            batch_size: 64,
            hidden: vec![64, 64],
            replay_capacity: 100_000,
            prefill: 5_000,
            max_gradient_steps: 20_000,
            eval_interval: 500,
            eval_episodes: 10,
            collect_episodes: 10,
            projection_candidates: 64,
            exploration_sigma: 0.1,
            patience: 20,
            granularity: Granularity::Continuous,
            collection: Collection::NoisyActor,
            train_transition_model: false,
            transition_epochs: 50,
            transition_batch: 128,
            transition_lr: 1e-3,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")))
            }
        };
        positive("actor_lr", self.actor_lr)?;
        positive("critic_lr", self.critic_lr)?;
        positive("transition_lr", self.transition_lr)?;
        if !(self.soft_eps > 0.0 && self.soft_eps <= 1.0) {
            return Err(Error::Config(format!("`soft_eps` must lie in (0, 1], got {}", self.soft_eps)));
        }
        if let Some(g) = self.gamma {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Config(format!("`gamma` must lie in [0, 1), got {g}")));
            }
        }
        if !(self.exploration_sigma.is_finite() && self.exploration_sigma >= 0.0) {
            return Err(Error::Config("`exploration_sigma` must be non-negative".into()));
        }
        for (name, v) in [
            ("batch_size", self.batch_size),
            ("replay_capacity", self.replay_capacity),
            ("prefill", self.prefill),
            ("eval_interval", self.eval_interval),
            ("eval_episodes", self.eval_episodes),
            ("projection_candidates", self.projection_candidates),
            ("transition_batch", self.transition_batch),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("`{name}` must be positive")));
            }
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config("`hidden` needs at least one positive layer width".into()));
        }
        Ok(())
    }

    /// Applies one override; `Ok(false)` for keys this config does not own.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "gamma" => {
                self.gamma = match value.trim() {
                    "env" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "actor_lr" => self.actor_lr = parse_value(key, value)?,
            "critic_lr" => self.critic_lr = parse_value(key, value)?,
            "soft_eps" => self.soft_eps = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "hidden" => {
                self.hidden = value
                    .split(',')
                    .map(|v| parse_value::<usize>(key, v))
                    .collect::<Result<Vec<_>>>()?
            }
            "replay_capacity" => self.replay_capacity = parse_value(key, value)?,
            "prefill" => self.prefill = parse_value(key, value)?,
            "max_gradient_steps" => self.max_gradient_steps = parse_value(key, value)?,
            "eval_interval" => self.eval_interval = parse_value(key, value)?,
            "eval_episodes" => self.eval_episodes = parse_value(key, value)?,
            "collect_episodes" => self.collect_episodes = parse_value(key, value)?,
            "projection_candidates" => self.projection_candidates = parse_value(key, value)?,
            "exploration_sigma" => self.exploration_sigma = parse_value(key, value)?,
            "patience" => self.patience = parse_value(key, value)?,
            "granularity" => self.granularity = value.parse()?,
            "behavior_policy" => self.collection = value.parse()?,
            "train_transition_model" => self.train_transition_model = parse_value(key, value)?,
            "transition_epochs" => self.transition_epochs = parse_value(key, value)?,
            "transition_batch" => self.transition_batch = parse_value(key, value)?,
            "transition_lr" => self.transition_lr = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("gamma", self.gamma.map_or("env".to_string(), |g| g.to_string())),
            ("actor_lr", self.actor_lr.to_string()),
            ("critic_lr", self.critic_lr.to_string()),
            ("soft_eps", self.soft_eps.to_string()),
            ("batch_size", self.batch_size.to_string()),
            (
                "hidden",
                self.hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("replay_capacity", self.replay_capacity.to_string()),
            ("prefill", self.prefill.to_string()),
            ("max_gradient_steps", self.max_gradient_steps.to_string()),
            ("eval_interval", self.eval_interval.to_string()),
            ("eval_episodes", self.eval_episodes.to_string()),
            ("collect_episodes", self.collect_episodes.to_string()),
            ("projection_candidates", self.projection_candidates.to_string()),
            ("exploration_sigma", self.exploration_sigma.to_string()),
            ("patience", self.patience.to_string()),
            ("granularity", self.granularity.to_string()),
            ("behavior_policy", self.collection.name().to_string()),
            ("train_transition_model", self.train_transition_model.to_string()),
            ("transition_epochs", self.transition_epochs.to_string()),
            ("transition_batch", self.transition_batch.to_string()),
            ("transition_lr", self.transition_lr.to_string()),
        ]
    }
}
