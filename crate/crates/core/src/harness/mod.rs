//! Experiment runner: flat `key = value` configs, multi-seed training with
//! on-disk artifacts, cross-run comparison and offline transition fitting.

mod compare;
mod run;

pub use compare::{compare_report, CompareEntry, CompareReport};
pub use run::{fit_transition, run_experiment, FitSummary, RunSummary, SeedRun};

use std::collections::BTreeSet;
use std::path::Path;

use crate::agent::{AgentConfig, Formulation};
use crate::env::{parse_value, EnvKind, EnvParams};
use crate::error::{Error, Result};
use crate::probe::{DEFAULT_ACTION_BINS, DEFAULT_STATE_BINS, DEFAULT_SUPPORT_THRESHOLD};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const KPROBE_FILE: &str = "kprobe.txt";
pub const KPROBE_HISTOGRAM_FILE: &str = "kprobe_hist.csv";
pub const FAILURES_FILE: &str = "failures.txt";

/// Everything needed to reproduce an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algo: Formulation,
    pub env: EnvKind,
    pub seeds: Vec<u64>,
    /// Parallel seed slots; 0 uses the available cores.
    pub workers: usize,
    pub probe_state_bins: usize,
    pub probe_action_bins: usize,
    pub probe_support: u64,
    pub agent: AgentConfig,
    pub env_params: EnvParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algo: Formulation::StateTransition,
            env: EnvKind::GridWorld,
            seeds: (0..10).collect(),
            workers: 0,
            probe_state_bins: DEFAULT_STATE_BINS,
            probe_action_bins: DEFAULT_ACTION_BINS,
            probe_support: DEFAULT_SUPPORT_THRESHOLD,
            agent: AgentConfig::default(),
            env_params: EnvParams::default(),
        }
    }
}

/// `1,2,5` or a half-open range `0..10`, or a mix of both.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (parse_value("seeds", a)?, parse_value("seeds", b)?);
            out.extend(a..b);
        } else {
            out.push(parse_value("seeds", part)?);
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Parses config text on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one override; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "algo" => self.algo = value.parse()?,
            "env" => self.env = value.parse()?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "workers" => self.workers = parse_value(key, value)?,
            "probe_state_bins" => self.probe_state_bins = parse_value(key, value)?,
            "probe_action_bins" => self.probe_action_bins = parse_value(key, value)?,
            "probe_support" => self.probe_support = parse_value(key, value)?,
            _ => {
                if !self.agent.set(key, value)? && !self.env_params.set(key, value)? {
                    return Err(Error::Config(format!("unknown key `{key}`")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("`seeds` is empty".into()));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(Error::Config("`seeds` contains duplicates".into()));
        }
        if self.probe_state_bins == 0 || self.probe_action_bins == 0 {
            return Err(Error::Config("probe bin counts must be positive".into()));
        }
        self.agent.validate()?;
        self.env_params.build(self.env)?;
        Ok(())
    }

    /// Every key with its value, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let seeds = self.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        let mut lines = vec![
            format!("algo = {}", self.algo),
            format!("env = {}", self.env),
            format!("seeds = {seeds}"),
            format!("workers = {}", self.workers),
            format!("probe_state_bins = {}", self.probe_state_bins),
            format!("probe_action_bins = {}", self.probe_action_bins),
            format!("probe_support = {}", self.probe_support),
        ];
        lines.extend(self.agent.entries().into_iter().map(|(k, v)| format!("{k} = {v}")));
        lines.extend(self.env_params.entries().into_iter().map(|(k, v)| format!("{k} = {v}")));
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}
