//! Line-oriented `key=value` experiment configuration.
//!
//! ```text
//! # 21 servers, cutoff 10
//! agents=21
//! cutoff=10
//! policy=wsls(p=0.005)
//! sweep_s=1,2,3..5
//! ```
//!
//! `#` starts a comment. Keys may use `-` or `_`. Unset keys keep the
//! standard defaults, and later assignments (for example command-line flags
//! applied after a file) override earlier ones.

use crate::error::{Error, Result};
use crate::game::GameConfig;
use crate::harness::ExperimentConfig;
use crate::metrics::{MetricOptions, TaskDistribution, TaskModel};
use crate::policies::PolicySpec;

pub const CONFIG_KEYS: [&str; 12] = [
    "agents",
    "cutoff",
    "rounds",
    "runs",
    "seed",
    "policy",
    "sweep_s",
    "warmup",
    "tasks_per_round",
    "mean_task_time",
    "deadline",
    "task_distribution",
];

/// Unvalidated settings, filled from defaults, files and flags.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigBuilder {
    pub agents: usize,
    pub cutoff: usize,
    pub rounds: usize,
    pub runs: usize,
    pub seed: u64,
    pub policy: PolicySpec,
    pub sweep: Option<Vec<u32>>,
    pub warmup: usize,
    pub task_model: TaskModel,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        ConfigBuilder {
            agents: 21,
            cutoff: 10,
            rounds: 10_000,
            runs: 32,
            seed: 1,
            policy: PolicySpec::default_for("exponential").expect("known policy"),
            sweep: None,
            warmup: 0,
            task_model: TaskModel::default(),
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("has unparsable value `{value}`")))
}

fn real(key: &str, value: &str) -> Result<f64> {
    let v: f64 = number(key, value)?;
    if v.is_nan() {
        return Err(Error::config(
            key,
            format!("has unparsable value `{value}`"),
        ));
    }
    Ok(v)
}

/// Parses `1,2,5` or ranges such as `1..7` (inclusive), or `none`.
pub fn parse_sweep(value: &str) -> Result<Option<Vec<u32>>> {
    let value = value.trim();
    if value.is_empty() || value == "none" {
        return Ok(None);
    }
    let mut out = Vec::new();
    for item in value.split(',') {
        let item = item.trim();
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: u32 = number("sweep_s", lo.trim())?;
            let hi: u32 = number("sweep_s", hi.trim_start_matches('=').trim())?;
            if lo > hi || hi - lo > 64 {
                return Err(Error::config(
                    "sweep_s",
                    format!("has invalid range `{item}`"),
                ));
            }
            out.extend(lo..=hi);
        } else {
            out.push(number("sweep_s", item)?);
        }
    }
    Ok(Some(out))
}

impl ConfigBuilder {
    /// Assigns one key. Unknown keys and unparsable values are errors that
    /// name the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "agents" => self.agents = number(&key, value)?,
            "cutoff" => self.cutoff = number(&key, value)?,
            "rounds" => self.rounds = number(&key, value)?,
            "runs" => self.runs = number(&key, value)?,
            "seed" => self.seed = number(&key, value)?,
            "policy" => {
                self.policy = value.parse().map_err(|e: Error| match e {
                    Error::UnknownPolicy(name) => {
                        Error::config("policy", format!("names unknown policy `{name}`"))
                    }
                    other => Error::config("policy", format!("is invalid: {other}")),
                })?
            }
            "sweep_s" => self.sweep = parse_sweep(value)?,
            "warmup" => self.warmup = number(&key, value)?,
            "tasks_per_round" => self.task_model.tasks_per_round = number(&key, value)?,
            "mean_task_time" => self.task_model.mean_task_time = real(&key, value)?,
            "deadline" => self.task_model.deadline = real(&key, value)?,
            "task_distribution" => {
                self.task_model.distribution = value
                    .parse::<TaskDistribution>()
                    .map_err(|_| Error::config(&key, "must be `exponential` or `deterministic`"))?
            }
            _ => return Err(Error::config(&key, "is not a recognized key")),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", n + 1), "must have the form key=value")
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ExperimentConfig> {
        let game = GameConfig::new(self.agents, self.cutoff, self.rounds)?;
        let config = ExperimentConfig {
            game,
            policy: self.policy.clone(),
            runs: self.runs,
            root_seed: self.seed,
            sweep: self.sweep.clone(),
            metrics: MetricOptions {
                warmup: self.warmup,
                task_model: self.task_model.clone(),
            },
        };
        config.validate()?;
        Ok(config)
    }
}

/// Defaults overridden by the contents of a configuration file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut builder = ConfigBuilder::default();
    builder.apply_text(text)?;
    builder.build()
}

/// Every effective setting as `key=value` pairs, in [`CONFIG_KEYS`] order.
/// Feeding the pairs back through [`parse_config`] reproduces the config.
pub fn describe(config: &ExperimentConfig) -> Vec<(&'static str, String)> {
    let tm = &config.metrics.task_model;
    let sweep = match &config.sweep {
        None => "none".to_string(),
        Some(s) => s.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
    };
    vec![
        ("agents", config.game.num_agents().to_string()),
        ("cutoff", config.game.cutoff().to_string()),
        ("rounds", config.game.num_rounds().to_string()),
        ("runs", config.runs.to_string()),
        ("seed", config.root_seed.to_string()),
        ("policy", config.policy.to_string()),
        ("sweep_s", sweep),
        ("warmup", config.metrics.warmup.to_string()),
        ("tasks_per_round", tm.tasks_per_round.to_string()),
        ("mean_task_time", tm.mean_task_time.to_string()),
        ("deadline", tm.deadline.to_string()),
        ("task_distribution", tm.distribution.to_string()),
    ]
}

pub fn to_text(config: &ExperimentConfig) -> String {
    describe(config)
        .into_iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
}
