//! Monte Carlo experiment orchestration.
//!
//! An experiment is a policy, a game configuration and a number of
//! independent runs, optionally repeated for several memory sizes `s`
//! (reported by the control parameter `α = 2^s / M`). Every run's seed is
//! hashed from the root seed, the policy name, `s` and the run index, so the
//! report does not depend on how many worker threads execute the runs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{run_game, GameConfig, MAX_MEMORY};
use crate::metrics::{self, MetricOptions, RewardAudit};
use crate::policies::PolicySpec;
use crate::rng;

/// Memory sizes swept when none are given.
pub const DEFAULT_SWEEP: [u32; 7] = [1, 2, 3, 4, 5, 6, 7];

pub fn alpha(memory: u32, num_agents: usize) -> f64 {
    2f64.powi(memory as i32) / num_agents as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub game: GameConfig,
    /// Shared by every agent of every run.
    pub policy: PolicySpec,
    pub runs: usize,
    pub root_seed: u64,
    pub sweep: Option<Vec<u32>>,
    pub metrics: MetricOptions,
}

impl ExperimentConfig {
    /// The standard setting (21 servers, cutoff 10, 10000 rounds, 32 runs)
    /// for `policy`.
    pub fn standard(policy: PolicySpec) -> Self {
        ExperimentConfig {
            game: GameConfig::standard(),
            policy,
            runs: 32,
            root_seed: 1,
            sweep: None,
            metrics: MetricOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return Err(Error::config(
                    "sweep_s",
                    "must list at least one memory size",
                ));
            }
            if let Some(bad) = sweep.iter().find(|&&s| s == 0 || s > MAX_MEMORY) {
                return Err(Error::config(
                    "sweep_s",
                    format!("value {bad} outside 1..={MAX_MEMORY}"),
                ));
            }
        }
        if self.metrics.warmup + 2 > self.game.num_rounds() {
            return Err(Error::config(
                "warmup",
                format!(
                    "must leave at least two measured rounds (rounds = {})",
                    self.game.num_rounds()
                ),
            ));
        }
        self.metrics.task_model.validate()
    }
}

/// Metrics of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub run_index: usize,
    pub seed: u64,
    pub volatility: f64,
    pub mean_attendance: f64,
    pub population_utility: f64,
    pub utility_per_agent: Vec<f64>,
    pub qoe_probability: f64,
    pub audit: RewardAudit,
}

/// Mean and standard error over runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    /// Standard error is 0 for a single value.
    pub fn of(values: &[f64]) -> MeanSe {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return MeanSe { mean, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        MeanSe {
            mean,
            se: (var / n).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub volatility: MeanSe,
    pub mean_attendance: MeanSe,
    pub utility: MeanSe,
    pub qoe_probability: MeanSe,
}

impl Summary {
    pub fn of(runs: &[RunResult]) -> Summary {
        let pick = |f: fn(&RunResult) -> f64| MeanSe::of(&runs.iter().map(f).collect::<Vec<_>>());
        Summary {
            volatility: pick(|r| r.volatility),
            mean_attendance: pick(|r| r.mean_attendance),
            utility: pick(|r| r.population_utility),
            qoe_probability: pick(|r| r.qoe_probability),
        }
    }
}

/// All runs at one memory size.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    /// The spec actually played (memory size applied).
    pub policy: PolicySpec,
    pub memory: Option<u32>,
    pub alpha: Option<f64>,
    /// Memoryless rule evaluated once and copied to this α key.
    pub replicated: bool,
    pub runs: Vec<RunResult>,
    pub summary: Summary,
}

impl SweepPoint {
    pub fn audit(&self) -> RewardAudit {
        let mut total = RewardAudit::default();
        for run in &self.runs {
            total.merge(&run.audit);
        }
        total
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub points: Vec<SweepPoint>,
}

impl ExperimentReport {
    /// Point with the lowest mean volatility (first one on ties).
    pub fn best_point(&self) -> &SweepPoint {
        self.points
            .iter()
            .reduce(|best, p| {
                if p.summary.volatility.mean < best.summary.volatility.mean {
                    p
                } else {
                    best
                }
            })
            .expect("report has at least one point")
    }
}

/// One evaluated configuration point before its runs are executed.
struct PointPlan {
    spec: PolicySpec,
    memory: Option<u32>,
    alpha: Option<f64>,
    /// Index of the point whose runs this one copies.
    source: Option<usize>,
}

fn plan(config: &ExperimentConfig) -> Vec<PointPlan> {
    let m = config.game.num_agents();
    match (&config.sweep, config.policy.is_memoryless()) {
        (None, _) => vec![PointPlan {
            spec: config.policy.clone(),
            memory: config.policy.memory(),
            alpha: config.policy.memory().map(|s| alpha(s, m)),
            source: None,
        }],
        (Some(sweep), false) => sweep
            .iter()
            .map(|&s| PointPlan {
                spec: config.policy.with_memory(s),
                memory: Some(s),
                alpha: Some(alpha(s, m)),
                source: None,
            })
            .collect(),
        (Some(sweep), true) => sweep
            .iter()
            .enumerate()
            .map(|(i, &s)| PointPlan {
                spec: config.policy.clone(),
                memory: None,
                alpha: Some(alpha(s, m)),
                source: (i > 0).then_some(0),
            })
            .collect(),
    }
}

/// Runs one seeded game and evaluates it.
pub fn run_single(
    game: &GameConfig,
    spec: &PolicySpec,
    options: &MetricOptions,
    run_index: usize,
    seed: u64,
) -> Result<RunResult> {
    let trace = run_game(game, std::slice::from_ref(spec), seed)?;
    let mut metrics_rng = rng::stream_rng(seed, rng::METRICS_STREAM);
    let report = metrics::evaluate(&trace, options, &mut metrics_rng)?;
    Ok(RunResult {
        run_index,
        seed,
        volatility: report.volatility,
        mean_attendance: report.mean_attendance,
        population_utility: report.population_utility,
        utility_per_agent: report.avg_utility_per_agent,
        qoe_probability: report.qoe_probability,
        audit: metrics::audit_rewards(&trace),
    })
}

pub fn run_seed(config: &ExperimentConfig, spec: &PolicySpec, run_index: usize) -> u64 {
    rng::derive_run_seed(
        config.root_seed,
        spec.name(),
        spec.memory().unwrap_or(0),
        run_index as u64,
    )
}

/// Executes several experiments over one shared pool of work items.
/// Results come back in input order for any thread count.
pub fn run_experiments(configs: &[ExperimentConfig]) -> Result<Vec<ExperimentReport>> {
    for c in configs {
        c.validate()?;
    }
    let plans: Vec<Vec<PointPlan>> = configs.iter().map(plan).collect();
    let work: Vec<(usize, usize, usize)> = plans
        .iter()
        .enumerate()
        .flat_map(|(e, points)| {
            points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.source.is_none())
                .flat_map(move |(p, _)| (0..configs[e].runs).map(move |r| (e, p, r)))
        })
        .collect();
    let results: Vec<RunResult> = work
        .par_iter()
        .map(|&(e, p, r)| {
            let config = &configs[e];
            let spec = &plans[e][p].spec;
            run_single(
                &config.game,
                spec,
                &config.metrics,
                r,
                run_seed(config, spec, r),
            )
        })
        .collect::<Result<_>>()?;

    let mut results = results.into_iter();
    let mut reports = Vec::with_capacity(configs.len());
    for (config, points) in configs.iter().zip(plans) {
        let mut done: Vec<SweepPoint> = Vec::with_capacity(points.len());
        for point in points {
            let runs = match point.source {
                Some(src) => done[src].runs.clone(),
                None => results.by_ref().take(config.runs).collect(),
            };
            let summary = Summary::of(&runs);
            done.push(SweepPoint {
                policy: point.spec,
                memory: point.memory,
                alpha: point.alpha,
                replicated: point.source.is_some()
                    || (config.sweep.is_some() && point.memory.is_none()),
                runs,
                summary,
            });
        }
        reports.push(ExperimentReport {
            config: config.clone(),
            points: done,
        });
    }
    Ok(reports)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Ok(run_experiments(std::slice::from_ref(config))?.remove(0))
}

/// Volatility curve over memory sizes, keyed by α.
pub fn sweep_alpha(
    config: &ExperimentConfig,
    memory_sizes: &[u32],
) -> Result<Vec<(f64, SweepPoint)>> {
    let config = ExperimentConfig {
        sweep: Some(memory_sizes.to_vec()),
        ..config.clone()
    };
    Ok(run_experiment(&config)?
        .points
        .into_iter()
        .map(|p| (p.alpha.expect("swept points carry α"), p))
        .collect())
}

/// The standard parameterization of every rule: seven learners plus the
/// random baseline, with Q-learning in both its action and strategy form.
pub fn standard_grid() -> Vec<PolicySpec> {
    [
        "seminal",
        "exponential",
        "qlearn-action",
        "qlearn-strategy",
        "adaptive",
        "wsls",
        "rotherev",
        "automata",
        "random",
    ]
    .iter()
    .map(|name| PolicySpec::default_for(name).expect("known policy"))
    .collect()
}

/// One line of a policy comparison, taken at the policy's best sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicySummary {
    pub policy: PolicySpec,
    pub alpha: Option<f64>,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub reports: Vec<ExperimentReport>,
    /// Sorted by best mean volatility, lowest first.
    pub ranking: Vec<PolicySummary>,
}

/// Runs `base` once per policy and ranks the policies by volatility.
pub fn compare_policies(base: &ExperimentConfig, policies: &[PolicySpec]) -> Result<Comparison> {
    let configs: Vec<ExperimentConfig> = policies
        .iter()
        .map(|p| ExperimentConfig {
            policy: p.clone(),
            ..base.clone()
        })
        .collect();
    let reports = run_experiments(&configs)?;
    let mut ranking: Vec<PolicySummary> = reports
        .iter()
        .map(|r| {
            let best = r.best_point();
            PolicySummary {
                policy: best.policy.clone(),
                alpha: best.alpha,
                summary: best.summary,
            }
        })
        .collect();
    ranking.sort_by(|a, b| {
        a.summary
            .volatility
            .mean
            .total_cmp(&b.summary.volatility.mean)
    });
    Ok(Comparison { reports, ranking })
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
