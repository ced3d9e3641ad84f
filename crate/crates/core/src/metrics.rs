//! Evaluation quantities: volatility, per-agent utility and the probability
//! that an active server finishes its share of the round's tasks in time.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::game::{Action, GameTrace};

/// Service-time law for a single offloaded task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TaskDistribution {
    #[default]
    Exponential,
    /// Every task takes exactly the mean time.
    Deterministic,
}

impl TaskDistribution {
    pub fn name(self) -> &'static str {
        match self {
            TaskDistribution::Exponential => "exponential",
            TaskDistribution::Deterministic => "deterministic",
        }
    }
}

impl fmt::Display for TaskDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TaskDistribution {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "exponential" => Ok(TaskDistribution::Exponential),
            "deterministic" => Ok(TaskDistribution::Deterministic),
            _ => Err(()),
        }
    }
}

/// The batch of tasks that arrives every round.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskModel {
    pub tasks_per_round: usize,
    /// Mean service time of one task, seconds.
    pub mean_task_time: f64,
    /// Deadline for a server's whole share, seconds.
    pub deadline: f64,
    pub distribution: TaskDistribution,
}

impl Default for TaskModel {
    fn default() -> Self {
        TaskModel {
            tasks_per_round: 50,
            mean_task_time: 1.0,
            deadline: 10.0,
            distribution: TaskDistribution::Exponential,
        }
    }
}

impl TaskModel {
    pub fn validate(&self) -> Result<()> {
        if self.tasks_per_round == 0 {
            return Err(Error::config("tasks_per_round", "must be at least 1"));
        }
        if !(self.mean_task_time > 0.0 && self.mean_task_time.is_finite()) {
            return Err(Error::config("mean_task_time", "must be positive"));
        }
        if self.deadline.is_nan() || self.deadline <= 0.0 {
            return Err(Error::config("deadline", "must be positive"));
        }
        Ok(())
    }
}

/// Options shared by every metric.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MetricOptions {
    /// Leading rounds excluded from every statistic.
    pub warmup: usize,
    pub task_model: TaskModel,
}

/// All metrics of one trace.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub volatility: f64,
    pub mean_attendance: f64,
    pub avg_utility_per_agent: Vec<f64>,
    pub population_utility: f64,
    pub qoe_probability: f64,
    pub warmup_rounds: usize,
}

fn measured<T>(series: &[T], warmup: usize, min_len: usize) -> Result<&[T]> {
    if series.len() < warmup + min_len {
        return Err(Error::invalid(format!(
            "series of {} rounds is too short for warmup {warmup}",
            series.len()
        )));
    }
    Ok(&series[warmup..])
}

/// Sample variance of the attendance after `warmup`, divided by the number
/// of agents.
pub fn volatility(attendance: &[usize], num_agents: usize, warmup: usize) -> Result<f64> {
    if num_agents == 0 {
        return Err(Error::invalid("population must be positive"));
    }
    let window = measured(attendance, warmup, 2)?;
    let n = window.len() as f64;
    let mean = window.iter().map(|&c| c as f64).sum::<f64>() / n;
    let ss: f64 = window.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
    Ok(ss / (n - 1.0) / num_agents as f64)
}

pub fn mean_attendance(attendance: &[usize], warmup: usize) -> Result<f64> {
    let window = measured(attendance, warmup, 1)?;
    Ok(window.iter().map(|&c| c as f64).sum::<f64>() / window.len() as f64)
}

/// Per-agent mean reward per round, and its population average.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityReport {
    pub per_agent: Vec<f64>,
    pub population_mean: f64,
}

pub fn average_utility(trace: &GameTrace, warmup: usize) -> Result<UtilityReport> {
    let window = measured(&trace.outcomes, warmup, 1)?;
    let m = trace.config.num_agents();
    let mut totals = vec![0.0; m];
    for outcome in window {
        for (t, r) in totals.iter_mut().zip(&outcome.rewards) {
            *t += r;
        }
    }
    let rounds = window.len() as f64;
    let per_agent: Vec<f64> = totals.into_iter().map(|t| t / rounds).collect();
    let population_mean = per_agent.iter().sum::<f64>() / m as f64;
    Ok(UtilityReport {
        per_agent,
        population_mean,
    })
}

/// Task counts per active server when `tasks` are dealt round-robin to
/// `active` servers: the first `tasks % active` servers get one extra.
pub fn server_loads(tasks: usize, active: usize) -> Vec<usize> {
    if active == 0 {
        return Vec::new();
    }
    let (base, extra) = (tasks / active, tasks % active);
    (0..active).map(|i| base + usize::from(i < extra)).collect()
}

/// Fraction of active servers meeting the deadline, averaged over measured
/// rounds. A round with no active server contributes 0.
pub fn qoe_from_attendance<R: Rng + ?Sized>(
    attendance: &[usize],
    model: &TaskModel,
    warmup: usize,
    rng: &mut R,
) -> Result<f64> {
    model.validate()?;
    let window = measured(attendance, warmup, 1)?;
    let exp = Exp::new(1.0 / model.mean_task_time)
        .map_err(|e| Error::invalid(format!("task time distribution: {e}")))?;
    let mut total = 0.0;
    for &active in window {
        if active == 0 {
            continue;
        }
        let mut on_time = 0usize;
        for load in server_loads(model.tasks_per_round, active) {
            let tau: f64 = match model.distribution {
                TaskDistribution::Exponential => (0..load).map(|_| exp.sample(rng)).sum(),
                TaskDistribution::Deterministic => load as f64 * model.mean_task_time,
            };
            if tau <= model.deadline {
                on_time += 1;
            }
        }
        total += on_time as f64 / active as f64;
    }
    Ok(total / window.len() as f64)
}

pub fn qoe_probability<R: Rng + ?Sized>(
    trace: &GameTrace,
    model: &TaskModel,
    warmup: usize,
    rng: &mut R,
) -> Result<f64> {
    qoe_from_attendance(&trace.attendance_series(), model, warmup, rng)
}

pub fn evaluate<R: Rng + ?Sized>(
    trace: &GameTrace,
    options: &MetricOptions,
    rng: &mut R,
) -> Result<MetricReport> {
    let attendance = trace.attendance_series();
    let m = trace.config.num_agents();
    let utility = average_utility(trace, options.warmup)?;
    Ok(MetricReport {
        volatility: volatility(&attendance, m, options.warmup)?,
        mean_attendance: mean_attendance(&attendance, options.warmup)?,
        avg_utility_per_agent: utility.per_agent,
        population_utility: utility.population_mean,
        qoe_probability: qoe_from_attendance(
            &attendance,
            &options.task_model,
            options.warmup,
            rng,
        )?,
        warmup_rounds: options.warmup,
    })
}

/// Exhaustive per-round check of the reward rules over a whole trace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewardAudit {
    pub rounds: usize,
    /// Rounds whose rewarded-agent count differs from the size of the
    /// winning side, or whose attendance disagrees with the action matrix.
    pub violations: usize,
    pub max_winners: usize,
}

impl RewardAudit {
    pub fn merge(&mut self, other: &RewardAudit) {
        self.rounds += other.rounds;
        self.violations += other.violations;
        self.max_winners = self.max_winners.max(other.max_winners);
    }
}

pub fn audit_rewards(trace: &GameTrace) -> RewardAudit {
    let m = trace.config.num_agents();
    let cutoff = trace.config.cutoff();
    let mut audit = RewardAudit::default();
    for (t, outcome) in trace.outcomes.iter().enumerate() {
        let actions = trace.round_actions(t);
        let column_sum = actions.iter().filter(|&&a| a == Action::Active).count();
        let expected_winners = if outcome.attendance <= cutoff {
            outcome.attendance
        } else {
            m - outcome.attendance
        };
        let rewarded = outcome.winners();
        let consistent = column_sum == outcome.attendance
            && rewarded == expected_winners
            && actions
                .iter()
                .zip(&outcome.rewards)
                .all(|(&a, &r)| (r > 0.0) == (a == outcome.winning_action));
        audit.rounds += 1;
        audit.violations += usize::from(!consistent);
        audit.max_winners = audit.max_winners.max(rewarded);
    }
    audit
}
