//! Fast sanity checks against closed-form answers.

use mg_edge_core::game::determine_winner;
use mg_edge_core::metrics::{self, TaskDistribution, TaskModel};
use mg_edge_core::rng;
use mg_edge_core::{run_experiment, Action, ExperimentConfig, PolicySpec, Result};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// P[sum of `n` exponential task times with mean `mu` <= `t`].
pub fn erlang_cdf(n: usize, mu: f64, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let x = t / mu;
    let mut term = 1.0;
    let mut tail = 1.0;
    for k in 1..n {
        term *= x / k as f64;
        tail += term;
    }
    (1.0 - (-x).exp() * tail).clamp(0.0, 1.0)
}

/// Expected on-time fraction when `active` servers share the round's tasks.
pub fn expected_qoe(model: &TaskModel, active: usize) -> f64 {
    let loads = metrics::server_loads(model.tasks_per_round, active);
    let hit = |n: usize| match model.distribution {
        TaskDistribution::Exponential => erlang_cdf(n, model.mean_task_time, model.deadline),
        TaskDistribution::Deterministic => {
            f64::from(u8::from(n as f64 * model.mean_task_time <= model.deadline))
        }
    };
    loads.iter().map(|&n| hit(n)).sum::<f64>() / active as f64
}

fn winner_rule(cutoff: usize, agents: usize) -> Check {
    let ok = determine_winner(cutoff, cutoff, agents).ok() == Some(Action::Active)
        && determine_winner(cutoff + 1, cutoff, agents).ok() == Some(Action::Inactive)
        && determine_winner(0, cutoff, agents).ok() == Some(Action::Active)
        && determine_winner(agents, cutoff, agents).ok() == Some(Action::Inactive);
    Check {
        name: "winner rule",
        passed: ok,
        detail: format!("c<={cutoff} active wins, c>{cutoff} inactive wins"),
    }
}

fn qoe_oracle(model: &TaskModel, active: usize, seed: u64) -> Result<Check> {
    const ROUNDS: usize = 20_000;
    let series = vec![active; ROUNDS];
    let mut r = rng::stream_rng(seed, rng::METRICS_STREAM);
    let got = metrics::qoe_from_attendance(&series, model, 0, &mut r)?;
    let want = expected_qoe(model, active);
    let sigma = (want * (1.0 - want) / (active * ROUNDS) as f64).sqrt();
    let tol = (3.0 * sigma).max(1e-12);
    Ok(Check {
        name: "qoe oracle",
        passed: (got - want).abs() <= tol,
        detail: format!("c={active}: simulated {got:.5}, exact {want:.5}, tolerance {tol:.2e}"),
    })
}

/// Returns the checks together with the random-baseline experiment
/// they were computed from.
pub fn run(
    base: &ExperimentConfig,
) -> Result<(Vec<Check>, ExperimentConfig, mg_edge_core::ExperimentReport)> {
    let m = base.game.num_agents();
    let config = ExperimentConfig {
        policy: PolicySpec::Random,
        sweep: None,
        ..base.clone()
    };
    let report = run_experiment(&config)?;
    let s = &report.points[0].summary;
    let mut checks = vec![winner_rule(base.game.cutoff(), m)];
    checks.push(Check {
        name: "random volatility",
        passed: (s.volatility.mean - 0.25).abs() <= 0.02,
        detail: format!("{:.4} (expected 0.25 +/- 0.02)", s.volatility.mean),
    });
    let half = m as f64 / 2.0;
    checks.push(Check {
        name: "random attendance",
        passed: (s.mean_attendance.mean - half).abs() <= 0.1,
        detail: format!("{:.4} (expected {half} +/- 0.1)", s.mean_attendance.mean),
    });
    checks.push(qoe_oracle(
        &base.metrics.task_model,
        base.game.cutoff(),
        base.root_seed,
    )?);
    Ok((checks, config, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erlang_values() {
        assert!((erlang_cdf(1, 1.0, 1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((erlang_cdf(5, 1.0, 5.0) - 0.559507).abs() < 1e-6);
        assert!((erlang_cdf(5, 1.0, 3.0) - 0.184737).abs() < 1e-6);
        assert_eq!(erlang_cdf(0, 1.0, 0.5), 1.0);
    }

    #[test]
    fn uneven_loads_average() {
        let model = TaskModel {
            tasks_per_round: 7,
            ..TaskModel::default()
        };
        // Loads 3, 2, 2.
        let want = (erlang_cdf(3, 1.0, 10.0) + 2.0 * erlang_cdf(2, 1.0, 10.0)) / 3.0;
        assert!((expected_qoe(&model, 3) - want).abs() < 1e-15);
    }
}
