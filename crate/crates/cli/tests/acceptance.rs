//! Acceptance gate: ten criteria at their stated tolerances, one PASS/FAIL
//! line each. Exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;

use mg_edge_core::game::determine_winner;
use mg_edge_core::harness::{self, Comparison, ExperimentConfig, DEFAULT_SWEEP};
use mg_edge_core::metrics::{self, TaskModel};
use mg_edge_core::policies::adaptive::AdaptiveState;
use mg_edge_core::policies::automata::{AutomataForm, AutomataState};
use mg_edge_core::policies::qlearn::{QState, QVariant};
use mg_edge_core::policies::rotherev::RothErevState;
use mg_edge_core::policies::strategy::{LearningRate, ScoredStrategySet, Scoring, StrategyTable};
use mg_edge_core::{Action, PolicySpec, WinHistory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const M: usize = 21;
const CUTOFF: usize = 10;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn grid(warmup: usize) -> Comparison {
    let mut base = ExperimentConfig::standard(PolicySpec::Random);
    base.sweep = Some(DEFAULT_SWEEP.to_vec());
    base.metrics.warmup = warmup;
    harness::compare_policies(&base, &harness::standard_grid()).expect("grid runs")
}

fn summary_of<'a>(cmp: &'a Comparison, name: &str) -> &'a harness::PolicySummary {
    cmp.ranking
        .iter()
        .find(|p| p.policy.name() == name)
        .expect("policy present in grid")
}

fn random_baseline() -> Outcome {
    let config = ExperimentConfig::standard(PolicySpec::Random);
    let report = harness::run_experiment(&config).expect("random runs");
    let s = &report.points[0].summary;
    let (v, c) = (s.volatility.mean, s.mean_attendance.mean);
    // Binomial(21, 1/2): variance M/4, mean M/2.
    let (want_v, want_c) = ((M as f64 / 4.0) / M as f64, M as f64 / 2.0);
    outcome(
        (v - want_v).abs() <= 0.02 && (c - want_c).abs() <= 0.1,
        format!(
            "volatility {v:.4} (want {want_v} ± 0.02), attendance {c:.4} (want {want_c} ± 0.1)"
        ),
    )
}

fn utility_bound(cmp: &Comparison) -> Outcome {
    let bound = CUTOFF as f64 / M as f64;
    let mut worst = f64::NEG_INFINITY;
    let mut max_winners = 0;
    let mut ok = true;
    for report in &cmp.reports {
        for point in &report.points {
            let u = &point.summary.utility;
            worst = worst.max(u.mean - (bound + 3.0 * u.se));
            ok &= u.mean <= bound + 3.0 * u.se;
            max_winners = max_winners.max(point.audit().max_winners);
        }
    }
    ok &= max_winners <= CUTOFF;
    outcome(
        ok,
        format!(
            "max (utility - bound - 3SE) = {worst:.3e} over {} policies, max winners per round {max_winners}",
            cmp.reports.len()
        ),
    )
}

fn coordination(cmp: &Comparison) -> Outcome {
    let exp = summary_of(cmp, "exponential");
    let random = summary_of(cmp, "random").summary.volatility.mean;
    let v = exp.summary.volatility.mean;
    outcome(
        v < 0.5 * random,
        format!(
            "exponential best volatility {v:.4} at alpha {:.4} vs random {random:.4} (threshold {:.4}; target 0.05 {})",
            exp.alpha.unwrap_or(f64::NAN),
            0.5 * random,
            if v <= 0.05 { "met" } else { "not met" }
        ),
    )
}

fn near_optimal(cmp: &Comparison) -> Outcome {
    let best = cmp
        .ranking
        .iter()
        .filter(|p| p.policy.name() != "random")
        .max_by(|a, b| a.summary.utility.mean.total_cmp(&b.summary.utility.mean))
        .expect("learned policies present");
    let u = best.summary.utility.mean;
    outcome(
        u >= 0.44,
        format!(
            "best learned utility {u:.4} ({}), optimum {:.4}",
            best.policy,
            CUTOFF as f64 / M as f64
        ),
    )
}

fn wsls_convergence(cmp: &Comparison) -> Outcome {
    let s = &summary_of(cmp, "wsls").summary;
    let (v, c) = (s.volatility.mean, s.mean_attendance.mean);
    outcome(
        v <= 0.05 && (9.5..=11.5).contains(&c),
        format!("volatility {v:.4} (<= 0.05), attendance {c:.4} (in [9.5, 11.5])"),
    )
}

/// P[Erlang(n, rate 1/mu) <= t] by the series 1 - e^{-x} sum_{k<n} x^k / k!.
fn erlang_cdf(n: u32, mu: f64, t: f64) -> f64 {
    let x = t / mu;
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..n {
        if k > 0 {
            fact *= k as f64;
        }
        sum += x.powi(k as i32) / fact;
    }
    1.0 - (-x).exp() * sum
}

fn qoe_oracle() -> Outcome {
    const ROUNDS: usize = 10_000;
    let active = 10;
    let series = vec![active; ROUNDS];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, t) in [3.0, 5.0, 8.0].into_iter().enumerate() {
        let model = TaskModel {
            tasks_per_round: 50,
            mean_task_time: 1.0,
            deadline: t,
            ..TaskModel::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let got = metrics::qoe_from_attendance(&series, &model, 0, &mut rng).expect("qoe");
        let p = erlang_cdf(5, 1.0, t);
        let sigma = (p * (1.0 - p) / (active * ROUNDS) as f64).sqrt();
        ok &= (got - p).abs() <= 3.0 * sigma;
        parts.push(format!("T={t}: {got:.4} vs {p:.4} ± {:.4}", 3.0 * sigma));
    }
    outcome(ok, parts.join("; "))
}

fn probability_invariants() -> Outcome {
    const STEPS: usize = 1_000_000;
    const RESEED: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let utility = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(0.5) {
            1.0
        } else {
            rng.random::<f64>()
        }
    };
    let in_unit = |p: [f64; 2]| {
        p.iter().all(|x| (0.0..=1.0).contains(x)) && (p[0] + p[1] - 1.0).abs() <= 1e-9
    };

    let mut automata_bad = 0;
    let mut la = AutomataState::new(0.2, 0.3, AutomataForm::Verbatim).unwrap();
    for step in 0..STEPS {
        if step % RESEED == 0 {
            let form = if rng.random_bool(0.5) {
                AutomataForm::Verbatim
            } else {
                AutomataForm::Standard
            };
            la = AutomataState::new(rng.random(), rng.random(), form).unwrap();
        }
        let a = Action::random(&mut rng);
        let u = utility(&mut rng);
        la.update(a, u);
        automata_bad += usize::from(!in_unit(la.probabilities()));
    }

    let mut roth_bad = 0;
    let mut re = RothErevState::new(0.2, 1.0).unwrap();
    for step in 0..STEPS {
        if step % RESEED == 0 {
            re = RothErevState::new(rng.random(), rng.random_range(0.0..5.0)).unwrap();
        }
        re.update(Action::random(&mut rng), utility(&mut rng));
        roth_bad += usize::from(!in_unit(re.probabilities()));
    }

    let mut q_bad = 0;
    let mut q = QState::new(QVariant::ActionBased, 0.1, 0.01).unwrap();
    for step in 0..STEPS {
        if step % RESEED == 0 {
            let tables = (0..rng.random_range(2..6))
                .map(|_| StrategyTable::generate(3, &mut rng).unwrap())
                .collect();
            let variant = if rng.random_bool(0.5) {
                QVariant::ActionBased
            } else {
                QVariant::StrategyBased(tables)
            };
            q = QState::new(variant, rng.random_range(1e-3..=1.0), 0.01).unwrap();
        }
        let before: Vec<u64> = q.q_values().iter().map(|v| v.to_bits()).collect();
        let chosen = rng.random_range(0..before.len());
        q.update(chosen, utility(&mut rng));
        let after = q.q_values();
        q_bad += before
            .iter()
            .zip(after)
            .enumerate()
            .filter(|&(i, (b, a))| i != chosen && *b != a.to_bits())
            .count();
    }

    let mut adaptive_bad = 0;
    let mut ad = AdaptiveState::new(0.5, 0.5, 0.5, None).unwrap();
    for step in 0..STEPS {
        if step % RESEED == 0 {
            let window = rng.random_bool(0.5).then(|| rng.random_range(1..50));
            ad = AdaptiveState::new(rng.random(), rng.random(), rng.random(), window).unwrap();
        }
        let own = Action::random(&mut rng);
        let winning = Action::random(&mut rng);
        ad.update(own, own == winning, utility(&mut rng), winning);
        adaptive_bad += ad
            .attitudes()
            .iter()
            .filter(|x| !(0.0..=1.0).contains(*x))
            .count();
    }

    outcome(
        automata_bad + roth_bad + q_bad + adaptive_bad == 0,
        format!(
            "{STEPS} steps each; violations: automata {automata_bad}, roth-erev {roth_bad}, q unchosen {q_bad}, adaptive {adaptive_bad}"
        ),
    )
}

fn softmax_limit() -> Outcome {
    const VECTORS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Strategy 0 always plays inactive and strategy 1 always active, so the
    // chosen action identifies the chosen strategy.
    let tables = vec![
        StrategyTable::from_entries(vec![Action::Inactive; 8]).unwrap(),
        StrategyTable::from_entries(vec![Action::Active; 8]).unwrap(),
    ];
    let history = WinHistory::random(3, &mut rng).unwrap();
    let mut hot =
        ScoredStrategySet::new(tables.clone(), LearningRate::Finite(1e4), Scoring::PlusOne)
            .unwrap();
    let mut cold =
        ScoredStrategySet::new(tables.clone(), LearningRate::Infinite, Scoring::PlusOne).unwrap();
    let mut agree = 0;
    let mut done = 0;
    while done < VECTORS {
        let scores = [
            rng.random_range(0..10_000) as f64,
            rng.random_range(0..10_000) as f64,
        ];
        if scores[0] == scores[1] {
            continue;
        }
        hot.set_scores(&scores).unwrap();
        cold.set_scores(&scores).unwrap();
        agree += usize::from(
            hot.exponential_select(&history, &mut rng) == cold.seminal_select(&history, &mut rng),
        );
        done += 1;
    }
    let agreement = agree as f64 / VECTORS as f64;

    // gamma = 0 over four strategies: chi-square with 3 degrees of freedom.
    let four: Vec<StrategyTable> = (0..4)
        .map(|_| StrategyTable::generate(3, &mut rng).unwrap())
        .collect();
    let mut flat =
        ScoredStrategySet::new(four, LearningRate::Finite(0.0), Scoring::PlusOne).unwrap();
    flat.set_scores(&[5.0, -3.0, 12.0, 0.0]).unwrap();
    const DRAWS: usize = 400_000;
    let mut counts = [0usize; 4];
    for _ in 0..DRAWS {
        counts[flat.sample_strategy(&mut rng)] += 1;
    }
    let expected = DRAWS as f64 / 4.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 99.9% quantile of chi-square(3).
    let uniform = chi2 < 16.266;
    outcome(
        agreement >= 0.9999 && uniform,
        format!(
            "agreement {:.4}% over {VECTORS} vectors; gamma=0 chi2 {chi2:.2} (< 16.27)",
            100.0 * agreement
        ),
    )
}

fn cli_compare(out: &Path, threads: usize) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_mg-edge-lab"))
        .args([
            "compare",
            "--seed",
            "1",
            "--threads",
            &threads.to_string(),
            "--out",
        ])
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("launch mg-edge-lab");
    assert!(status.success(), "compare exited with {status}");
    std::fs::read(out.join("results.csv")).expect("results.csv written")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let a = cli_compare(&dir.path().join("a"), 1);
    let b = cli_compare(&dir.path().join("b"), 1);
    let c = cli_compare(&dir.path().join("c"), 8);
    outcome(
        a == b && a == c,
        format!(
            "{} bytes; repeat identical: {}, threads 1 vs 8 identical: {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

fn reward_conservation(cmp: &Comparison) -> Outcome {
    let mut rounds = 0;
    let mut violations = 0;
    for report in &cmp.reports {
        // Memoryless points past the first are copies of it.
        let distinct = if report.points[0].memory.is_some() {
            report.points.len()
        } else {
            1
        };
        for point in &report.points[..distinct] {
            let audit = point.audit();
            rounds += audit.rounds;
            violations += audit.violations;
        }
    }
    outcome(
        violations == 0 && rounds > 0,
        format!("{violations} violations in {rounds} audited rounds"),
    )
}

fn main() {
    // The winner rule every criterion relies on.
    assert_eq!(determine_winner(CUTOFF, CUTOFF, M).unwrap(), Action::Active);

    let plain = grid(0);
    let warm = grid(2000);
    let criteria: Vec<(&str, Outcome)> = vec![
        ("random baseline", random_baseline()),
        ("utility bound", utility_bound(&plain)),
        ("exponential coordination", coordination(&plain)),
        ("near-optimal utility", near_optimal(&warm)),
        ("wsls convergence", wsls_convergence(&warm)),
        ("qoe erlang oracle", qoe_oracle()),
        ("probability invariants", probability_invariants()),
        ("softmax/argmax limit", softmax_limit()),
        ("determinism", determinism()),
        ("reward conservation", reward_conservation(&plain)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in criteria.iter().enumerate() {
        println!(
            "[criterion {}] {} {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
