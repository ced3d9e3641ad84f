//! `mg-edge-lab`: run, sweep and compare minority-game server-activation
//! experiments and write `results.csv`.

mod plot;
mod selftest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mg_edge_core::config::ConfigBuilder;
use mg_edge_core::harness::{self, ExperimentReport, DEFAULT_SWEEP};
use mg_edge_core::report::{self, format_sig};
use mg_edge_core::{Error, ExperimentConfig, PolicySpec};

#[derive(Parser)]
#[command(
    name = "mg-edge-lab",
    version,
    about = "Minority-game edge-server activation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one policy at a single configuration point.
    Run(Options),
    /// Run one policy across memory sizes s (alpha = 2^s / M).
    Sweep(Options),
    /// Run every policy (the standard grid unless --policy is given) and rank them.
    Compare(Options),
    /// Check the random baseline, the winner rule and the QoE estimator.
    Selftest(Options),
}

#[derive(clap::Args)]
struct Options {
    /// Read key=value settings from a file; flags override them.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Number of servers M (odd).
    #[arg(long)]
    agents: Option<String>,
    /// Activation cutoff c_th.
    #[arg(long)]
    cutoff: Option<String>,
    /// Rounds per run.
    #[arg(long)]
    rounds: Option<String>,
    /// Independent runs per configuration point.
    #[arg(long)]
    runs: Option<String>,
    /// Root seed; every run seed derives from it.
    #[arg(long)]
    seed: Option<String>,
    /// Policy such as `wsls(p=0.01)`. Repeatable for compare.
    #[arg(long)]
    policy: Vec<String>,
    /// Memory sizes, e.g. `1..7` or `2,4,6`.
    #[arg(long)]
    sweep_s: Option<String>,
    /// Rounds discarded before measuring.
    #[arg(long)]
    warmup: Option<String>,
    /// Tasks K arriving per round.
    #[arg(long)]
    tasks_per_round: Option<String>,
    /// Mean task time mu, seconds.
    #[arg(long)]
    mean_task_time: Option<String>,
    /// Deadline T, seconds.
    #[arg(long)]
    deadline: Option<String>,
    /// `exponential` or `deterministic`.
    #[arg(long)]
    task_distribution: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write SVG charts.
    #[arg(long)]
    plot: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

enum Failure {
    Config(String),
    Io(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_configuration() {
            Failure::Config(e.to_string())
        } else {
            Failure::Io(e.to_string())
        }
    }
}

fn builder(opts: &Options) -> Result<ConfigBuilder, Failure> {
    let mut b = ConfigBuilder::default();
    if let Some(path) = &opts.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
        b.apply_text(&text)?;
    }
    let flags = [
        ("agents", &opts.agents),
        ("cutoff", &opts.cutoff),
        ("rounds", &opts.rounds),
        ("runs", &opts.runs),
        ("seed", &opts.seed),
        ("sweep_s", &opts.sweep_s),
        ("warmup", &opts.warmup),
        ("tasks_per_round", &opts.tasks_per_round),
        ("mean_task_time", &opts.mean_task_time),
        ("deadline", &opts.deadline),
        ("task_distribution", &opts.task_distribution),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            b.set(key, v)?;
        }
    }
    Ok(b)
}

fn single_policy(b: &mut ConfigBuilder, opts: &Options) -> Result<(), Failure> {
    match opts.policy.as_slice() {
        [] => Ok(()),
        [one] => Ok(b.set("policy", one)?),
        _ => Err(Failure::Config(
            "policy may be given only once for this command".into(),
        )),
    }
}

fn print_table(title: &str, rows: &[(String, Option<f64>, &harness::Summary)]) {
    println!("{title}");
    println!(
        "{:<4} {:<48} {:>8} {:>20} {:>10} {:>20} {:>20}",
        "rank", "policy", "alpha", "volatility", "attend", "utility", "qoe"
    );
    let pm = |m: &harness::MeanSe| format!("{} ± {}", format_sig(m.mean), format_sig(m.se));
    for (i, (policy, alpha, s)) in rows.iter().enumerate() {
        println!(
            "{:<4} {:<48} {:>8} {:>20} {:>10} {:>20} {:>20}",
            i + 1,
            policy,
            alpha.map_or_else(|| "na".to_string(), format_sig),
            pm(&s.volatility),
            format_sig(s.mean_attendance.mean),
            pm(&s.utility),
            pm(&s.qoe_probability),
        );
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_outputs(
    opts: &Options,
    command: &str,
    configs: &[ExperimentConfig],
    reports: &[ExperimentReport],
) -> Result<(), Failure> {
    fs::create_dir_all(&opts.out)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", opts.out.display())))?;
    let rows: Vec<_> = reports
        .iter()
        .flat_map(|r| report::rows_for(command, r))
        .collect();
    let text = report::write_results(&report::preamble(command, configs), &rows)?;
    write_file(&opts.out.join("results.csv"), &text)?;
    if opts.plot {
        write_plots(&opts.out, reports)?;
    }
    Ok(())
}

fn write_plots(dir: &Path, reports: &[ExperimentReport]) -> Result<(), Failure> {
    let series: Vec<plot::Series> = reports
        .iter()
        .map(|r| {
            let flat = r.config.policy.is_memoryless();
            plot::Series {
                label: r.config.policy.name().to_string(),
                points: r
                    .points
                    .iter()
                    .map(|p| (p.alpha.unwrap_or(0.0), p.summary.volatility.mean))
                    .collect(),
                flat,
            }
        })
        .collect();
    write_file(
        &dir.join("volatility_vs_alpha.svg"),
        &plot::line_chart("Volatility", "alpha = 2^s / M", "sigma^2 / M", &series),
    )?;
    let best: Vec<_> = reports
        .iter()
        .map(|r| (r.config.policy.name().to_string(), r.best_point()))
        .collect();
    let utility: Vec<_> = best
        .iter()
        .map(|(n, p)| (n.clone(), p.summary.utility.mean, p.summary.utility.se))
        .collect();
    write_file(
        &dir.join("utility_per_policy.svg"),
        &plot::bar_chart("Mean utility per server", "utility", &utility),
    )?;
    let qoe: Vec<_> = best
        .iter()
        .map(|(n, p)| {
            (
                n.clone(),
                p.summary.qoe_probability.mean,
                p.summary.qoe_probability.se,
            )
        })
        .collect();
    write_file(
        &dir.join("qoe_per_policy.svg"),
        &plot::bar_chart("Deadline met", "Pr[tau <= T]", &qoe),
    )
}

fn execute(command: Command) -> Result<(), Failure> {
    let (name, opts) = match &command {
        Command::Run(o) => ("run", o),
        Command::Sweep(o) => ("sweep", o),
        Command::Compare(o) => ("compare", o),
        Command::Selftest(o) => ("selftest", o),
    };
    let mut b = builder(opts)?;
    match &command {
        Command::Run(_) | Command::Sweep(_) => {
            single_policy(&mut b, opts)?;
            if name == "run" {
                b.sweep = None;
            } else if b.sweep.is_none() {
                b.sweep = Some(DEFAULT_SWEEP.to_vec());
            }
            let config = b.build()?;
            let report = harness::with_threads(opts.threads, || harness::run_experiment(&config))??;
            let rows: Vec<_> = report
                .points
                .iter()
                .map(|p| (p.policy.to_string(), p.alpha, &p.summary))
                .collect();
            print_table(
                &format!(
                    "{name}: {} runs of {} rounds",
                    config.runs,
                    config.game.num_rounds()
                ),
                &rows,
            );
            write_outputs(
                opts,
                name,
                std::slice::from_ref(&config),
                std::slice::from_ref(&report),
            )
        }
        Command::Compare(_) => {
            if b.sweep.is_none() {
                b.sweep = Some(DEFAULT_SWEEP.to_vec());
            }
            let base = b.build()?;
            let policies: Vec<PolicySpec> = if opts.policy.is_empty() {
                harness::standard_grid()
            } else {
                opts.policy
                    .iter()
                    .map(|p| {
                        b.set("policy", p)?;
                        Ok(b.policy.clone())
                    })
                    .collect::<Result<_, Error>>()?
            };
            let cmp = harness::with_threads(opts.threads, || {
                harness::compare_policies(&base, &policies)
            })??;
            let rows: Vec<_> = cmp
                .ranking
                .iter()
                .map(|p| (p.policy.to_string(), p.alpha, &p.summary))
                .collect();
            print_table("compare: ranked by best mean volatility", &rows);
            let configs: Vec<_> = cmp.reports.iter().map(|r| r.config.clone()).collect();
            write_outputs(opts, name, &configs, &cmp.reports)
        }
        Command::Selftest(_) => {
            let base = b.build()?;
            let (checks, config, report) =
                harness::with_threads(opts.threads, || selftest::run(&base))??;
            for c in &checks {
                println!(
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            write_outputs(
                opts,
                name,
                std::slice::from_ref(&config),
                std::slice::from_ref(&report),
            )?;
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Checks) => {
            eprintln!("selftest failed");
            ExitCode::from(1)
        }
    }
}
