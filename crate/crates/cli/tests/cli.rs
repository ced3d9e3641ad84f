use std::path::Path;
use std::process::{Command, Output};

use mg_edge_core::report::parse_results;

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mg-edge-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("launch mg-edge-lab")
}

const SMALL: [&str; 4] = ["--rounds", "400", "--runs", "3"];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(SMALL).collect()
}

#[test]
fn run_writes_parseable_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        &with_small(&["run", "--policy", "wsls(p=0.01)", "--seed", "5"]),
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let table = parse_results(&text).unwrap();
    assert_eq!(table.metadata_value("command"), Some("run"));
    assert_eq!(table.metadata_value("policy"), Some("wsls(p=0.01)"));
    assert_eq!(table.metadata_value("seed"), Some("5"));
    assert!(table.metadata.iter().all(|(k, _)| k != "threads"));
    assert_eq!(table.rows.len(), 4);
    assert!(table
        .rows
        .iter()
        .all(|r| r.alpha.is_none() && r.experiment_id == "run-wsls-na"));
    assert!(table.rows[3].run_index.is_none());
}

#[test]
fn sweep_covers_memory_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        &with_small(&["sweep", "--policy", "seminal", "--sweep-s", "2..4"]),
        dir.path(),
    );
    assert!(out.status.success());
    let table =
        parse_results(&std::fs::read_to_string(dir.path().join("results.csv")).unwrap()).unwrap();
    let ids: Vec<&str> = table
        .rows
        .iter()
        .filter(|r| r.run_index.is_none())
        .map(|r| r.experiment_id.as_str())
        .collect();
    assert_eq!(
        ids,
        ["sweep-seminal-s2", "sweep-seminal-s3", "sweep-seminal-s4"]
    );
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = with_small(&["compare", "--seed", "3", "--sweep-s", "1,3"]);
    let a = lab(&args, &dir.path().join("a"));
    let mut threaded = args.clone();
    threaded.extend(["--threads", "3"]);
    let b = lab(&threaded, &dir.path().join("b"));
    assert!(a.status.success() && b.status.success());
    let read = |d: &str| std::fs::read(dir.path().join(d).join("results.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn compare_lists_the_whole_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&with_small(&["compare", "--sweep-s", "2"]), dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in [
        "seminal",
        "exponential",
        "qlearn-action",
        "qlearn-strategy",
        "adaptive",
        "wsls",
        "rotherev",
        "automata",
        "random",
    ] {
        let listed = stdout.lines().skip(2).any(|line| {
            line.split_whitespace()
                .nth(1)
                .is_some_and(|p| p.split('(').next() == Some(name))
        });
        assert!(listed, "{name} missing");
    }
    let table =
        parse_results(&std::fs::read_to_string(dir.path().join("results.csv")).unwrap()).unwrap();
    assert_eq!(
        table.metadata_value("policies").unwrap().split(';').count(),
        9
    );
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--agents", "20"],
        vec!["run", "--policy", "bogus"],
        vec!["run", "--policy", "wsls(p=2)"],
        vec!["sweep", "--sweep-s", "9..3"],
        vec!["run", "--policy", "wsls", "--policy", "random"],
        vec!["run", "--no-such-flag"],
    ] {
        let out = lab(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = lab(&["run", "--agents", "20"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("agents"));
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        "# small\nrounds=300\nruns=2\npolicy=rotherev\nseed=4\n",
    )
    .unwrap();
    let out = lab(
        &["run", "--config", cfg.to_str().unwrap(), "--seed", "9"],
        dir.path(),
    );
    assert!(out.status.success());
    let table =
        parse_results(&std::fs::read_to_string(dir.path().join("results.csv")).unwrap()).unwrap();
    assert_eq!(table.metadata_value("rounds"), Some("300"));
    assert_eq!(table.metadata_value("seed"), Some("9"));
    assert!(table
        .metadata_value("policy")
        .unwrap()
        .starts_with("rotherev("));

    std::fs::write(&cfg, "agents=20\n").unwrap();
    let out = lab(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lab(&["run", "--config", "/nonexistent/exp.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = lab(&with_small(&["run"]), &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plot_writes_svgs() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        &with_small(&["compare", "--sweep-s", "1,2", "--plot"]),
        dir.path(),
    );
    assert!(out.status.success());
    for name in [
        "volatility_vs_alpha.svg",
        "utility_per_policy.svg",
        "qoe_per_policy.svg",
    ] {
        let svg = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(
            svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"),
            "{name}"
        );
    }
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["selftest", "--rounds", "4000"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.matches("[PASS]").count(), 4);
}
