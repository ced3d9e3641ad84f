//! `results.csv`: a `#`-prefixed preamble holding the effective
//! configuration, a header row, then one row per run and one aggregate row
//! per (policy, sweep point).

use std::fmt::Write as _;

use crate::config;
use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, ExperimentReport};

pub const COLUMNS: [&str; 13] = [
    "experiment_id",
    "policy",
    "alpha",
    "run_index",
    "volatility",
    "mean_attendance",
    "avg_utility",
    "qoe_prob",
    "seed",
    "warmup",
    "K",
    "mu",
    "T_deadline",
];

const NA: &str = "na";
const AGG: &str = "agg";

#[derive(Clone, Debug, PartialEq)]
pub struct OutputRow {
    pub experiment_id: String,
    pub policy: String,
    /// `None` for a memoryless policy evaluated without a sweep.
    pub alpha: Option<f64>,
    /// `None` marks the aggregate row.
    pub run_index: Option<usize>,
    pub volatility: f64,
    pub mean_attendance: f64,
    pub avg_utility: f64,
    pub qoe_prob: f64,
    pub seed: u64,
    pub warmup: usize,
    pub tasks_per_round: usize,
    pub mean_task_time: f64,
    pub deadline: f64,
}

/// Renders `x` with six significant digits, `%g` style: plain notation for
/// exponents in `-4..6`, scientific otherwise, trailing zeros dropped.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        trim_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn experiment_id(command: &str, policy: &str, memory: Option<u32>, replicated: bool) -> String {
    match (memory, replicated) {
        (Some(s), _) => format!("{command}-{policy}-s{s}"),
        (None, true) => format!("{command}-{policy}-flat"),
        (None, false) => format!("{command}-{policy}-{NA}"),
    }
}

/// Rows for one report: each point's runs followed by its aggregate.
pub fn rows_for(command: &str, report: &ExperimentReport) -> Vec<OutputRow> {
    let config = &report.config;
    let tm = &config.metrics.task_model;
    let mut rows = Vec::new();
    for point in &report.points {
        let id = experiment_id(command, point.policy.name(), point.memory, point.replicated);
        let policy = point.policy.to_string();
        let row = |run_index: Option<usize>, seed: u64, v: f64, c: f64, u: f64, q: f64| OutputRow {
            experiment_id: id.clone(),
            policy: policy.clone(),
            alpha: point.alpha,
            run_index,
            volatility: v,
            mean_attendance: c,
            avg_utility: u,
            qoe_prob: q,
            seed,
            warmup: config.metrics.warmup,
            tasks_per_round: tm.tasks_per_round,
            mean_task_time: tm.mean_task_time,
            deadline: tm.deadline,
        };
        for run in &point.runs {
            rows.push(row(
                Some(run.run_index),
                run.seed,
                run.volatility,
                run.mean_attendance,
                run.population_utility,
                run.qoe_probability,
            ));
        }
        let s = &point.summary;
        rows.push(row(
            None,
            config.root_seed,
            s.volatility.mean,
            s.mean_attendance.mean,
            s.utility.mean,
            s.qoe_probability.mean,
        ));
    }
    rows
}

/// Preamble entries for a set of experiments sharing everything but the
/// policy. Multiple policies are listed under `policies`, separated by `;`.
pub fn preamble(command: &str, configs: &[ExperimentConfig]) -> Vec<(String, String)> {
    let mut out = vec![("command".to_string(), command.to_string())];
    let Some(first) = configs.first() else {
        return out;
    };
    for (key, value) in config::describe(first) {
        if key == "policy" && configs.len() > 1 {
            let all: Vec<String> = configs.iter().map(|c| c.policy.to_string()).collect();
            out.push(("policies".to_string(), all.join(";")));
        } else {
            out.push((key.to_string(), value));
        }
    }
    out.push(("reward".to_string(), format_sig(first.game.reward())));
    out
}

pub fn write_results(metadata: &[(String, String)], rows: &[OutputRow]) -> Result<String> {
    let mut text = String::new();
    for (k, v) in metadata {
        writeln!(text, "# {k}={v}").expect("write to string");
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Results(e.to_string());
    writer.write_record(COLUMNS).map_err(csv_err)?;
    for r in rows {
        let opt = |x: Option<f64>| x.map_or_else(|| NA.to_string(), format_sig);
        writer
            .write_record([
                r.experiment_id.clone(),
                r.policy.clone(),
                opt(r.alpha),
                r.run_index
                    .map_or_else(|| AGG.to_string(), |i| i.to_string()),
                format_sig(r.volatility),
                format_sig(r.mean_attendance),
                format_sig(r.avg_utility),
                format_sig(r.qoe_prob),
                r.seed.to_string(),
                r.warmup.to_string(),
                r.tasks_per_round.to_string(),
                format_sig(r.mean_task_time),
                format_sig(r.deadline),
            ])
            .map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Results(e.to_string()))?;
    text.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
    Ok(text)
}

/// A parsed `results.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultsTable {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<OutputRow>,
}

impl ResultsTable {
    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn parse_results(text: &str) -> Result<ResultsTable> {
    let mut metadata = Vec::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(entry) = line.strip_prefix('#') else {
            break;
        };
        body_start += line.len();
        let entry = entry.trim();
        if let Some((k, v)) = entry.split_once('=') {
            metadata.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(&text.as_bytes()[body_start..]);
    let bad = |msg: String| Error::Results(msg);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(bad(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let line = n + 2;
        let field = |i: usize| {
            record
                .get(i)
                .ok_or_else(|| bad(format!("row {line}: missing {}", COLUMNS[i])))
        };
        let real = |i: usize| -> Result<f64> {
            field(i)?
                .parse::<f64>()
                .map_err(|_| bad(format!("row {line}: bad {}", COLUMNS[i])))
        };
        let int = |i: usize| -> Result<u64> {
            field(i)?
                .parse::<u64>()
                .map_err(|_| bad(format!("row {line}: bad {}", COLUMNS[i])))
        };
        let alpha = match field(2)? {
            NA => None,
            _ => Some(real(2)?),
        };
        let run_index = match field(3)? {
            AGG => None,
            _ => Some(int(3)? as usize),
        };
        rows.push(OutputRow {
            experiment_id: field(0)?.to_string(),
            policy: field(1)?.to_string(),
            alpha,
            run_index,
            volatility: real(4)?,
            mean_attendance: real(5)?,
            avg_utility: real(6)?,
            qoe_prob: real(7)?,
            seed: int(8)?,
            warmup: int(9)? as usize,
            tasks_per_round: int(10)? as usize,
            mean_task_time: real(11)?,
            deadline: real(12)?,
        });
    }
    Ok(ResultsTable { metadata, rows })
}
