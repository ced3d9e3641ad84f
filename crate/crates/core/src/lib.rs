//! Minority-game model of distributed edge-server activation.
//!
//! A pool of servers repeatedly decides, without communicating, whether to
//! accept offloaded work. Rounds in which the number of active servers stays
//! at or below a cutoff reward the active servers; otherwise the idle ones
//! win. The crate provides the game engine ([`game`]), eight learning rules
//! ([`policies`]), the evaluation metrics ([`metrics`]), a seeded Monte Carlo
//! harness with memory-size sweeps ([`harness`]), and the text formats used
//! by the command-line front end ([`config`], [`report`]).

pub mod config;
pub mod error;
pub mod game;
pub mod harness;
pub mod metrics;
pub mod policies;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use game::{run_game, Action, GameConfig, GameTrace, RoundOutcome, WinHistory};
pub use harness::{run_experiment, ExperimentConfig, ExperimentReport};
pub use metrics::{MetricOptions, MetricReport, TaskModel};
pub use policies::{PolicySpec, PolicyState};
