//! Seeded multi-run experiments over generated or saved games: per-game
//! statistics, histograms, parameter sweeps and timing tables.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod scalability;
pub mod seed;
pub mod suites;
pub mod sweep;

pub use config::{ExperimentConfig, GameSource, GeneratorSource, LoadedGame, SweepLists};
pub use error::{BenchError, Result};
pub use experiment::{run_experiment, run_loaded, ExperimentOutcome, GameInfo, RunLog};
pub use report::{ExperimentReport, GameRow, Histogram};
pub use scalability::{scalability_table, ScalabilityTable};
pub use sweep::{parameter_sweep, SweepReport};
