//! Evolutionary and exact solvers for sequential Stackelberg security games.
//!
//! A game implements [`GameModel`]; [`easg::run`] searches for a good
//! Defender mixed strategy and [`oracle::solve_game`] computes the exact
//! Strong Stackelberg Equilibrium when the strategy spaces are small.

pub mod easg;
pub mod error;
pub mod games;
pub mod io;
pub mod oracle;
pub mod response;
pub mod strategy;

pub use easg::{run, Easg, EasgParams, GenerationStats, RunResult};
pub use error::{GameError, Result};
pub use io::{AnyGame, GameKind};
pub use response::{best_response, evaluate_fitness, expected_payoffs, BestResponse, Evaluator};
pub use strategy::{coalesce_and_normalize, strategy_cap, Chromosome, GameModel, PayoffPair, PureStrategy, Role};
