//! Exact solutions for small instances: a dense simplex solver and the
//! multiple-LPs Strong Stackelberg Equilibrium built on it.

pub mod lp;
pub mod sse;

pub use lp::{lp_solve, Constraint, LpSolution, LpStatus, Relation};
pub use sse::{
    build_matrices, defender_payoff_extrema, is_degenerate, solve_game, solve_sse, OracleStats, PayoffMatrices,
    SseSolution,
};
