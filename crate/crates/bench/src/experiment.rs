//! Multi-seed EASG runs over a list of games, optionally against the exact
//! oracle, with one raw log record per run.

use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stackevo_core::oracle::{build_matrices, defender_payoff_extrema, is_degenerate, solve_sse};
use stackevo_core::{strategy_cap, with_game, Easg, EasgParams, GameError, GameKind, GenerationStats, Role};

use crate::config::{load_games, ExperimentConfig, LoadedGame};
use crate::error::{BenchError, Result};
use crate::report::ExperimentReport;
use crate::seed::run_seed;

/// Game-level facts shared by all runs on one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameInfo {
    pub game_id: String,
    pub kind: GameKind,
    pub steps: usize,
    /// `|Σ^D| · |Σ^A|`, the tree-size proxy used for grouping.
    pub tree_size: f64,
    /// Absent when the oracle was not requested or hit the capacity cap.
    pub sse_value: Option<f64>,
    /// Defender payoff extrema; set for FIG games only.
    pub payoff_range: Option<[f64; 2]>,
    pub oracle_time_s: Option<f64>,
}

/// One EASG run, as written to the JSONL log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunLog {
    pub game_id: String,
    #[serde(rename = "type")]
    pub kind: GameKind,
    pub steps: usize,
    pub run: usize,
    pub seed: u64,
    pub best_fitness: f64,
    pub generations_run: usize,
    pub wall_time_s: f64,
    pub history: Vec<GenerationStats>,
    pub sse_value: Option<f64>,
    pub payoff_range: Option<[f64; 2]>,
    pub tree_size: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub games: Vec<GameInfo>,
    pub logs: Vec<RunLog>,
    pub report: ExperimentReport,
}

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = jobs
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?)
}

/// Computes the tree-size proxy and, when `exact`, the equilibrium value.
/// A capacity error leaves the value absent; other errors are returned.
pub fn game_info(game: &LoadedGame, exact: bool, cap: usize) -> Result<GameInfo> {
    let g = &game.game;
    let mut info = GameInfo {
        game_id: game.id.clone(),
        kind: g.kind(),
        steps: g.steps(),
        tree_size: g.strategy_count(Role::Defender) * g.strategy_count(Role::Attacker),
        sse_value: None,
        payoff_range: None,
        oracle_time_s: None,
    };
    if !exact {
        return Ok(info);
    }
    let started = Instant::now();
    let solved = with_game!(g, gm => {
        match build_matrices(gm, cap) {
            Ok(m) => {
                let value = solve_sse(&m)?.value;
                Some((value, defender_payoff_extrema(&m)?))
            }
            Err(GameError::Capacity { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    });
    if let Some((value, range)) = solved {
        info.oracle_time_s = Some(started.elapsed().as_secs_f64());
        info.sse_value = Some(value);
        if info.kind == GameKind::Fig && !is_degenerate(range) {
            info.payoff_range = Some([range.0, range.1]);
        }
    }
    Ok(info)
}

/// Runs `runs` seeded EASG runs on every game. Cells run on `pool`; the
/// result is ordered by game, then run index.
pub fn run_cells(
    games: &[LoadedGame],
    infos: &[GameInfo],
    params: EasgParams,
    runs: usize,
    base_seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<Vec<RunLog>> {
    params.validate()?;
    let cap = strategy_cap();
    let cells: Vec<(usize, usize)> = (0..games.len()).flat_map(|g| (0..runs).map(move |r| (g, r))).collect();
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(gi, run)| {
                let (game, info) = (&games[gi], &infos[gi]);
                let seed = run_seed(base_seed, &game.id, run);
                let result = with_game!(&game.game, g => {
                    let mut easg = Easg::with_cap(g, params, seed, cap)?;
                    easg.run_until(None);
                    let r = easg.finish();
                    (r.best_fitness, r.generations_run, r.wall_time, r.history)
                });
                let (best_fitness, generations_run, wall_time_s, history) = result;
                Ok(RunLog {
                    game_id: game.id.clone(),
                    kind: info.kind,
                    steps: info.steps,
                    run,
                    seed,
                    best_fitness,
                    generations_run,
                    wall_time_s,
                    history,
                    sse_value: info.sse_value,
                    payoff_range: info.payoff_range,
                    tree_size: info.tree_size,
                })
            })
            .collect::<Result<Vec<_>>>()
    })
}

/// Loads the games, computes equilibria when requested and runs every cell.
/// Writes the report files when the config names an output directory.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let games = load_games(&cfg.games)?;
    run_loaded(cfg, &games, jobs)
}

/// As [`run_experiment`], on games already in memory.
pub fn run_loaded(cfg: &ExperimentConfig, games: &[LoadedGame], jobs: Option<usize>) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let pool = thread_pool(jobs)?;
    let cap = strategy_cap();
    let infos = pool.install(|| {
        games
            .par_iter()
            .map(|g| game_info(g, cfg.compute_exact, cap))
            .collect::<Result<Vec<_>>>()
    })?;
    let logs = run_cells(games, &infos, cfg.params, cfg.runs_per_game, cfg.base_seed, &pool)?;
    let report = ExperimentReport::from_logs(&logs)?;
    let outcome = ExperimentOutcome {
        games: infos,
        logs,
        report,
    };
    if let Some(dir) = &cfg.output {
        write_outputs(dir, &outcome)?;
    }
    Ok(outcome)
}

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const RUNS_JSONL: &str = "runs.jsonl";

/// Writes `report.csv`, `report.json` and `runs.jsonl` into `dir`.
pub fn write_outputs(dir: &Path, outcome: &ExperimentOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_logs(&dir.join(RUNS_JSONL), &outcome.logs)?;
    outcome.report.write_csv(&dir.join(REPORT_CSV))?;
    outcome.report.write_json(&dir.join(REPORT_JSON))?;
    Ok(())
}

pub fn write_logs(path: &Path, logs: &[RunLog]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for log in logs {
        serde_json::to_writer(&mut out, log)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_logs(path: &Path) -> Result<Vec<RunLog>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut logs = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let log = serde_json::from_str(&line)
            .map_err(|e| BenchError::Config(format!("{} line {}: {e}", path.display(), i + 1)))?;
        logs.push(log);
    }
    Ok(logs)
}
