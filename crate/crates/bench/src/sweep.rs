//! One-parameter-at-a-time sweeps around the default parameters.

use serde::{Deserialize, Serialize};
use stackevo_core::EasgParams;

use crate::config::{load_games, ExperimentConfig, LoadedGame, SweepLists};
use crate::error::{BenchError, Result};
use crate::experiment::{game_info, run_cells, thread_pool, RunLog};
use crate::report::{mean, run_gap, OPTIMALITY_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub trials: usize,
    pub mean_fitness: f64,
    pub mean_time_s: f64,
    pub mean_generations: f64,
    /// Present when every trial's game has an equilibrium value.
    pub frac_optimal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub parameter: String,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub curves: Vec<SweepCurve>,
}

impl SweepReport {
    pub fn curve(&self, parameter: &str) -> Option<&SweepCurve> {
        self.curves.iter().find(|c| c.parameter == parameter)
    }
}

impl SweepCurve {
    pub fn at(&self, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.value == value)
    }
}

type Axis = (&'static str, Vec<f64>, fn(&mut EasgParams, f64));

/// `(name, values, setter)` for every non-empty list, in a fixed order.
fn axes(lists: &SweepLists) -> Vec<Axis> {
    let mut out: Vec<Axis> = Vec::new();
    let ints = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    if !lists.p_size.is_empty() {
        out.push(("p_size", ints(&lists.p_size), |p, v| p.p_size = v as usize));
    }
    if !lists.n_c.is_empty() {
        out.push(("n_c", ints(&lists.n_c), |p, v| p.n_c = v as usize));
    }
    if !lists.p_m.is_empty() {
        out.push(("p_m", lists.p_m.clone(), |p, v| p.p_m = v));
    }
    if !lists.p_c.is_empty() {
        out.push(("p_c", lists.p_c.clone(), |p, v| p.p_c = v));
    }
    if !lists.p_s.is_empty() {
        out.push(("p_s", lists.p_s.clone(), |p, v| p.p_s = v));
    }
    if !lists.elite.is_empty() {
        out.push(("elite", ints(&lists.elite), |p, v| p.elite = v as usize));
    }
    out
}

pub fn summarize(value: f64, logs: &[RunLog]) -> SweepPoint {
    let gaps: Option<Vec<f64>> = logs.iter().map(run_gap).collect();
    SweepPoint {
        value,
        trials: logs.len(),
        mean_fitness: mean(&logs.iter().map(|l| l.best_fitness).collect::<Vec<_>>()),
        mean_time_s: mean(&logs.iter().map(|l| l.wall_time_s).collect::<Vec<_>>()),
        mean_generations: mean(&logs.iter().map(|l| l.generations_run as f64).collect::<Vec<_>>()),
        frac_optimal: gaps
            .map(|g| g.iter().filter(|&&x| x <= OPTIMALITY_TOLERANCE).count() as f64 / g.len() as f64),
    }
}

/// Runs the config once per swept value, other parameters held at
/// `cfg.params`. Every value sees the same games and run seeds.
pub fn parameter_sweep(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<SweepReport> {
    cfg.validate()?;
    let games = load_games(&cfg.games)?;
    sweep_loaded(cfg, &games, jobs)
}

pub fn sweep_loaded(cfg: &ExperimentConfig, games: &[LoadedGame], jobs: Option<usize>) -> Result<SweepReport> {
    cfg.validate()?;
    let lists = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| BenchError::Config("sweep mode needs a `sweep` section".into()))?;
    let pool = thread_pool(jobs)?;
    let cap = stackevo_core::strategy_cap();
    let infos = games
        .iter()
        .map(|g| game_info(g, cfg.compute_exact, cap))
        .collect::<Result<Vec<_>>>()?;
    let mut curves = Vec::new();
    for (name, values, set) in axes(lists) {
        let mut points = Vec::new();
        for value in values {
            let mut params = cfg.params;
            set(&mut params, value);
            let logs = run_cells(games, &infos, params, cfg.runs_per_game, cfg.base_seed, &pool)?;
            points.push(summarize(value, &logs));
        }
        curves.push(SweepCurve {
            parameter: name.to_string(),
            points,
        });
    }
    Ok(SweepReport { curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GameSource, GeneratorSource};
    use stackevo_core::GameKind;

    #[test]
    fn one_curve_per_non_empty_list() {
        let mut cfg = ExperimentConfig::new(vec![GameSource::Generate(GeneratorSource::new(GameKind::Whg, 6, 2, 1, 0))]);
        cfg.runs_per_game = 2;
        cfg.params.p_size = 10;
        cfg.params.n_c = 3;
        cfg.sweep = Some(SweepLists {
            p_m: vec![0.0, 0.5],
            elite: vec![1],
            ..SweepLists::default()
        });
        let r = parameter_sweep(&cfg, Some(1)).unwrap();
        let names: Vec<_> = r.curves.iter().map(|c| c.parameter.as_str()).collect();
        assert_eq!(names, ["p_m", "elite"]);
        let pm = r.curve("p_m").unwrap();
        assert_eq!(pm.points.iter().map(|p| (p.value, p.trials)).collect::<Vec<_>>(), [(0.0, 2), (0.5, 2)]);
        assert!(pm.at(0.0).unwrap().frac_optimal.is_none());
    }

    #[test]
    fn sweep_needs_lists() {
        let cfg = ExperimentConfig::new(vec![GameSource::Generate(GeneratorSource::new(GameKind::Whg, 6, 2, 1, 0))]);
        assert!(parameter_sweep(&cfg, Some(1)).is_err());
    }
}
