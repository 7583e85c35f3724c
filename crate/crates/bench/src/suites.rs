//! The standard desk-scale suites.

use stackevo_core::GameKind;

use crate::config::{ExperimentConfig, GameSource, GeneratorSource, SweepLists};

fn config(games: Vec<GeneratorSource>, runs: usize, exact: bool) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(games.into_iter().map(GameSource::Generate).collect());
    cfg.runs_per_game = runs;
    cfg.compute_exact = exact;
    cfg
}

/// Ten 3-step warehouses, 9 to 12 vertices, for parameter tuning.
pub fn whg_tuning() -> ExperimentConfig {
    let games = vec![
        GeneratorSource::new(GameKind::Whg, 9, 3, 3, 500),
        GeneratorSource::new(GameKind::Whg, 10, 3, 3, 510),
        GeneratorSource::new(GameKind::Whg, 11, 3, 2, 520),
        GeneratorSource::new(GameKind::Whg, 12, 3, 2, 530),
    ];
    config(games, 20, false)
}

/// Twenty 12-vertex warehouses, half with 3 steps and half with 4.
pub fn whg_optimality() -> ExperimentConfig {
    let games = vec![
        GeneratorSource::new(GameKind::Whg, 12, 3, 10, 100),
        GeneratorSource::new(GameKind::Whg, 12, 4, 10, 200),
    ];
    config(games, 30, true)
}

/// Ten 5-vertex, 3-round FlipIt games over the chain, tree and mesh presets.
pub fn fig_optimality() -> ExperimentConfig {
    let games = vec![
        GeneratorSource::new(GameKind::Fig, 5, 3, 4, 300).with_preset("chain"),
        GeneratorSource::new(GameKind::Fig, 5, 3, 3, 310).with_preset("tree"),
        GeneratorSource::new(GameKind::Fig, 5, 3, 3, 320).with_preset("mesh"),
    ];
    config(games, 30, true)
}

/// Ten width-3 search games, five with 2 steps and five with 3.
pub fn seg_quality() -> ExperimentConfig {
    let games = vec![
        GeneratorSource::new(GameKind::Seg, 3, 2, 5, 400),
        GeneratorSource::new(GameKind::Seg, 3, 3, 5, 410),
    ];
    config(games, 30, true)
}

/// The search suite swept over population sizes.
pub fn seg_population(runs: usize) -> ExperimentConfig {
    let mut cfg = seg_quality();
    cfg.runs_per_game = runs;
    cfg.sweep = Some(SweepLists {
        p_size: vec![50, 100, 200, 500],
        ..SweepLists::default()
    });
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_games;

    #[test]
    fn suites_have_the_stated_sizes() {
        for (cfg, n) in [(whg_tuning(), 10), (whg_optimality(), 20), (fig_optimality(), 10), (seg_quality(), 10)] {
            cfg.validate().unwrap();
            assert_eq!(load_games(&cfg.games).unwrap().len(), n);
        }
        seg_population(5).validate().unwrap();
    }
}
