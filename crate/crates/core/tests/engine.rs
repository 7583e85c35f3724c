use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stackevo_core::easg::init_population;
use stackevo_core::games::fig::{FigPreset, FlipItGame};
use stackevo_core::games::whg::WarehouseGame;
use stackevo_core::games::VertexPayoffs;
use stackevo_core::oracle::solve_game;
use stackevo_core::{run, strategy_cap, Easg, EasgParams, GameModel, Role};

fn whg(vertices: usize, steps: usize, seed: u64) -> WarehouseGame {
    WarehouseGame::generate(vertices, steps, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// One node, one round: a single pure strategy for each side.
fn single_strategy_game() -> FlipItGame {
    FlipItGame::generate(FigPreset::Chain, 1, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
}

#[test]
fn initial_population_is_pure_and_sized() {
    let g = whg(9, 3, 4);
    let pop = init_population(&g, &EasgParams::default(), &mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(pop.len(), 100);
    assert!(pop.iter().all(|c| c.len() == 1 && c.entries()[0].1 == 1.0));
}

#[test]
fn single_strategy_population_is_identical() {
    let g = single_strategy_game();
    assert_eq!(g.strategy_count(Role::Defender), 1.0);
    let pop = init_population(&g, &EasgParams::default(), &mut ChaCha8Rng::seed_from_u64(1));
    assert!(pop.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn first_steps_are_uniform() {
    let g = whg(12, 3, 8);
    let moves = g.moves(g.defender_start());
    let params = EasgParams {
        p_size: 10_000,
        ..EasgParams::default()
    };
    let pop = init_population(&g, &params, &mut ChaCha8Rng::seed_from_u64(5));
    let n = pop.len() as f64;
    let p = 1.0 / moves.len() as f64;
    let sigma = (n * p * (1.0 - p)).sqrt();
    let mut chi2 = 0.0;
    for &m in &moves {
        let count = pop.iter().filter(|c| c.entries()[0].0 .0[0] == m).count() as f64;
        assert!((count - n * p).abs() <= 3.0 * sigma, "move {m}: {count} vs {}", n * p);
        chi2 += (count - n * p).powi(2) / (n * p);
    }
    // 99.9% quantile of chi-square with up to 4 degrees of freedom.
    assert!(chi2 < 18.47, "chi-square {chi2}");
}

#[test]
fn trivial_game_stops_after_stall_window() {
    let g = single_strategy_game();
    let params = EasgParams {
        n_c: 7,
        ..EasgParams::default()
    };
    let r = run(&g, params, 3).unwrap();
    assert_eq!(r.generations_run, params.n_c + 1);
    assert_eq!(r.best.len(), 1);
    let only = g.defender_strategies(10).unwrap().remove(0);
    assert_eq!(r.best.entries()[0].0, only);
}

#[test]
fn same_seed_same_result() {
    let g = whg(12, 4, 21);
    let params = EasgParams::default();
    let a = run(&g, params, 77).unwrap();
    let b = run(&g, params, 77).unwrap();
    assert!(a.same_outcome(&b));
    let mut seq = Easg::new(&g, params, 77).unwrap().parallel(false);
    seq.run_until(None);
    let mut par = Easg::new(&g, params, 77).unwrap().parallel(true);
    par.run_until(None);
    assert!(seq.finish().same_outcome(&par.finish()));
}

#[test]
fn without_variation_support_never_grows() {
    let g = whg(12, 3, 2);
    let params = EasgParams {
        p_m: 0.0,
        p_c: 0.0,
        n_g: 30,
        ..EasgParams::default()
    };
    let mut easg = Easg::new(&g, params, 9).unwrap();
    let initial: HashSet<_> = easg.population().flat_map(|c| c.strategies().cloned()).collect();
    while easg.step() {
        assert!(easg.population().all(|c| c.len() == 1 && initial.contains(&c.entries()[0].0)));
    }
}

/// Path 0-1-2-3, guard on 0, intruder on 3, target 1, two steps. The intruder
/// attacks iff the guard is on vertex 1 at step 2 with probability at most
/// 1/2, so the equilibrium mixes evenly and is worth 0.5 to the guard.
fn tiny_corridor() -> WarehouseGame {
    let p = VertexPayoffs::from_array([1.0, -1.0, 2.0, -1.0]);
    WarehouseGame::new(vec![p; 4], vec![false, true, false, false], vec![(0, 1), (1, 2), (2, 3)], 0, 3, 2).unwrap()
}

#[test]
fn tiny_warehouse_reaches_the_equilibrium() {
    let g = tiny_corridor();
    let sse = solve_game(&g, strategy_cap()).unwrap();
    assert!((sse.value - 0.5).abs() < 1e-9, "{}", sse.value);
    let hits = (0..30)
        .filter(|&r| (run(&g, EasgParams::default(), r).unwrap().best_fitness - sse.value).abs() <= 1e-6)
        .count();
    assert!(hits >= 29, "{hits}/30 runs reached {}", sse.value);
}

#[test]
fn anytime_best_is_available_between_generations() {
    let g = whg(9, 3, 1);
    let mut easg = Easg::new(&g, EasgParams::default(), 4).unwrap();
    assert!(easg.best().is_none());
    easg.step();
    let first = easg.best().map(|(_, f)| f).unwrap();
    let stop = std::sync::atomic::AtomicBool::new(true);
    easg.run_until(Some(&stop));
    assert_eq!(easg.generation(), 1);
    let r = easg.finish();
    assert_eq!(r.best_fitness, first);
}
