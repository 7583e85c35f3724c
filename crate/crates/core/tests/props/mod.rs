//! Engine invariants as seed-driven checks, shared by the property tests and
//! the acceptance target. Each check builds its own random case from `seed`.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackevo_core::easg::{crossover_pair, mutate, select_indices};
use stackevo_core::games::fig::{FigPreset, FlipItGame};
use stackevo_core::games::seg::{SearchGame, SegPreset};
use stackevo_core::games::whg::WarehouseGame;
use stackevo_core::strategy::PROB_TOLERANCE;
use stackevo_core::{coalesce_and_normalize, Chromosome, Easg, EasgParams, GameModel, PureStrategy};

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A small random game of one of the three kinds.
pub enum Small {
    Whg(WarehouseGame),
    Seg(SearchGame),
    Fig(FlipItGame),
}

pub fn small_game(rng: &mut ChaCha8Rng) -> Small {
    match rng.gen_range(0..3) {
        0 => Small::Whg(WarehouseGame::generate(rng.gen_range(4..=9), rng.gen_range(1..=4), rng).unwrap()),
        1 => Small::Seg(SearchGame::generate(SegPreset::Narrow, rng.gen_range(1..=3), rng).unwrap()),
        _ => {
            let preset = FigPreset::ALL[rng.gen_range(0..3)];
            Small::Fig(FlipItGame::generate(preset, rng.gen_range(1..=5), rng.gen_range(1..=3), rng).unwrap())
        }
    }
}

macro_rules! on_small {
    ($game:expr, $g:ident => $body:expr) => {
        match $game {
            Small::Whg($g) => $body,
            Small::Seg($g) => $body,
            Small::Fig($g) => $body,
        }
    };
}

fn random_chromosome<G: GameModel>(game: &G, rng: &mut ChaCha8Rng) -> Chromosome<G::Defender> {
    let k = rng.gen_range(1..=6);
    let entries = (0..k)
        .map(|_| (game.random_defender(rng), rng.gen_range(0.01..1.0)))
        .collect();
    coalesce_and_normalize(entries).unwrap()
}

fn well_formed<G: GameModel>(game: &G, c: &Chromosome<G::Defender>) -> Check {
    let sum: f64 = c.entries().iter().map(|(_, p)| p).sum();
    ensure((sum - 1.0).abs() <= PROB_TOLERANCE, || format!("probabilities sum to {sum}"))?;
    ensure(c.entries().iter().all(|(_, p)| *p > 0.0), || "non-positive probability".into())?;
    let distinct: HashSet<&G::Defender> = c.strategies().collect();
    ensure(distinct.len() == c.len(), || "duplicate pure strategies".into())?;
    for s in c.strategies() {
        game.validate_defender(s).map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Selection keeps the `elite` fittest, and a short run never loses its best.
pub fn elitism(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..40);
    // Few distinct values so ties are common.
    let fitness: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64).collect();
    let p_size = rng.gen_range(2..=n);
    let params = EasgParams {
        p_size,
        elite: rng.gen_range(1..=p_size),
        p_s: rng.gen_range(0.5..=1.0),
        ..EasgParams::default()
    };
    let next = select_indices(&fitness, &params, &mut rng).map_err(|e| e.to_string())?;
    ensure(next.len() == p_size, || format!("selected {} of {p_size}", next.len()))?;
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));
    ensure(next[..params.elite] == ranked[..params.elite], || {
        format!("elite {:?} is not the top {:?}", &next[..params.elite], &ranked[..params.elite])
    })?;

    let game = small_game(&mut rng);
    let params = EasgParams {
        p_size: rng.gen_range(2..=12),
        n_g: rng.gen_range(1..=12),
        n_c: rng.gen_range(1..=5),
        p_m: rng.gen_range(0.0..=1.0),
        p_c: rng.gen_range(0.0..=1.0),
        elite: 1,
        ..EasgParams::default()
    };
    let run_seed = rng.gen();
    on_small!(&game, g => {
        let result = stackevo_core::run(g, params, run_seed).map_err(|e| e.to_string())?;
        ensure(result.history.windows(2).all(|w| w[1].best >= w[0].best), || "history best decreased".into())?;
        ensure(result.history.last().map(|h| h.best) == Some(result.best_fitness), || "best is not the last record".into())?;
        ensure(result.generations_run <= params.n_g, || "generation limit exceeded".into())
    })
}

/// Offspring, mutants and every population member stay normalized and valid.
pub fn normalization(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let game = small_game(&mut rng);
    on_small!(&game, g => {
        let a = random_chromosome(g, &mut rng);
        let b = random_chromosome(g, &mut rng);
        well_formed(g, &crossover_pair(&a, &b, &mut rng))?;
        well_formed(g, &mutate(&a, g, &mut rng))?;
        let params = EasgParams { p_size: 6, n_g: 3, ..EasgParams::default() };
        let mut easg = Easg::new(g, params, rng.gen()).map_err(|e| e.to_string())?;
        loop {
            for c in easg.population() {
                well_formed(g, c)?;
            }
            if !easg.step() {
                break;
            }
        }
        Ok(())
    })
}

fn support_subset<S: PureStrategy>(child: &Chromosome<S>, a: &Chromosome<S>, b: &Chromosome<S>) -> Check {
    let parents: HashSet<&S> = a.strategies().chain(b.strategies()).collect();
    ensure(child.strategies().all(|s| parents.contains(s)), || "offspring strategy absent from both parents".into())?;
    // The most probable merged entry always survives.
    ensure(!child.is_empty(), || "empty offspring".into())
}

/// Crossover never invents pure strategies.
pub fn crossover_subset(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let game = small_game(&mut rng);
    on_small!(&game, g => {
        let a = random_chromosome(g, &mut rng);
        // Sharing strategies exercises the merge of duplicates.
        let b = if rng.gen_bool(0.3) { a.clone() } else { random_chromosome(g, &mut rng) };
        support_subset(&crossover_pair(&a, &b, &mut rng), &a, &b)
    })
}

/// Suffix resampling from step `t` leaves steps `1..t` untouched, and a
/// mutant differs from its parent in at most one pure strategy.
pub fn mutation_prefix(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let game = small_game(&mut rng);
    let kept = |before: &[usize], after: &[usize], upto: usize| before[..upto] == after[..upto];
    match &game {
        Small::Whg(g) => {
            let s = g.random_defender(&mut rng);
            let t = rng.gen_range(1..=g.steps());
            let m = g.resample_suffix(&s, t, &mut rng);
            g.validate_defender(&m).map_err(|e| e.to_string())?;
            ensure(kept(&s.0, &m.0, t - 1), || format!("WHG prefix before step {t} changed: {s:?} -> {m:?}"))?;
        }
        Small::Fig(g) => {
            let s = g.random_defender(&mut rng);
            let t = rng.gen_range(1..=g.steps());
            let m = g.resample_suffix(&s, t, &mut rng);
            g.validate_defender(&m).map_err(|e| e.to_string())?;
            ensure(kept(&s.0, &m.0, t - 1), || format!("FIG prefix before step {t} changed: {s:?} -> {m:?}"))?;
        }
        Small::Seg(g) => {
            let s = g.random_defender(&mut rng);
            let t = rng.gen_range(1..=g.steps());
            let m = g.resample_suffix(&s, t, &mut rng);
            g.validate_defender(&m).map_err(|e| e.to_string())?;
            for u in 0..g.units().len() {
                ensure(kept(&s.default[u], &m.default[u], t - 1), || format!("SEG default prefix of unit {u} changed"))?;
                for k in 0..g.branch_count() {
                    // Branch k covers steps tb+1..=n.
                    let (_, tb) = g.branch_key(k);
                    let upto = (t - 1).saturating_sub(tb);
                    ensure(kept(&s.branches[k][u], &m.branches[k][u], upto), || {
                        format!("SEG branch {k} prefix of unit {u} changed")
                    })?;
                }
            }
        }
    }
    on_small!(&game, g => {
        let c = random_chromosome(g, &mut rng);
        let m = mutate(&c, g, &mut rng);
        let parent: HashSet<&_> = c.strategies().collect();
        let fresh = m.strategies().filter(|s| !parent.contains(s)).count();
        ensure(fresh <= 1, || format!("mutation introduced {fresh} new strategies"))
    })
}
