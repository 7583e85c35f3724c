//! The evolutionary loop: initialization, crossover, mutation, evaluation,
//! elitist binary-tournament selection, and the two-part stopping rule.
//!
//! All random draws come from one ChaCha8 stream consumed in a fixed order
//! (crossover, then mutation, then selection), so a seed fully determines a
//! run regardless of how evaluation is scheduled.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::response::Evaluator;
use crate::strategy::{coalesce_and_normalize, strategy_cap, Chromosome, GameModel, PureStrategy};

/// Best fitness must grow by more than this to reset the stall counter.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EasgParams {
    /// Population size.
    pub p_size: usize,
    /// Generation limit.
    pub n_g: usize,
    /// Generations without improvement before stopping.
    pub n_c: usize,
    /// Mutation rate.
    pub p_m: f64,
    /// Crossover rate.
    pub p_c: f64,
    /// Selection pressure.
    pub p_s: f64,
    /// Elite count.
    pub elite: usize,
}

impl Default for EasgParams {
    fn default() -> Self {
        EasgParams {
            p_size: 100,
            n_g: 1000,
            n_c: 20,
            p_m: 0.5,
            p_c: 0.8,
            p_s: 0.9,
            elite: 2,
        }
    }
}

impl EasgParams {
    pub fn validate(&self) -> Result<()> {
        // Tournaments need two distinct individuals.
        if self.p_size < 2 {
            return Err(GameError::invalid(format!("p_size must be at least 2, got {}", self.p_size)));
        }
        if self.n_g == 0 || self.n_c == 0 {
            return Err(GameError::invalid("n_g and n_c must be positive"));
        }
        if !(0.0..=1.0).contains(&self.p_m) {
            return Err(GameError::invalid(format!("p_m must lie in [0, 1], got {}", self.p_m)));
        }
        if !(0.0..=1.0).contains(&self.p_c) {
            return Err(GameError::invalid(format!("p_c must lie in [0, 1], got {}", self.p_c)));
        }
        if !(0.5..=1.0).contains(&self.p_s) {
            return Err(GameError::invalid(format!("p_s must lie in [0.5, 1], got {}", self.p_s)));
        }
        if self.elite > self.p_size {
            return Err(GameError::invalid(format!(
                "elite count {} exceeds population size {}",
                self.elite, self.p_size
            )));
        }
        Ok(())
    }
}

/// Fitness summary of one generation's evaluated pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// Best fitness found so far (non-decreasing).
    pub best: f64,
    pub mean: f64,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult<S> {
    pub best: Chromosome<S>,
    pub best_fitness: f64,
    pub generations_run: usize,
    pub history: Vec<GenerationStats>,
    /// Seconds.
    pub wall_time: f64,
    pub seed: u64,
}

impl<S: PureStrategy> RunResult<S> {
    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.best == other.best
            && self.best_fitness.to_bits() == other.best_fitness.to_bits()
            && self.generations_run == other.generations_run
            && self.history == other.history
            && self.seed == other.seed
    }
}

/// `p_size` single-support chromosomes drawn by the game's uniform generator.
pub fn init_population<G: GameModel, R: Rng + ?Sized>(
    game: &G,
    params: &EasgParams,
    rng: &mut R,
) -> Vec<Chromosome<G::Defender>> {
    (0..params.p_size)
        .map(|_| Chromosome::pure(game.random_defender(rng)))
        .collect()
}

/// Merges two parents with halved probabilities, then prunes every entry but
/// the most probable one with probability `(1 - p)^2` and renormalizes.
pub fn crossover_pair<S: PureStrategy, R: Rng + ?Sized>(
    a: &Chromosome<S>,
    b: &Chromosome<S>,
    rng: &mut R,
) -> Chromosome<S> {
    let mut merged: Vec<(S, f64)> = Vec::with_capacity(a.len() + b.len());
    for (s, p) in a.entries().iter().chain(b.entries()) {
        let half = p / 2.0;
        match merged.iter_mut().find(|(t, _)| t == s) {
            Some(entry) => entry.1 += half,
            None => merged.push((s.clone(), half)),
        }
    }
    let mut keep_index = 0;
    for (i, (_, p)) in merged.iter().enumerate() {
        if *p > merged[keep_index].1 {
            keep_index = i;
        }
    }
    let kept: Vec<(S, f64)> = merged
        .into_iter()
        .enumerate()
        .filter(|(i, (_, p))| *i == keep_index || rng.gen::<f64>() >= (1.0 - p) * (1.0 - p))
        .map(|(_, e)| e)
        .collect();
    coalesce_and_normalize(kept).expect("the most probable entry always survives")
}

/// Picks `round(p_c * p_size)` distinct individuals, pairs them at random
/// (dropping one when the count is odd) and returns one offspring per pair.
pub fn crossover_phase<S: PureStrategy, R: Rng + ?Sized>(
    population: &[Chromosome<S>],
    params: &EasgParams,
    rng: &mut R,
) -> Vec<Chromosome<S>> {
    let wanted = ((params.p_c * params.p_size as f64).round() as usize).min(population.len());
    if wanted < 2 {
        return Vec::new();
    }
    let mut chosen = rand::seq::index::sample(rng, population.len(), wanted).into_vec();
    chosen.shuffle(rng);
    if chosen.len() % 2 == 1 {
        let drop = rng.gen_range(0..chosen.len());
        chosen.remove(drop);
    }
    chosen
        .chunks_exact(2)
        .map(|pair| crossover_pair(&population[pair[0]], &population[pair[1]], rng))
        .collect()
}

/// Re-draws one entry's actions from a random step to the last one.
pub fn mutate<G: GameModel, R: Rng + ?Sized>(
    chromosome: &Chromosome<G::Defender>,
    game: &G,
    rng: &mut R,
) -> Chromosome<G::Defender> {
    let mut entries = chromosome.entries().to_vec();
    let i = rng.gen_range(0..entries.len());
    let step = rng.gen_range(1..=game.steps());
    entries[i].0 = game.resample_suffix(&entries[i].0, step, rng);
    coalesce_and_normalize(entries).expect("probabilities stay positive")
}

/// Pool indices promoted to the next generation: the `elite` fittest first
/// (ties by pool order), then binary-tournament winners.
pub fn select_indices<R: Rng + ?Sized>(fitness: &[f64], params: &EasgParams, rng: &mut R) -> Result<Vec<usize>> {
    let n = fitness.len();
    if n < 2 {
        return Err(GameError::invalid(format!("selection needs a pool of at least 2, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));
    let mut next: Vec<usize> = order.into_iter().take(params.elite.min(params.p_size)).collect();
    while next.len() < params.p_size {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (better, worse) = if fitness[i] >= fitness[j] { (i, j) } else { (j, i) };
        next.push(if rng.gen::<f64>() < params.p_s { better } else { worse });
    }
    Ok(next)
}

/// [`select_indices`] applied to `(chromosome, fitness)` pairs.
pub fn selection<S: PureStrategy, R: Rng + ?Sized>(
    pool: &[(Chromosome<S>, f64)],
    params: &EasgParams,
    rng: &mut R,
) -> Result<Vec<Chromosome<S>>> {
    let fitness: Vec<f64> = pool.iter().map(|(_, f)| *f).collect();
    Ok(select_indices(&fitness, params, rng)?
        .into_iter()
        .map(|i| pool[i].0.clone())
        .collect())
}

struct Individual<S> {
    chromosome: Chromosome<S>,
    fitness: Option<f64>,
}

/// A running EASG instance. Call [`Easg::step`] until it returns `false`;
/// the best chromosome found so far is available at any point.
pub struct Easg<'g, G: GameModel> {
    params: EasgParams,
    rng: ChaCha8Rng,
    evaluator: Evaluator<'g, G>,
    population: Vec<Individual<G::Defender>>,
    best: Option<(Chromosome<G::Defender>, f64)>,
    stall: usize,
    history: Vec<GenerationStats>,
    seed: u64,
    started: Instant,
    done: bool,
}

impl<'g, G: GameModel> Easg<'g, G> {
    pub fn new(game: &'g G, params: EasgParams, seed: u64) -> Result<Self> {
        Self::with_cap(game, params, seed, strategy_cap())
    }

    pub fn with_cap(game: &'g G, params: EasgParams, seed: u64, cap: usize) -> Result<Self> {
        params.validate()?;
        let started = Instant::now();
        let evaluator = Evaluator::new(game, cap)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let population = init_population(game, &params, &mut rng)
            .into_iter()
            .map(|chromosome| Individual {
                chromosome,
                fitness: None,
            })
            .collect();
        Ok(Easg {
            params,
            rng,
            evaluator,
            population,
            best: None,
            stall: 0,
            history: Vec::new(),
            seed,
            started,
            done: false,
        })
    }

    /// Evaluate fresh chromosomes on the rayon pool (results are identical).
    pub fn parallel(mut self, parallel: bool) -> Self {
        self.evaluator = self.evaluator.with_parallel(parallel);
        self
    }

    pub fn generation(&self) -> usize {
        self.history.len()
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Best chromosome evaluated so far and its fitness.
    pub fn best(&self) -> Option<(&Chromosome<G::Defender>, f64)> {
        self.best.as_ref().map(|(c, f)| (c, *f))
    }

    /// Current population (the evaluated pool once the run has stopped).
    pub fn population(&self) -> impl Iterator<Item = &Chromosome<G::Defender>> {
        self.population.iter().map(|i| &i.chromosome)
    }

    /// Runs one generation. Returns `false` once a stopping rule has fired.
    pub fn step(&mut self) -> bool {
        if self.done {
            return false;
        }
        let game = self.evaluator.game();
        let parents: Vec<Chromosome<G::Defender>> =
            self.population.iter().map(|i| i.chromosome.clone()).collect();
        let offspring = crossover_phase(&parents, &self.params, &mut self.rng);
        let mut pool = std::mem::take(&mut self.population);
        pool.extend(offspring.into_iter().map(|chromosome| Individual {
            chromosome,
            fitness: None,
        }));

        for ind in pool.iter_mut() {
            if self.rng.gen::<f64>() < self.params.p_m {
                ind.chromosome = mutate(&ind.chromosome, game, &mut self.rng);
                ind.fitness = None;
            }
        }

        let fresh: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].fitness.is_none()).collect();
        let scores = {
            let refs: Vec<&Chromosome<G::Defender>> = fresh.iter().map(|&i| &pool[i].chromosome).collect();
            self.evaluator.fitness_many(&refs)
        };
        for (&i, f) in fresh.iter().zip(scores) {
            pool[i].fitness = Some(f);
        }
        let fitness: Vec<f64> = pool.iter().map(|i| i.fitness.expect("evaluated")).collect();

        let mut top = 0;
        for (i, &f) in fitness.iter().enumerate() {
            if f > fitness[top] {
                top = i;
            }
        }
        let improved = match &self.best {
            None => true,
            Some((_, best)) => fitness[top] > best + IMPROVEMENT_EPS,
        };
        if improved {
            self.best = Some((pool[top].chromosome.clone(), fitness[top]));
            self.stall = 0;
        } else {
            self.stall += 1;
        }
        let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;
        let min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
        self.history.push(GenerationStats {
            best: self.best.as_ref().map(|b| b.1).expect("set above"),
            mean,
            min,
        });

        if self.stall >= self.params.n_c || self.history.len() >= self.params.n_g {
            self.done = true;
            self.population = pool;
            return false;
        }
        let next = select_indices(&fitness, &self.params, &mut self.rng).expect("pool holds p_size >= 2 individuals");
        self.population = next
            .into_iter()
            .map(|i| Individual {
                chromosome: pool[i].chromosome.clone(),
                fitness: pool[i].fitness,
            })
            .collect();
        true
    }

    /// Runs to completion, or until `stop` is raised between generations.
    pub fn run_until(&mut self, stop: Option<&AtomicBool>) {
        while !stop.is_some_and(|s| s.load(Ordering::Relaxed)) && self.step() {}
    }

    pub fn finish(self) -> RunResult<G::Defender> {
        let wall_time = self.started.elapsed().as_secs_f64();
        let (best, best_fitness) = match self.best {
            Some(b) => b,
            None => {
                // Stopped before the first generation: report an initial individual.
                let mut ev = self.evaluator;
                let c = self.population[0].chromosome.clone();
                let f = ev.fitness(&c);
                (c, f)
            }
        };
        RunResult {
            best,
            best_fitness,
            generations_run: self.history.len(),
            history: self.history,
            wall_time,
            seed: self.seed,
        }
    }
}

/// Runs EASG to completion with the given seed.
pub fn run<G: GameModel>(game: &G, params: EasgParams, seed: u64) -> Result<RunResult<G::Defender>> {
    let mut easg = Easg::new(game, params, seed)?;
    easg.run_until(None);
    Ok(easg.finish())
}
