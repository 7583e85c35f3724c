//! Expected payoffs, the Attacker's best response and chromosome fitness.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{GameError, Result};
use crate::strategy::{Chromosome, GameModel, PayoffPair};

/// Attacker expected utilities closer than this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// The Attacker's best pure response under Strong Stackelberg tie-breaking.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<A> {
    pub response: A,
    /// Position of `response` in the Attacker's enumeration order.
    pub index: usize,
    pub attacker_eu: f64,
    pub defender_eu: f64,
}

/// Σ p_i · simulate(π_i, attacker), accumulated in entry order.
pub fn expected_payoffs<G: GameModel>(
    chromosome: &Chromosome<G::Defender>,
    attacker: &G::Attacker,
    game: &G,
) -> Result<PayoffPair> {
    game.validate_attacker(attacker)?;
    for (i, s) in chromosome.strategies().enumerate() {
        game.validate_defender(s)
            .map_err(|e| GameError::validation(format!("chromosome entry {i}: {e}")))?;
    }
    Ok(mixed_payoffs(chromosome, attacker, game))
}

fn mixed_payoffs<G: GameModel>(
    chromosome: &Chromosome<G::Defender>,
    attacker: &G::Attacker,
    game: &G,
) -> PayoffPair {
    let mut acc = PayoffPair::ZERO;
    for (s, p) in chromosome.entries() {
        let out = game.simulate(s, attacker);
        acc.defender += p * out.defender;
        acc.attacker += p * out.attacker;
    }
    acc
}

/// Index of the SSE best response: maximal Attacker utility, ties within
/// [`TIE_TOLERANCE`] broken by larger Defender utility, then by lower index.
pub fn select_best_response(attacker_eu: &[f64], defender_eu: &[f64]) -> Option<usize> {
    let best_att = attacker_eu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !best_att.is_finite() {
        return None;
    }
    let mut chosen: Option<usize> = None;
    for (j, (&a, &d)) in attacker_eu.iter().zip(defender_eu).enumerate() {
        if a >= best_att - TIE_TOLERANCE {
            match chosen {
                Some(c) if defender_eu[c] >= d => {}
                _ => chosen = Some(j),
            }
        }
    }
    chosen
}

/// Scans every Attacker pure strategy against `chromosome`.
pub fn best_response<G: GameModel>(
    chromosome: &Chromosome<G::Defender>,
    game: &G,
    cap: usize,
) -> Result<BestResponse<G::Attacker>> {
    for (i, s) in chromosome.strategies().enumerate() {
        game.validate_defender(s)
            .map_err(|e| GameError::validation(format!("chromosome entry {i}: {e}")))?;
    }
    let attackers = game.attacker_strategies(cap)?;
    if attackers.is_empty() {
        return Err(GameError::validation("Attacker has no pure strategies"));
    }
    let payoffs: Vec<PayoffPair> = attackers
        .iter()
        .map(|a| mixed_payoffs(chromosome, a, game))
        .collect();
    let att: Vec<f64> = payoffs.iter().map(|p| p.attacker).collect();
    let def: Vec<f64> = payoffs.iter().map(|p| p.defender).collect();
    let index = select_best_response(&att, &def)
        .ok_or_else(|| GameError::Numerical("non-finite Attacker utilities".into()))?;
    Ok(BestResponse {
        response: attackers[index].clone(),
        index,
        attacker_eu: att[index],
        defender_eu: def[index],
    })
}

/// Defender's payoff against the SSE best response.
pub fn evaluate_fitness<G: GameModel>(
    chromosome: &Chromosome<G::Defender>,
    game: &G,
    cap: usize,
) -> Result<f64> {
    best_response(chromosome, game, cap).map(|br| br.defender_eu)
}

/// Payoffs of one Defender pure strategy against every Attacker strategy.
#[derive(Debug)]
struct PayoffRow {
    defender: Vec<f64>,
    attacker: Vec<f64>,
}

/// Fitness evaluator caching one payoff row per Defender pure strategy.
///
/// Results are bit-identical to [`best_response`]: rows hold the same
/// simulate outputs and mixtures accumulate in chromosome entry order.
pub struct Evaluator<'g, G: GameModel> {
    game: &'g G,
    attackers: Vec<G::Attacker>,
    rows: HashMap<G::Defender, Arc<PayoffRow>>,
    max_rows: usize,
    parallel: bool,
}

/// Cached rows are dropped wholesale beyond this many stored payoffs.
const ROW_CACHE_BUDGET: usize = 1 << 23;

impl<'g, G: GameModel> Evaluator<'g, G> {
    pub fn new(game: &'g G, cap: usize) -> Result<Self> {
        let attackers = game.attacker_strategies(cap)?;
        if attackers.is_empty() {
            return Err(GameError::validation("Attacker has no pure strategies"));
        }
        let max_rows = (ROW_CACHE_BUDGET / attackers.len()).max(1024);
        Ok(Evaluator {
            game,
            attackers,
            rows: HashMap::new(),
            max_rows,
            parallel: false,
        })
    }

    /// Spread row computation and evaluation over the rayon pool.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn attackers(&self) -> &[G::Attacker] {
        &self.attackers
    }

    pub fn game(&self) -> &'g G {
        self.game
    }

    fn ensure_rows<'a, I>(&mut self, strategies: I)
    where
        I: IntoIterator<Item = &'a G::Defender>,
        G::Defender: 'a,
    {
        let mut missing: Vec<G::Defender> = Vec::new();
        let mut queued = std::collections::HashSet::new();
        let wanted: Vec<&G::Defender> = strategies.into_iter().collect();
        if self.rows.len() + wanted.len() > self.max_rows {
            self.rows.clear();
        }
        for s in wanted {
            if !self.rows.contains_key(s) && queued.insert(s) {
                missing.push(s.clone());
            }
        }
        let game = self.game;
        let attackers = &self.attackers;
        let compute = |s: &G::Defender| {
            let mut defender = Vec::with_capacity(attackers.len());
            let mut attacker = Vec::with_capacity(attackers.len());
            for a in attackers {
                let out = game.simulate(s, a);
                defender.push(out.defender);
                attacker.push(out.attacker);
            }
            Arc::new(PayoffRow { defender, attacker })
        };
        let rows: Vec<Arc<PayoffRow>> = if self.parallel {
            missing.par_iter().map(compute).collect()
        } else {
            missing.iter().map(compute).collect()
        };
        for (s, row) in missing.into_iter().zip(rows) {
            self.rows.insert(s, row);
        }
    }

    fn respond(&self, chromosome: &Chromosome<G::Defender>) -> (usize, f64, f64) {
        let m = self.attackers.len();
        let mut att = vec![0.0; m];
        let mut def = vec![0.0; m];
        for (s, p) in chromosome.entries() {
            let row = &self.rows[s];
            for j in 0..m {
                def[j] += p * row.defender[j];
                att[j] += p * row.attacker[j];
            }
        }
        let j = select_best_response(&att, &def).expect("finite payoffs");
        (j, att[j], def[j])
    }

    /// Best response to one chromosome (strategies assumed valid).
    pub fn best_response(&mut self, chromosome: &Chromosome<G::Defender>) -> BestResponse<G::Attacker> {
        self.ensure_rows(chromosome.strategies());
        let (index, attacker_eu, defender_eu) = self.respond(chromosome);
        BestResponse {
            response: self.attackers[index].clone(),
            index,
            attacker_eu,
            defender_eu,
        }
    }

    pub fn fitness(&mut self, chromosome: &Chromosome<G::Defender>) -> f64 {
        self.best_response(chromosome).defender_eu
    }

    /// Fitness of many chromosomes at once.
    pub fn fitness_many(&mut self, chromosomes: &[&Chromosome<G::Defender>]) -> Vec<f64> {
        self.ensure_rows(chromosomes.iter().flat_map(|c| c.strategies()));
        if self.parallel {
            chromosomes.par_iter().map(|c| self.respond(c).2).collect()
        } else {
            chromosomes.iter().map(|c| self.respond(c).2).collect()
        }
    }
}
