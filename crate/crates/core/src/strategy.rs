//! Game-independent strategy types and the [`GameModel`] abstraction.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// Default upper bound on the size of an enumerated strategy space.
pub const DEFAULT_STRATEGY_CAP: usize = 10_000_000;

/// Environment variable overriding [`DEFAULT_STRATEGY_CAP`].
pub const CAP_ENV_VAR: &str = "STACKEVO_CAP";

/// Tolerance on probability sums.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Enumeration cap honoring the `STACKEVO_CAP` override.
pub fn strategy_cap() -> usize {
    std::env::var(CAP_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&c: &usize| c > 0)
        .unwrap_or(DEFAULT_STRATEGY_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Defender,
    Attacker,
}

/// Outcome of a play for both players.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PayoffPair {
    pub defender: f64,
    pub attacker: f64,
}

impl PayoffPair {
    pub const ZERO: PayoffPair = PayoffPair {
        defender: 0.0,
        attacker: 0.0,
    };

    pub fn new(defender: f64, attacker: f64) -> Self {
        PayoffPair { defender, attacker }
    }
}

/// Marker for concrete per-game pure strategy encodings. Equality is
/// structural, so two strategies are the same iff their encodings match.
pub trait PureStrategy: Clone + Eq + Hash + Ord + Debug + Send + Sync + Serialize {}

impl<T> PureStrategy for T where T: Clone + Eq + Hash + Ord + Debug + Send + Sync + Serialize {}

/// A finite two-player sequential security game.
///
/// The solver only needs a simulator, enumeration of the Attacker's pure
/// strategies, and the two random generators used by initialization and
/// mutation. Everything else (the exact oracle, reports) builds on these.
pub trait GameModel: Sync {
    type Defender: PureStrategy;
    type Attacker: PureStrategy;

    /// Number of time steps (rounds) `n`.
    fn steps(&self) -> usize;

    /// Plays one Defender pure strategy against one Attacker pure strategy.
    /// Both are assumed valid; use the `validate_*` methods on untrusted input.
    fn simulate(&self, defender: &Self::Defender, attacker: &Self::Attacker) -> PayoffPair;

    fn validate_defender(&self, strategy: &Self::Defender) -> Result<()>;

    fn validate_attacker(&self, strategy: &Self::Attacker) -> Result<()>;

    /// All Attacker pure strategies in the game's deterministic order.
    fn attacker_strategies(&self, cap: usize) -> Result<Vec<Self::Attacker>>;

    /// Defender pure strategies covering every distinct outcome of the game,
    /// in deterministic order. Games whose plans carry unreachable parts may
    /// return one representative per realization-equivalence class.
    fn defender_strategies(&self, cap: usize) -> Result<Vec<Self::Defender>>;

    /// Number of pure strategies of `role` (may be astronomically large).
    fn strategy_count(&self, role: Role) -> f64;

    /// Draws a pure strategy choosing uniformly among available actions at every step.
    fn random_defender<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Defender;

    /// Re-draws actions of `strategy` from `step` (1-based) through the last step.
    fn resample_suffix<R: Rng + ?Sized>(
        &self,
        strategy: &Self::Defender,
        step: usize,
        rng: &mut R,
    ) -> Self::Defender;
}

/// A finite ordered set of pure strategies for one role.
#[derive(Debug, Clone)]
pub struct StrategySpace<S> {
    pub role: Role,
    pub strategies: Vec<S>,
}

impl<S: PureStrategy> StrategySpace<S> {
    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }
}

/// A Defender mixed strategy: pure strategies with positive probabilities
/// summing to one, without duplicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chromosome<S> {
    entries: Vec<(S, f64)>,
}

impl<S: PureStrategy> Chromosome<S> {
    /// Builds a chromosome, checking every invariant.
    pub fn new(entries: Vec<(S, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(GameError::validation("chromosome has no entries"));
        }
        let mut sum = 0.0;
        for (i, (_, p)) in entries.iter().enumerate() {
            if !p.is_finite() || *p <= 0.0 || *p > 1.0 + PROB_TOLERANCE {
                return Err(GameError::validation(format!(
                    "entry {i} has probability {p} outside (0, 1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(GameError::validation(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        let mut seen = HashMap::with_capacity(entries.len());
        for (i, (s, _)) in entries.iter().enumerate() {
            if let Some(j) = seen.insert(s, i) {
                return Err(GameError::validation(format!(
                    "entries {j} and {i} hold the same pure strategy"
                )));
            }
        }
        Ok(Chromosome { entries })
    }

    /// Single-support chromosome playing `strategy` with probability one.
    pub fn pure(strategy: S) -> Self {
        Chromosome {
            entries: vec![(strategy, 1.0)],
        }
    }

    pub fn entries(&self) -> &[(S, f64)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(S, f64)> {
        self.entries
    }

    /// Number of pure strategies in the support (`l_q`).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn strategies(&self) -> impl Iterator<Item = &S> {
        self.entries.iter().map(|(s, _)| s)
    }

    /// Entries sorted by strategy: a permutation-independent encoding.
    pub fn canonical(&self) -> Vec<(S, f64)> {
        let mut sorted = self.entries.clone();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        sorted
    }
}

/// Merges equal pure strategies, drops zero-probability entries and rescales
/// probabilities to sum to one. Entry order follows first occurrence.
pub fn coalesce_and_normalize<S: PureStrategy>(entries: Vec<(S, f64)>) -> Result<Chromosome<S>> {
    if entries.is_empty() {
        return Err(GameError::validation("cannot normalize an empty chromosome"));
    }
    let mut index: HashMap<S, usize> = HashMap::with_capacity(entries.len());
    let mut merged: Vec<(S, f64)> = Vec::with_capacity(entries.len());
    for (s, p) in entries {
        if !p.is_finite() || p < 0.0 {
            return Err(GameError::validation(format!(
                "probability {p} is negative or not finite"
            )));
        }
        match index.get(&s) {
            Some(&i) => merged[i].1 += p,
            None => {
                index.insert(s.clone(), merged.len());
                merged.push((s, p));
            }
        }
    }
    merged.retain(|(_, p)| *p > 0.0);
    let total: f64 = merged.iter().map(|(_, p)| p).sum();
    if merged.is_empty() || total <= 0.0 {
        return Err(GameError::validation("all probabilities are zero"));
    }
    if total != 1.0 {
        for (_, p) in merged.iter_mut() {
            *p /= total;
        }
    }
    Ok(Chromosome { entries: merged })
}
