//! FlipIt Games, No-Info variant.
//!
//! Each round both players try to flip one node of a digraph. A flip succeeds
//! when the player controls a predecessor (or the node is an entry node) and
//! the node's owner is not flipping it in the same round. Every attempt costs
//! the node's flip cost; after each round players collect the rewards of the
//! nodes they own.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::round_sig9;
use crate::error::{GameError, Result};
use crate::strategy::{GameModel, PayoffPair, Role};

/// Ownership is tracked as a bitmask.
pub const MAX_VERTICES: usize = 64;

/// The node a player attempts to flip in each round.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlipSequence(pub Vec<usize>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigPreset {
    Chain,
    Tree,
    Mesh,
}

impl FigPreset {
    pub const ALL: [FigPreset; 3] = [FigPreset::Chain, FigPreset::Tree, FigPreset::Mesh];
}

impl std::str::FromStr for FigPreset {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(FigPreset::Chain),
            "tree" => Ok(FigPreset::Tree),
            "mesh" => Ok(FigPreset::Mesh),
            other => Err(GameError::invalid(format!("unknown FIG preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlipItGame {
    /// Predecessor bitmask per node.
    preds: Vec<u64>,
    edges: Vec<(usize, usize)>,
    entries: Vec<usize>,
    entry_mask: u64,
    cost: Vec<f64>,
    reward: Vec<f64>,
    rounds: usize,
}

impl FlipItGame {
    pub fn new(
        edges: Vec<(usize, usize)>,
        entries: Vec<usize>,
        cost: Vec<f64>,
        reward: Vec<f64>,
        rounds: usize,
    ) -> Result<Self> {
        let v = cost.len();
        if v == 0 || v > MAX_VERTICES {
            return Err(GameError::validation(format!("node count must be in 1..={MAX_VERTICES}")));
        }
        if reward.len() != v {
            return Err(GameError::validation("cost and reward lists differ in length"));
        }
        if rounds == 0 {
            return Err(GameError::validation("rounds must be at least 1"));
        }
        for (i, (&c, &r)) in cost.iter().zip(&reward).enumerate() {
            if !c.is_finite() || !r.is_finite() || c < 0.0 || r < 0.0 {
                return Err(GameError::validation(format!("node {i} needs finite, non-negative cost and reward")));
            }
        }
        let mut preds = vec![0u64; v];
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= v || b >= v {
                return Err(GameError::validation(format!("edge [{a}, {b}] references a missing node")));
            }
            if a == b {
                return Err(GameError::validation(format!("self-loop on node {a}")));
            }
            if preds[b] & (1 << a) == 0 {
                preds[b] |= 1 << a;
                canonical.push((a, b));
            }
        }
        canonical.sort_unstable();
        let mut entries = entries;
        entries.sort_unstable();
        entries.dedup();
        if entries.is_empty() {
            return Err(GameError::validation("at least one entry node is required"));
        }
        let mut entry_mask = 0u64;
        for &e in &entries {
            if e >= v {
                return Err(GameError::validation(format!("entry node {e} does not exist")));
            }
            entry_mask |= 1 << e;
        }
        Ok(FlipItGame {
            preds,
            edges: canonical,
            entries,
            entry_mask,
            cost,
            reward,
            rounds,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.cost.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn is_entry(&self, v: usize) -> bool {
        self.entry_mask & (1 << v) != 0
    }

    pub fn cost(&self, v: usize) -> f64 {
        self.cost[v]
    }

    pub fn reward(&self, v: usize) -> f64 {
        self.reward[v]
    }

    pub fn predecessors(&self, v: usize) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&p| self.preds[v] & (1 << p) != 0).collect()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Actions available to `role` in round `round` (1-based).
    pub fn actions(&self, role: Role, round: usize) -> Vec<usize> {
        if role == Role::Attacker && round == 1 {
            self.entries.clone()
        } else {
            (0..self.vertex_count()).collect()
        }
    }

    pub fn validate_sequence(&self, seq: &FlipSequence, role: Role) -> Result<()> {
        if seq.0.len() != self.rounds {
            return Err(GameError::validation(format!(
                "sequence has {} rounds, game has {}",
                seq.0.len(),
                self.rounds
            )));
        }
        for (i, &v) in seq.0.iter().enumerate() {
            if v >= self.vertex_count() {
                return Err(GameError::validation(format!("step {}: node {v} does not exist", i + 1)));
            }
            if i == 0 && role == Role::Attacker && !self.is_entry(v) {
                return Err(GameError::validation(format!("step 1: node {v} is not an entry node")));
            }
        }
        Ok(())
    }

    pub fn enumerate_strategies(&self, role: Role, cap: usize) -> Result<Vec<FlipSequence>> {
        let count = self.strategy_count(role);
        if count > cap as f64 {
            return Err(GameError::Capacity { count, cap });
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for round in 1..=self.rounds {
            let acts = self.actions(role, round);
            out = out
                .into_iter()
                .flat_map(|p| {
                    acts.iter().map(move |&a| {
                        let mut q = p.clone();
                        q.push(a);
                        q
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(FlipSequence).collect())
    }

    pub fn random_sequence<R: Rng + ?Sized>(&self, role: Role, rng: &mut R) -> FlipSequence {
        FlipSequence(
            (1..=self.rounds)
                .map(|r| {
                    let acts = self.actions(role, r);
                    acts[rng.gen_range(0..acts.len())]
                })
                .collect(),
        )
    }

    pub fn resample_sequence<R: Rng + ?Sized>(&self, seq: &FlipSequence, role: Role, step: usize, rng: &mut R) -> FlipSequence {
        let keep = step.clamp(1, self.rounds) - 1;
        let mut out = seq.0[..keep].to_vec();
        for r in keep + 1..=self.rounds {
            let acts = self.actions(role, r);
            out.push(acts[rng.gen_range(0..acts.len())]);
        }
        FlipSequence(out)
    }

    /// Random DAG instance with entry nodes of in-degree zero, rewards in
    /// `[1, 2]` and flip costs in `[0, 1]`.
    pub fn generate<R: Rng + ?Sized>(preset: FigPreset, n_vertices: usize, rounds: usize, rng: &mut R) -> Result<Self> {
        if n_vertices == 0 || n_vertices > MAX_VERTICES {
            return Err(GameError::invalid(format!("node count must be in 1..={MAX_VERTICES}")));
        }
        let (edges, entries) = match preset {
            FigPreset::Chain => ((1..n_vertices).map(|v| (v - 1, v)).collect(), vec![0]),
            FigPreset::Tree => ((1..n_vertices).map(|v| ((v - 1) / 2, v)).collect(), vec![0]),
            FigPreset::Mesh => {
                // Layers of two nodes, fully linked to the next layer.
                let mut edges = Vec::new();
                for v in 0..n_vertices {
                    let layer = v / 2;
                    for w in (layer + 1) * 2..((layer + 2) * 2).min(n_vertices) {
                        edges.push((v, w));
                    }
                }
                (edges, (0..n_vertices.min(2)).collect())
            }
        };
        let cost = (0..n_vertices).map(|_| round_sig9(rng.gen_range(0.0..=1.0))).collect();
        let reward = (0..n_vertices).map(|_| round_sig9(rng.gen_range(1.0..=2.0))).collect();
        FlipItGame::new(edges, entries, cost, reward, rounds)
    }

    pub fn to_file(&self) -> FigFile {
        FigFile {
            kind: "fig".into(),
            rounds: self.rounds,
            cost: self.cost.clone(),
            reward: self.reward.clone(),
            entries: self.entries.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_file(file: FigFile) -> Result<Self> {
        if file.kind != "fig" {
            return Err(GameError::validation(format!("expected type \"fig\", found {:?}", file.kind)));
        }
        FlipItGame::new(
            file.edges.iter().map(|e| (e[0], e[1])).collect(),
            file.entries,
            file.cost,
            file.reward,
            file.rounds,
        )
    }
}

/// Maps `[lo, hi]` affinely onto `[-1, 1]`.
pub fn normalize_defender_payoff(x: f64, lo: f64, hi: f64) -> Result<f64> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(GameError::invalid(format!("degenerate payoff range [{lo}, {hi}]")));
    }
    Ok(2.0 * (x - lo) / (hi - lo) - 1.0)
}

impl GameModel for FlipItGame {
    type Defender = FlipSequence;
    type Attacker = FlipSequence;

    fn steps(&self) -> usize {
        self.rounds
    }

    fn simulate(&self, defender: &FlipSequence, attacker: &FlipSequence) -> PayoffPair {
        let all = if self.vertex_count() == 64 { u64::MAX } else { (1u64 << self.vertex_count()) - 1 };
        let mut attacker_owned = 0u64;
        let mut score = PayoffPair::ZERO;
        for (&d, &a) in defender.0.iter().zip(&attacker.0) {
            let start = attacker_owned;
            let defender_owned = all & !start;
            let reachable = |owned: u64, x: usize| self.entry_mask & (1 << x) != 0 || self.preds[x] & owned != 0;
            let d_ok = reachable(defender_owned, d) && !(start & (1 << d) != 0 && a == d);
            let a_ok = reachable(start, a) && !(defender_owned & (1 << a) != 0 && d == a);
            if d_ok {
                attacker_owned &= !(1 << d);
            }
            if a_ok {
                attacker_owned |= 1 << a;
            }
            score.defender -= self.cost[d];
            score.attacker -= self.cost[a];
            for v in 0..self.vertex_count() {
                if attacker_owned & (1 << v) != 0 {
                    score.attacker += self.reward[v];
                } else {
                    score.defender += self.reward[v];
                }
            }
        }
        score
    }

    fn validate_defender(&self, strategy: &FlipSequence) -> Result<()> {
        self.validate_sequence(strategy, Role::Defender)
    }

    fn validate_attacker(&self, strategy: &FlipSequence) -> Result<()> {
        self.validate_sequence(strategy, Role::Attacker)
    }

    fn attacker_strategies(&self, cap: usize) -> Result<Vec<FlipSequence>> {
        self.enumerate_strategies(Role::Attacker, cap)
    }

    fn defender_strategies(&self, cap: usize) -> Result<Vec<FlipSequence>> {
        self.enumerate_strategies(Role::Defender, cap)
    }

    fn strategy_count(&self, role: Role) -> f64 {
        (1..=self.rounds).map(|r| self.actions(role, r).len() as f64).product()
    }

    fn random_defender<R: Rng + ?Sized>(&self, rng: &mut R) -> FlipSequence {
        self.random_sequence(Role::Defender, rng)
    }

    fn resample_suffix<R: Rng + ?Sized>(&self, strategy: &FlipSequence, step: usize, rng: &mut R) -> FlipSequence {
        self.resample_sequence(strategy, Role::Defender, step, rng)
    }
}

/// On-disk FIG instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub rounds: usize,
    #[serde(serialize_with = "crate::io::ser_sig9_vec")]
    pub cost: Vec<f64>,
    #[serde(serialize_with = "crate::io::ser_sig9_vec")]
    pub reward: Vec<f64>,
    pub entries: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}
