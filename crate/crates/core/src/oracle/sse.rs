//! Exact Strong Stackelberg Equilibrium by the multiple-LPs method.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::lp::{lp_solve, Constraint, LpStatus, Relation};
use crate::error::{GameError, Result};
use crate::response::{select_best_response, TIE_TOLERANCE};
use crate::strategy::{coalesce_and_normalize, Chromosome, GameModel, PureStrategy};

/// Support entries below this probability are dropped from the answer.
pub const SUPPORT_EPS: f64 = 1e-9;

/// Dense payoff matrices over enumerated pure strategies.
/// Entry `(i, j)` is `simulate(defender_strategies[i], attacker_strategies[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrices<D, A> {
    pub defender_strategies: Vec<D>,
    pub attacker_strategies: Vec<A>,
    pub defender: Vec<Vec<f64>>,
    pub attacker: Vec<Vec<f64>>,
}

impl<D, A> PayoffMatrices<D, A> {
    pub fn rows(&self) -> usize {
        self.defender.len()
    }

    pub fn cols(&self) -> usize {
        self.attacker_strategies.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (r, c) = (self.defender_strategies.len(), self.cols());
        if r == 0 || c == 0 {
            return Err(GameError::validation("payoff matrices are empty"));
        }
        for (name, m) in [("defender", &self.defender), ("attacker", &self.attacker)] {
            if m.len() != r || m.iter().any(|row| row.len() != c) {
                return Err(GameError::validation(format!("{name} matrix is not {r}x{c}")));
            }
            if m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(GameError::validation(format!("{name} matrix has non-finite entries")));
            }
        }
        Ok(())
    }
}

/// Enumerates both strategy spaces and simulates every pair.
pub fn build_matrices<G: GameModel>(game: &G, cap: usize) -> Result<PayoffMatrices<G::Defender, G::Attacker>> {
    let attackers = game.attacker_strategies(cap)?;
    let defenders = game.defender_strategies(cap)?;
    let cells = defenders.len() as f64 * attackers.len() as f64;
    if cells > cap as f64 {
        return Err(GameError::Capacity { count: cells, cap });
    }
    let rows: Vec<(Vec<f64>, Vec<f64>)> = defenders
        .par_iter()
        .map(|d| attackers.iter().map(|a| game.simulate(d, a)).map(|p| (p.defender, p.attacker)).unzip())
        .collect();
    let (defender, attacker) = rows.into_iter().unzip();
    Ok(PayoffMatrices {
        defender_strategies: defenders,
        attacker_strategies: attackers,
        defender,
        attacker,
    })
}

/// `(min, max)` Defender payoff over all pure profiles.
pub fn defender_payoff_extrema<D, A>(m: &PayoffMatrices<D, A>) -> Result<(f64, f64)> {
    m.validate()?;
    let lo = m.defender.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = m.defender.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Whether the extrema leave no room for normalization.
pub fn is_degenerate((lo, hi): (f64, f64)) -> bool {
    lo >= hi
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleStats {
    /// Attacker columns after removing duplicates.
    pub distinct_columns: usize,
    /// Defender rows after removing duplicates.
    pub distinct_rows: usize,
    pub lps_solved: usize,
    pub shortcuts: usize,
    pub pruned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SseSolution<D, A> {
    pub value: f64,
    pub defender_mixed: Chromosome<D>,
    pub attacker_response: A,
    pub attacker_index: usize,
    pub stats: OracleStats,
}

struct Candidate {
    value: f64,
    column: usize,
    x: Vec<(usize, f64)>,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        self.value > other.value + TIE_TOLERANCE
            || (self.value >= other.value - TIE_TOLERANCE && self.column < other.column)
    }
}

fn first_index_by_key<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> Vec<usize> {
    let mut seen: HashSet<K> = HashSet::new();
    let mut kept = Vec::new();
    for (i, k) in keys.enumerate() {
        if seen.insert(k) {
            kept.push(i);
        }
    }
    kept
}

fn bits(v: impl Iterator<Item = f64>) -> Vec<u64> {
    v.map(|x| (x + 0.0).to_bits()).collect()
}

/// Solves one LP per Attacker column and keeps the best feasible one.
///
/// Duplicate rows and columns are removed first, columns are visited in
/// decreasing order of their best pure Defender payoff (an upper bound on
/// the LP value) and the scan stops once no remaining column can win.
pub fn solve_sse<D: PureStrategy, A: PureStrategy>(m: &PayoffMatrices<D, A>) -> Result<SseSolution<D, A>> {
    m.validate()?;
    let mut stats = OracleStats::default();
    let rows = first_index_by_key(
        (0..m.rows()).map(|i| (bits(m.defender[i].iter().copied()), bits(m.attacker[i].iter().copied()))),
    );
    let cols = first_index_by_key((0..m.cols()).map(|j| {
        (
            bits(m.defender.iter().map(|r| r[j])),
            bits(m.attacker.iter().map(|r| r[j])),
        )
    }));
    stats.distinct_rows = rows.len();
    stats.distinct_columns = cols.len();

    let upper: Vec<f64> = cols
        .iter()
        .map(|&j| rows.iter().map(|&i| m.defender[i][j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut order: Vec<usize> = (0..cols.len()).collect();
    order.sort_by(|&a, &b| upper[b].total_cmp(&upper[a]).then(a.cmp(&b)));

    let mut best: Option<Candidate> = None;
    for (pos, &c) in order.iter().enumerate() {
        let j = cols[c];
        let bound = Candidate {
            value: upper[c],
            column: j,
            x: Vec::new(),
        };
        if let Some(b) = &best {
            if !bound.beats(b) {
                if upper[c] < b.value - TIE_TOLERANCE {
                    stats.pruned += order.len() - pos;
                    break;
                }
                stats.pruned += 1;
                continue;
            }
        }

        // A row attaining the bound where column j is already a best response.
        let shortcut = rows.iter().copied().find(|&i| {
            m.defender[i][j] == upper[c] && cols.iter().all(|&k| m.attacker[i][j] >= m.attacker[i][k])
        });
        if let Some(i) = shortcut {
            stats.shortcuts += 1;
            let cand = Candidate {
                value: upper[c],
                column: j,
                x: vec![(i, 1.0)],
            };
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
            continue;
        }

        stats.lps_solved += 1;
        if let Some(cand) = column_lp(m, &rows, &cols, j)? {
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        }
    }

    let best = best.ok_or_else(|| GameError::Numerical("no Attacker column is a feasible best response".into()))?;
    let kept: Vec<(D, f64)> = best
        .x
        .iter()
        .filter(|(_, p)| *p >= SUPPORT_EPS)
        .map(|&(i, p)| (m.defender_strategies[i].clone(), p))
        .collect();
    let defender_mixed = coalesce_and_normalize(kept)?;

    // Report the response the game-level tie-break picks for the final mixture.
    let index_of: HashMap<&D, usize> = m.defender_strategies.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut att = vec![0.0; m.cols()];
    let mut def = vec![0.0; m.cols()];
    for (s, p) in defender_mixed.entries() {
        let i = index_of[s];
        for j in 0..m.cols() {
            att[j] += p * m.attacker[i][j];
            def[j] += p * m.defender[i][j];
        }
    }
    let attacker_index = select_best_response(&att, &def).expect("finite matrices");
    Ok(SseSolution {
        value: best.value,
        defender_mixed,
        attacker_response: m.attacker_strategies[attacker_index].clone(),
        attacker_index,
        stats,
    })
}

/// Best Defender mixture over `rows` under which column `j` is a best response.
fn column_lp<D, A>(m: &PayoffMatrices<D, A>, rows: &[usize], cols: &[usize], j: usize) -> Result<Option<Candidate>> {
    let mut constraints = vec![Constraint::new(vec![1.0; rows.len()], Relation::Eq, 1.0)];
    let mut seen = std::collections::HashSet::new();
    for &k in cols {
        if k == j {
            continue;
        }
        let diff: Vec<f64> = rows.iter().map(|&i| m.attacker[i][k] - m.attacker[i][j]).collect();
        // Rows where k never beats j are satisfied by every mixture.
        if diff.iter().all(|&d| d <= 0.0) {
            continue;
        }
        if seen.insert(bits(diff.iter().copied())) {
            constraints.push(Constraint::new(diff, Relation::Le, 0.0));
        }
    }
    let objective: Vec<f64> = rows.iter().map(|&i| m.defender[i][j]).collect();
    let lp = lp_solve(&objective, &constraints);
    match lp.status {
        LpStatus::Optimal => Ok(Some(Candidate {
            value: lp.objective,
            column: j,
            x: rows.iter().copied().zip(lp.x).filter(|(_, p)| *p > 0.0).collect(),
        })),
        LpStatus::Infeasible => Ok(None),
        status => Err(GameError::Numerical(format!("LP for Attacker column {j} ended with {status:?}"))),
    }
}

/// Builds the matrices and solves them.
pub fn solve_game<G: GameModel>(game: &G, cap: usize) -> Result<SseSolution<G::Defender, G::Attacker>> {
    solve_sse(&build_matrices(game, cap)?)
}
