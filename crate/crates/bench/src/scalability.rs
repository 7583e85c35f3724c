//! Mean solver and oracle times grouped by horizon and by tree-size decade.

use serde::{Deserialize, Serialize};

use crate::experiment::{GameInfo, RunLog};
use crate::report::mean;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    /// Horizon, or the decade exponent `round(log10(tree size))`.
    pub key: i64,
    pub games: usize,
    pub mean_tree_size: f64,
    pub easg_time_mean_s: f64,
    /// Over the games the oracle solved; absent if it solved none.
    pub oracle_time_mean_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityTable {
    pub by_steps: Vec<TimingRow>,
    pub by_decade: Vec<TimingRow>,
}

pub fn tree_size_decade(tree_size: f64) -> i64 {
    tree_size.max(1.0).log10().round() as i64
}

fn rows(infos: &[GameInfo], logs: &[RunLog], key: impl Fn(&GameInfo) -> i64) -> Vec<TimingRow> {
    let mut keys: Vec<i64> = infos.iter().map(&key).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter()
        .map(|k| {
            let group: Vec<&GameInfo> = infos.iter().filter(|g| key(g) == k).collect();
            // Each game contributes its own mean run time.
            let easg: Vec<f64> = group
                .iter()
                .map(|g| {
                    let t: Vec<f64> = logs.iter().filter(|l| l.game_id == g.game_id).map(|l| l.wall_time_s).collect();
                    mean(&t)
                })
                .filter(|t| t.is_finite())
                .collect();
            let oracle: Vec<f64> = group.iter().filter_map(|g| g.oracle_time_s).collect();
            TimingRow {
                key: k,
                games: group.len(),
                mean_tree_size: mean(&group.iter().map(|g| g.tree_size).collect::<Vec<_>>()),
                easg_time_mean_s: mean(&easg),
                oracle_time_mean_s: (!oracle.is_empty()).then(|| mean(&oracle)),
            }
        })
        .collect()
}

pub fn scalability_table(infos: &[GameInfo], logs: &[RunLog]) -> ScalabilityTable {
    ScalabilityTable {
        by_steps: rows(infos, logs, |g| g.steps as i64),
        by_decade: rows(infos, logs, |g| tree_size_decade(g.tree_size)),
    }
}
