//! Per-game statistics and histograms, computed from run logs only.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stackevo_core::games::fig::normalize_defender_payoff;
use stackevo_core::io::write_canonical_json;
use stackevo_core::GameKind;

use crate::error::Result;
use crate::experiment::RunLog;

/// Gap at or below which a run counts as optimal.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-6;

pub const CSV_COLUMNS: [&str; 13] = [
    "game_id",
    "steps",
    "type",
    "sse_value",
    "best",
    "mean",
    "stddev",
    "gap_mean",
    "gap_max",
    "frac_optimal",
    "gen_median",
    "gen_max",
    "time_mean_s",
];

/// Upper bounds of the gap bins after the optimal bin `[0, tol]`.
pub const GAP_BIN_EDGES: [f64; 3] = [0.005, 0.02, 0.05];
/// Upper bounds (inclusive) of the generation bins; the last bin is open.
pub const GENERATION_BIN_EDGES: [usize; 5] = [30, 40, 60, 100, 200];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRow {
    pub game_id: String,
    pub steps: usize,
    #[serde(rename = "type")]
    pub kind: GameKind,
    pub sse_value: Option<f64>,
    pub best: f64,
    pub mean: f64,
    pub stddev: f64,
    pub gap_mean: Option<f64>,
    pub gap_max: Option<f64>,
    pub frac_optimal: Option<f64>,
    pub gen_median: f64,
    pub gen_max: usize,
    pub time_mean_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub label: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<Bin>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn count(&self, label: &str) -> Option<usize> {
        self.bins.iter().find(|b| b.label == label).map(|b| b.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub total_runs: usize,
    pub optimality_tolerance: f64,
    pub tree_size_proxy: String,
    pub gap_scale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<GameRow>,
    /// Over runs whose game has an equilibrium value.
    pub gap_histogram: Option<Histogram>,
    pub generation_histogram: Histogram,
    pub metadata: ReportMeta,
}

/// Gap of one run: raw for WHG and SEG, on the `[-1, 1]` scale for FIG.
pub fn run_gap(log: &RunLog) -> Option<f64> {
    let sse = log.sse_value?;
    match log.payoff_range {
        Some([lo, hi]) => {
            let a = normalize_defender_payoff(sse, lo, hi).ok()?;
            let b = normalize_defender_payoff(log.best_fitness, lo, hi).ok()?;
            Some(a - b)
        }
        None => Some(sse - log.best_fitness),
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation; exactly zero for constant samples.
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

pub fn median(xs: &[usize]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn gap_bin(gap: f64) -> usize {
    if gap <= OPTIMALITY_TOLERANCE {
        return 0;
    }
    1 + GAP_BIN_EDGES.iter().position(|&e| gap <= e).unwrap_or(GAP_BIN_EDGES.len())
}

fn gap_labels() -> Vec<String> {
    let mut labels = vec!["[0]".to_string()];
    let mut lo = 0.0;
    for e in GAP_BIN_EDGES {
        labels.push(format!("({lo}, {e}]"));
        lo = e;
    }
    labels.push(format!("({lo}, inf)"));
    labels
}

fn generation_bin(g: usize) -> usize {
    GENERATION_BIN_EDGES.iter().position(|&e| g <= e).unwrap_or(GENERATION_BIN_EDGES.len())
}

fn generation_labels() -> Vec<String> {
    let mut labels = vec![format!("<={}", GENERATION_BIN_EDGES[0])];
    for w in GENERATION_BIN_EDGES.windows(2) {
        labels.push(format!("{}-{}", w[0] + 1, w[1]));
    }
    labels.push(format!(">{}", GENERATION_BIN_EDGES[GENERATION_BIN_EDGES.len() - 1]));
    labels
}

fn histogram(labels: Vec<String>, bins: impl Iterator<Item = usize>) -> Histogram {
    let mut counts = vec![0; labels.len()];
    for b in bins {
        counts[b] += 1;
    }
    Histogram {
        bins: labels.into_iter().zip(counts).map(|(label, count)| Bin { label, count }).collect(),
    }
}

impl ExperimentReport {
    /// Pure function of the logs: games appear in first-seen order.
    pub fn from_logs(logs: &[RunLog]) -> Result<Self> {
        let mut order: Vec<&str> = Vec::new();
        for l in logs {
            if !order.contains(&l.game_id.as_str()) {
                order.push(&l.game_id);
            }
        }
        let rows = order
            .iter()
            .map(|id| {
                let runs: Vec<&RunLog> = logs.iter().filter(|l| l.game_id == *id).collect();
                let first = runs[0];
                let fit: Vec<f64> = runs.iter().map(|l| l.best_fitness).collect();
                let gens: Vec<usize> = runs.iter().map(|l| l.generations_run).collect();
                let times: Vec<f64> = runs.iter().map(|l| l.wall_time_s).collect();
                let gaps: Option<Vec<f64>> = runs.iter().map(|l| run_gap(l)).collect();
                GameRow {
                    game_id: first.game_id.clone(),
                    steps: first.steps,
                    kind: first.kind,
                    sse_value: first.sse_value,
                    best: fit.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    mean: mean(&fit),
                    stddev: stddev(&fit),
                    gap_mean: gaps.as_ref().map(|g| mean(g)),
                    gap_max: gaps.as_ref().map(|g| g.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                    frac_optimal: gaps
                        .as_ref()
                        .map(|g| g.iter().filter(|&&x| x <= OPTIMALITY_TOLERANCE).count() as f64 / g.len() as f64),
                    gen_median: median(&gens),
                    gen_max: gens.iter().copied().max().unwrap_or(0),
                    time_mean_s: mean(&times),
                }
            })
            .collect();
        let gaps: Vec<f64> = logs.iter().filter_map(run_gap).collect();
        let gap_histogram = (!gaps.is_empty()).then(|| histogram(gap_labels(), gaps.iter().map(|&g| gap_bin(g))));
        let generation_histogram = histogram(generation_labels(), logs.iter().map(|l| generation_bin(l.generations_run)));
        Ok(ExperimentReport {
            rows,
            gap_histogram,
            generation_histogram,
            metadata: ReportMeta {
                total_runs: logs.len(),
                optimality_tolerance: OPTIMALITY_TOLERANCE,
                tree_size_proxy: "defender pure strategies x attacker pure strategies".into(),
                gap_scale: "fig gaps on defender payoffs normalized to [-1, 1]; whg and seg gaps raw".into(),
            },
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        Ok(write_canonical_json(path, self)?)
    }

    /// Mean gap over every run with an equilibrium value.
    pub fn overall_gap_mean(&self, logs: &[RunLog]) -> Option<f64> {
        let gaps: Vec<f64> = logs.iter().filter_map(run_gap).collect();
        (!gaps.is_empty()).then(|| mean(&gaps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(game: &str, run: usize, best: f64, gens: usize, sse: Option<f64>) -> RunLog {
        RunLog {
            game_id: game.into(),
            kind: GameKind::Whg,
            steps: 3,
            run,
            seed: run as u64,
            best_fitness: best,
            generations_run: gens,
            wall_time_s: 0.5,
            history: vec![],
            sse_value: sse,
            payoff_range: None,
            tree_size: 100.0,
        }
    }

    #[test]
    fn one_run_without_oracle_leaves_gaps_empty() {
        let r = ExperimentReport::from_logs(&[log("g", 0, 0.25, 21, None)]).unwrap();
        assert_eq!(r.rows.len(), 1);
        let row = &r.rows[0];
        assert_eq!((row.best, row.mean, row.stddev), (0.25, 0.25, 0.0));
        assert_eq!((row.gap_mean, row.gap_max, row.frac_optimal), (None, None, None));
        assert!(r.gap_histogram.is_none());
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(csv.lines().nth(1).unwrap(), "g,3,whg,,0.25,0.25,0.0,,,,21.0,21,0.5");
    }

    #[test]
    fn statistics_by_hand() {
        let logs = [
            log("a", 0, 1.0, 10, Some(1.0)),
            log("a", 1, 0.5, 31, Some(1.0)),
            log("a", 2, 0.99, 45, Some(1.0)),
            log("a", 3, 1.0, 250, Some(1.0)),
        ];
        let r = ExperimentReport::from_logs(&logs).unwrap();
        let row = &r.rows[0];
        assert_eq!(row.best, 1.0);
        assert!((row.mean - 0.8725).abs() < 1e-12);
        // Deviations 0.1275, -0.3725, 0.1175, 0.1275.
        let var = (0.1275f64.powi(2) * 2.0 + 0.3725f64.powi(2) + 0.1175f64.powi(2)) / 4.0;
        assert!((row.stddev - var.sqrt()).abs() < 1e-12);
        assert_eq!(row.frac_optimal, Some(0.5));
        assert_eq!(row.gap_max, Some(0.5));
        assert_eq!(row.gen_median, 38.0);
        assert_eq!(row.gen_max, 250);
        let gaps = r.gap_histogram.unwrap();
        assert_eq!(gaps.count("[0]"), Some(2));
        assert_eq!(gaps.count("(0.005, 0.02]"), Some(1));
        assert_eq!(gaps.count("(0.05, inf)"), Some(1));
        assert_eq!(gaps.total(), 4);
        let gens = &r.generation_histogram;
        assert_eq!(gens.bins.iter().map(|b| b.count).collect::<Vec<_>>(), [1, 1, 1, 0, 0, 1]);
        assert_eq!(gens.bins[1].label, "31-40");
    }

    #[test]
    fn fig_gaps_use_the_normalized_scale() {
        let mut l = log("f", 0, 3.0, 5, Some(4.0));
        l.payoff_range = Some([0.0, 8.0]);
        // 4 -> 0, 3 -> -0.25.
        assert_eq!(run_gap(&l), Some(0.25));
    }

    #[test]
    fn bin_boundaries() {
        assert_eq!(gap_bin(0.0), 0);
        assert_eq!(gap_bin(1e-6), 0);
        assert_eq!(gap_bin(0.005), 1);
        assert_eq!(gap_bin(0.0050001), 2);
        assert_eq!(gap_bin(0.05), 3);
        assert_eq!(gap_bin(7.0), 4);
        assert_eq!(generation_bin(30), 0);
        assert_eq!(generation_bin(31), 1);
        assert_eq!(generation_bin(200), 4);
        assert_eq!(generation_bin(201), 5);
    }
}
