//! Experiment descriptions and game loading.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stackevo_core::io::GenerateSpec;
use stackevo_core::{AnyGame, EasgParams, GameKind};

use crate::error::{BenchError, Result};

/// Where an experiment's games come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GameSource {
    /// A saved instance; relative paths resolve against the config file.
    File(PathBuf),
    /// `count` generated instances with seeds `seed, seed + 1, ...`.
    Generate(GeneratorSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSource {
    #[serde(rename = "type")]
    pub kind: GameKind,
    pub size: usize,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl GeneratorSource {
    pub fn new(kind: GameKind, size: usize, steps: usize, count: usize, seed: u64) -> Self {
        GeneratorSource {
            kind,
            size,
            steps,
            preset: None,
            count,
            seed,
        }
    }

    pub fn with_preset(mut self, preset: &str) -> Self {
        self.preset = Some(preset.to_string());
        self
    }

    fn spec(&self) -> GenerateSpec {
        GenerateSpec {
            kind: self.kind,
            size: self.size,
            steps: self.steps,
            preset: self.preset.clone(),
        }
    }

    /// Stable id of the `i`-th instance, e.g. `whg-12-3-s40`.
    pub fn game_id(&self, seed: u64) -> String {
        match &self.preset {
            Some(p) => format!("{}-{}-{}-{}-s{}", self.kind, p, self.size, self.steps, seed),
            None => format!("{}-{}-{}-s{}", self.kind, self.size, self.steps, seed),
        }
    }
}

/// Values to sweep, one list per parameter. Empty lists are skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepLists {
    pub p_size: Vec<usize>,
    pub n_c: Vec<usize>,
    pub p_m: Vec<f64>,
    pub p_c: Vec<f64>,
    pub p_s: Vec<f64>,
    pub elite: Vec<usize>,
}

impl SweepLists {
    pub fn is_empty(&self) -> bool {
        self.p_size.is_empty()
            && self.n_c.is_empty()
            && self.p_m.is_empty()
            && self.p_c.is_empty()
            && self.p_s.is_empty()
            && self.elite.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub games: Vec<GameSource>,
    #[serde(default)]
    pub params: EasgParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepLists>,
    #[serde(default = "default_runs")]
    pub runs_per_game: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub compute_exact: bool,
    /// Directory receiving the report files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_runs() -> usize {
    30
}

impl ExperimentConfig {
    pub fn new(games: Vec<GameSource>) -> Self {
        ExperimentConfig {
            games,
            params: EasgParams::default(),
            sweep: None,
            runs_per_game: default_runs(),
            base_seed: 0,
            compute_exact: false,
            output: None,
        }
    }

    /// Reads a JSON config; relative game paths and `output` are taken
    /// relative to the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for g in cfg.games.iter_mut() {
            if let GameSource::File(p) = g {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        if let Some(out) = cfg.output.as_mut() {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.games.is_empty() {
            return Err(BenchError::Config("the game list is empty".into()));
        }
        if self.runs_per_game == 0 {
            return Err(BenchError::Config("runs_per_game must be at least 1".into()));
        }
        for g in &self.games {
            if let GameSource::Generate(s) = g {
                if s.count == 0 {
                    return Err(BenchError::Config(format!("generator entry for {} has count 0", s.kind)));
                }
            }
        }
        if self.sweep.as_ref().is_some_and(SweepLists::is_empty) {
            return Err(BenchError::Config("sweep mode needs at least one non-empty parameter list".into()));
        }
        self.params.validate()?;
        Ok(())
    }
}

/// An instance together with its report id.
#[derive(Debug, Clone)]
pub struct LoadedGame {
    pub id: String,
    pub game: AnyGame,
}

/// Loads or generates every game of the config, in order.
pub fn load_games(sources: &[GameSource]) -> Result<Vec<LoadedGame>> {
    let mut out = Vec::new();
    for src in sources {
        match src {
            GameSource::File(path) => {
                let game = AnyGame::load(path).map_err(|source| BenchError::Load {
                    path: path.display().to_string(),
                    source,
                })?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                out.push(LoadedGame { id, game });
            }
            GameSource::Generate(g) => {
                let spec = g.spec();
                for i in 0..g.count as u64 {
                    let seed = g.seed + i;
                    out.push(LoadedGame {
                        id: g.game_id(seed),
                        game: AnyGame::generate(&spec, seed)?,
                    });
                }
            }
        }
    }
    let mut ids: Vec<&str> = out.iter().map(|g| g.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(BenchError::Config(format!("duplicate game id {:?}", w[0])));
    }
    Ok(out)
}
