//! Instance files and canonical JSON.
//!
//! Every artifact is written with sorted keys, two-space indentation and
//! floats rounded to nine significant digits, so `load` followed by `save`
//! reproduces a saved file byte for byte.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{GameError, Result};
use crate::games::fig::{FigFile, FigPreset, FlipItGame};
use crate::games::round_sig9;
use crate::games::seg::{SearchGame, SegFile, SegPreset};
use crate::games::whg::{WarehouseGame, WhgFile};
use crate::strategy::{GameModel, Role};

pub fn ser_sig9_array<S: Serializer>(values: &[f64; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(|&x| round_sig9(x)))
}

pub fn ser_sig9_vec<S: Serializer>(values: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(|&x| round_sig9(x)))
}

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // `Value` maps are ordered by key.
    let tree = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&tree)?;
    text.push('\n');
    Ok(text)
}

pub fn write_canonical_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_canonical_json(value)?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Whg,
    Seg,
    Fig,
}

impl GameKind {
    pub const ALL: [GameKind; 3] = [GameKind::Whg, GameKind::Seg, GameKind::Fig];

    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::Whg => "whg",
            GameKind::Seg => "seg",
            GameKind::Fig => "fig",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameKind {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whg" => Ok(GameKind::Whg),
            "seg" => Ok(GameKind::Seg),
            "fig" => Ok(GameKind::Fig),
            other => Err(GameError::invalid(format!("unknown game type {other:?} (expected whg, seg or fig)"))),
        }
    }
}

/// Generator request. `size` is the vertex count for WHG and FIG and the
/// corridor width for SEG; `preset` selects the FIG graph family or a
/// named SEG width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    #[serde(rename = "type")]
    pub kind: GameKind,
    pub size: usize,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

/// Any of the three benchmark games.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyGame {
    Whg(WarehouseGame),
    Seg(SearchGame),
    Fig(FlipItGame),
}

/// Runs `$body` with `$g` bound to the concrete game inside an [`AnyGame`].
#[macro_export]
macro_rules! with_game {
    ($game:expr, $g:ident => $body:expr) => {
        match $game {
            $crate::io::AnyGame::Whg($g) => $body,
            $crate::io::AnyGame::Seg($g) => $body,
            $crate::io::AnyGame::Fig($g) => $body,
        }
    };
}

#[derive(Deserialize)]
struct TypePeek {
    #[serde(rename = "type")]
    kind: Option<String>,
}

impl AnyGame {
    pub fn kind(&self) -> GameKind {
        match self {
            AnyGame::Whg(_) => GameKind::Whg,
            AnyGame::Seg(_) => GameKind::Seg,
            AnyGame::Fig(_) => GameKind::Fig,
        }
    }

    pub fn steps(&self) -> usize {
        with_game!(self, g => g.steps())
    }

    pub fn strategy_count(&self, role: Role) -> f64 {
        with_game!(self, g => g.strategy_count(role))
    }

    /// Draws a random instance; fully determined by `seed`.
    pub fn generate(spec: &GenerateSpec, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match spec.kind {
            GameKind::Whg => Ok(AnyGame::Whg(WarehouseGame::generate(spec.size, spec.steps, &mut rng)?)),
            GameKind::Seg => {
                let preset = match &spec.preset {
                    Some(p) => p.parse()?,
                    None => SegPreset::from_width(spec.size).ok_or_else(|| {
                        GameError::invalid(format!("SEG size is the corridor width 2, 3 or 4, got {}", spec.size))
                    })?,
                };
                Ok(AnyGame::Seg(SearchGame::generate(preset, spec.steps, &mut rng)?))
            }
            GameKind::Fig => {
                let preset = match &spec.preset {
                    Some(p) => p.parse()?,
                    None => FigPreset::Mesh,
                };
                Ok(AnyGame::Fig(FlipItGame::generate(preset, spec.size, spec.steps, &mut rng)?))
            }
        }
    }

    /// Parses and validates an instance. Syntax and schema errors carry
    /// line and column; semantic errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let peek: TypePeek = serde_json::from_str(text)?;
        let kind = peek
            .kind
            .ok_or_else(|| GameError::validation("missing field `type`"))?
            .parse::<GameKind>()
            .map_err(|e| GameError::validation(e.to_string()))?;
        match kind {
            GameKind::Whg => Ok(AnyGame::Whg(WarehouseGame::from_file(serde_json::from_str::<WhgFile>(text)?)?)),
            GameKind::Seg => Ok(AnyGame::Seg(SearchGame::from_file(serde_json::from_str::<SegFile>(text)?)?)),
            GameKind::Fig => Ok(AnyGame::Fig(FlipItGame::from_file(serde_json::from_str::<FigFile>(text)?)?)),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyGame::Whg(g) => to_canonical_json(&g.to_file()),
            AnyGame::Seg(g) => to_canonical_json(&g.to_file()),
            AnyGame::Fig(g) => to_canonical_json(&g.to_file()),
        }
        .expect("instance files always serialize")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// One `(strategy, probability)` pair of a saved mixed strategy.
#[derive(Debug, Clone, Serialize)]
pub struct EntryRecord<'a, S> {
    pub strategy: &'a S,
    pub probability: f64,
}

pub fn entry_records<S>(entries: &[(S, f64)]) -> Vec<EntryRecord<'_, S>> {
    entries
        .iter()
        .map(|(strategy, probability)| EntryRecord {
            strategy,
            probability: *probability,
        })
        .collect()
}
