//! Search Games: several Defender units, each confined to its own vertex
//! subset, hunt an Attacker that leaves traces on a directed graph.
//!
//! A Defender pure strategy is a [`DefenderPlan`]: one default joint path plus
//! a joint continuation for every possible trace-discovery event `(v, t)`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use super::{bfs_distances, count_walks, enumerate_walks, round_sig9, VertexPayoffs, VertexRecord};
use crate::error::{GameError, Result};
use crate::strategy::{GameModel, PayoffPair, Role};

/// Longest supported game; trace bookkeeping uses one bit per step.
pub const MAX_STEPS: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub start: usize,
    /// Sorted allowed vertices.
    pub allowed: Vec<usize>,
}

/// The Attacker's walk: vertex at each step `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttackerWalk(pub Vec<usize>);

/// Contingent Defender plan.
///
/// `default[u]` is unit `u`'s path for steps `1..=n` while no trace has been
/// found. `branches[(t - 1) * V + v][u]` is unit `u`'s path for steps
/// `t+1..=n` after the first discovery happened at vertex `v` in step `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DefenderPlan {
    pub default: Vec<Vec<usize>>,
    pub branches: Vec<Vec<Vec<usize>>>,
}

/// Which list of a plan a mutation rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanList {
    Default,
    Branch { vertex: usize, step: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegPreset {
    Narrow,
    Medium,
    Wide,
}

impl SegPreset {
    pub const ALL: [SegPreset; 3] = [SegPreset::Narrow, SegPreset::Medium, SegPreset::Wide];

    /// Corridor width (vertices per layer).
    pub fn width(self) -> usize {
        match self {
            SegPreset::Narrow => 2,
            SegPreset::Medium => 3,
            SegPreset::Wide => 4,
        }
    }

    pub fn from_width(width: usize) -> Option<Self> {
        SegPreset::ALL.into_iter().find(|p| p.width() == width)
    }
}

impl std::str::FromStr for SegPreset {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "narrow" => Ok(SegPreset::Narrow),
            "medium" => Ok(SegPreset::Medium),
            "wide" => Ok(SegPreset::Wide),
            other => Err(GameError::invalid(format!("unknown SEG preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchGame {
    payoffs: Vec<VertexPayoffs>,
    targets: Vec<bool>,
    /// Sorted out-neighbours.
    out: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    attacker_start: usize,
    units: Vec<Unit>,
    allowed_mask: Vec<Vec<bool>>,
    steps: usize,
}

impl SearchGame {
    pub fn new(
        payoffs: Vec<VertexPayoffs>,
        targets: Vec<bool>,
        edges: Vec<(usize, usize)>,
        attacker_start: usize,
        units: Vec<Unit>,
        steps: usize,
    ) -> Result<Self> {
        let v = payoffs.len();
        if v == 0 || targets.len() != v {
            return Err(GameError::validation("vertex payoffs and target flags must be non-empty and equal in length"));
        }
        if steps == 0 || steps > MAX_STEPS {
            return Err(GameError::validation(format!("n must be in 1..={MAX_STEPS}")));
        }
        if attacker_start >= v {
            return Err(GameError::validation("attacker_start out of range"));
        }
        if targets[attacker_start] {
            return Err(GameError::validation("attacker_start must not be a target"));
        }
        if !targets.iter().any(|&t| t) {
            return Err(GameError::validation("at least one target is required"));
        }
        for (i, p) in payoffs.iter().enumerate() {
            if !p.is_finite() {
                return Err(GameError::validation(format!("vertex {i} has non-finite payoffs")));
            }
        }
        let mut out = vec![Vec::new(); v];
        for &(a, b) in &edges {
            if a >= v || b >= v {
                return Err(GameError::validation(format!("edge [{a}, {b}] references a missing vertex")));
            }
            if a == b {
                return Err(GameError::validation(format!("self-loop on vertex {a}")));
            }
            if !out[a].contains(&b) {
                out[a].push(b);
            }
        }
        for o in out.iter_mut() {
            o.sort_unstable();
        }
        let mut canonical: Vec<(usize, usize)> = out
            .iter()
            .enumerate()
            .flat_map(|(a, o)| o.iter().map(move |&b| (a, b)))
            .collect();
        canonical.sort_unstable();
        if units.is_empty() {
            return Err(GameError::validation("at least one Defender unit is required"));
        }
        let mut units = units;
        let mut allowed_mask = Vec::with_capacity(units.len());
        for (u, unit) in units.iter_mut().enumerate() {
            unit.allowed.sort_unstable();
            unit.allowed.dedup();
            let mut mask = vec![false; v];
            for &w in &unit.allowed {
                if w >= v {
                    return Err(GameError::validation(format!("unit {u} allows missing vertex {w}")));
                }
                mask[w] = true;
            }
            if unit.start >= v || !mask[unit.start] {
                return Err(GameError::validation(format!("unit {u} starts outside its allowed set")));
            }
            // Allowed sets must be strongly connected through allowed vertices.
            let sub: Vec<Vec<usize>> = (0..v)
                .map(|a| {
                    if mask[a] {
                        out[a].iter().copied().filter(|&b| mask[b]).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect();
            for &w in &unit.allowed {
                let d = bfs_distances(&sub, w);
                if unit.allowed.iter().any(|&x| d[x] == usize::MAX) {
                    return Err(GameError::validation(format!("unit {u} allowed set is not connected")));
                }
            }
            allowed_mask.push(mask);
        }
        Ok(SearchGame {
            payoffs,
            targets,
            out,
            edges: canonical,
            attacker_start,
            units,
            allowed_mask,
            steps,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.payoffs.len()
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn attacker_start(&self) -> usize {
        self.attacker_start
    }

    pub fn is_target(&self, v: usize) -> bool {
        self.targets[v]
    }

    pub fn payoffs(&self, v: usize) -> VertexPayoffs {
        self.payoffs[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of discovery events `(v, t)`, `t ∈ 1..n`.
    pub fn branch_count(&self) -> usize {
        self.vertex_count() * (self.steps - 1)
    }

    pub fn branch_index(&self, vertex: usize, step: usize) -> usize {
        (step - 1) * self.vertex_count() + vertex
    }

    /// `(vertex, step)` of a branch slot.
    pub fn branch_key(&self, index: usize) -> (usize, usize) {
        (index % self.vertex_count(), index / self.vertex_count() + 1)
    }

    /// Attacker moves from `v`: stay or follow an out-edge, ascending.
    pub fn attacker_moves(&self, v: usize) -> Vec<usize> {
        let mut m: Vec<usize> = self.out[v].clone();
        if let Err(pos) = m.binary_search(&v) {
            m.insert(pos, v);
        }
        m
    }

    /// Unit moves from `v`: stay or follow an out-edge into its allowed set.
    pub fn unit_moves(&self, unit: usize, v: usize) -> Vec<usize> {
        let mask = &self.allowed_mask[unit];
        let mut m: Vec<usize> = self.out[v].iter().copied().filter(|&w| mask[w]).collect();
        if let Err(pos) = m.binary_search(&v) {
            m.insert(pos, v);
        }
        m
    }

    fn is_unit_move(&self, unit: usize, from: usize, to: usize) -> bool {
        to < self.vertex_count()
            && self.allowed_mask[unit][to]
            && (from == to || self.out[from].binary_search(&to).is_ok())
    }

    fn check_unit_path(&self, unit: usize, from: usize, path: &[usize], first_step: usize, what: &str) -> Result<()> {
        let mut prev = from;
        for (i, &v) in path.iter().enumerate() {
            if !self.is_unit_move(unit, prev, v) {
                return Err(GameError::validation(format!(
                    "{what}, unit {unit}, step {}: vertex {v} is not a legal move from {prev}",
                    first_step + i
                )));
            }
            prev = v;
        }
        Ok(())
    }

    pub fn validate_plan(&self, plan: &DefenderPlan) -> Result<()> {
        let n = self.steps;
        if plan.default.len() != self.units.len() {
            return Err(GameError::validation(format!(
                "plan has {} unit paths, game has {} units",
                plan.default.len(),
                self.units.len()
            )));
        }
        for (u, path) in plan.default.iter().enumerate() {
            if path.len() != n {
                return Err(GameError::validation(format!("default path of unit {u} has {} steps, expected {n}", path.len())));
            }
            self.check_unit_path(u, self.units[u].start, path, 1, "default")?;
        }
        if plan.branches.len() != self.branch_count() {
            return Err(GameError::validation(format!(
                "plan has {} branches, expected {}",
                plan.branches.len(),
                self.branch_count()
            )));
        }
        for (k, branch) in plan.branches.iter().enumerate() {
            let (v, t) = self.branch_key(k);
            if branch.len() != self.units.len() {
                return Err(GameError::validation(format!("branch ({v}, {t}) has {} unit paths", branch.len())));
            }
            for (u, path) in branch.iter().enumerate() {
                if path.len() != n - t {
                    return Err(GameError::validation(format!(
                        "branch ({v}, {t}) unit {u} has {} steps, expected {}",
                        path.len(),
                        n - t
                    )));
                }
                let what = format!("branch ({v}, {t})");
                self.check_unit_path(u, plan.default[u][t - 1], path, t + 1, &what)?;
            }
        }
        Ok(())
    }

    pub fn validate_walk(&self, walk: &AttackerWalk) -> Result<()> {
        if walk.0.len() != self.steps {
            return Err(GameError::validation(format!("walk has {} steps, game has {}", walk.0.len(), self.steps)));
        }
        let mut prev = self.attacker_start;
        for (i, &v) in walk.0.iter().enumerate() {
            if v >= self.vertex_count() || !(v == prev || self.out[prev].binary_search(&v).is_ok()) {
                return Err(GameError::validation(format!(
                    "step {}: vertex {v} is not a legal move from {prev}",
                    i + 1
                )));
            }
            prev = v;
        }
        Ok(())
    }

    fn random_unit_path<R: Rng + ?Sized>(&self, unit: usize, from: usize, len: usize, rng: &mut R) -> Vec<usize> {
        let mut path = Vec::with_capacity(len);
        let mut at = from;
        for _ in 0..len {
            let m = self.unit_moves(unit, at);
            at = m[rng.gen_range(0..m.len())];
            path.push(at);
        }
        path
    }

    /// Draws the default paths and every branch continuation uniformly.
    pub fn random_plan<R: Rng + ?Sized>(&self, rng: &mut R) -> DefenderPlan {
        let n = self.steps;
        let default: Vec<Vec<usize>> = (0..self.units.len())
            .map(|u| self.random_unit_path(u, self.units[u].start, n, rng))
            .collect();
        let branches = (0..self.branch_count())
            .map(|k| {
                let (_, t) = self.branch_key(k);
                (0..self.units.len())
                    .map(|u| self.random_unit_path(u, default[u][t - 1], n - t, rng))
                    .collect()
            })
            .collect();
        DefenderPlan { default, branches }
    }

    pub fn random_walk<R: Rng + ?Sized>(&self, rng: &mut R) -> AttackerWalk {
        let mut walk = Vec::with_capacity(self.steps);
        let mut at = self.attacker_start;
        for _ in 0..self.steps {
            let m = self.attacker_moves(at);
            at = m[rng.gen_range(0..m.len())];
            walk.push(at);
        }
        AttackerWalk(walk)
    }

    /// Uniform choice over `{default} ∪ branch slots`.
    pub fn random_selector<R: Rng + ?Sized>(&self, rng: &mut R) -> PlanList {
        let k = rng.gen_range(0..=self.branch_count());
        if k == 0 {
            PlanList::Default
        } else {
            let (vertex, step) = self.branch_key(k - 1);
            PlanList::Branch { vertex, step }
        }
    }

    /// Re-draws one list of `plan` from `step` on. Other lists are untouched,
    /// except branches whose first move became illegal after a default change;
    /// those are redrawn for the affected unit.
    pub fn resample_list<R: Rng + ?Sized>(&self, plan: &DefenderPlan, list: PlanList, step: usize, rng: &mut R) -> DefenderPlan {
        let n = self.steps;
        let step = step.clamp(1, n);
        let mut out = plan.clone();
        match list {
            PlanList::Default => {
                for u in 0..self.units.len() {
                    let keep = step - 1;
                    let from = if keep == 0 { self.units[u].start } else { out.default[u][keep - 1] };
                    let tail = self.random_unit_path(u, from, n - keep, rng);
                    out.default[u].truncate(keep);
                    out.default[u].extend(tail);
                }
                for k in 0..self.branch_count() {
                    let (_, t) = self.branch_key(k);
                    for u in 0..self.units.len() {
                        let anchor = out.default[u][t - 1];
                        if !self.is_unit_move(u, anchor, out.branches[k][u][0]) {
                            out.branches[k][u] = self.random_unit_path(u, anchor, n - t, rng);
                        }
                    }
                }
            }
            PlanList::Branch { vertex, step: t } => {
                let k = self.branch_index(vertex, t);
                // The continuation covers steps t+1..=n.
                let keep = step.saturating_sub(t + 1);
                for u in 0..self.units.len() {
                    let from = if keep == 0 { out.default[u][t - 1] } else { out.branches[k][u][keep - 1] };
                    let tail = self.random_unit_path(u, from, n - t - keep, rng);
                    out.branches[k][u].truncate(keep);
                    out.branches[k][u].extend(tail);
                }
            }
        }
        out
    }

    pub fn enumerate_walks(&self, cap: usize) -> Result<Vec<AttackerWalk>> {
        let count = self.strategy_count(Role::Attacker);
        if count > cap as f64 {
            return Err(GameError::Capacity { count, cap });
        }
        Ok(enumerate_walks(self.attacker_start, self.steps, |v| self.attacker_moves(v))
            .into_iter()
            .map(AttackerWalk)
            .collect())
    }

    fn unit_walk_counts(&self) -> Vec<Vec<Vec<f64>>> {
        // counts[u][len][v]: unit-u walks of `len` steps from v.
        (0..self.units.len())
            .map(|u| {
                (0..=self.steps)
                    .map(|len| count_walks(self.vertex_count(), len, |v| self.unit_moves(u, v)))
                    .collect()
            })
            .collect()
    }

    fn joint_defaults(&self) -> Vec<Vec<Vec<usize>>> {
        let per_unit: Vec<Vec<Vec<usize>>> = (0..self.units.len())
            .map(|u| enumerate_walks(self.units[u].start, self.steps, |v| self.unit_moves(u, v)))
            .collect();
        cartesian(&per_unit)
    }

    fn joint_continuations(&self, default: &[Vec<usize>], t: usize) -> Vec<Vec<Vec<usize>>> {
        let per_unit: Vec<Vec<Vec<usize>>> = (0..self.units.len())
            .map(|u| enumerate_walks(default[u][t - 1], self.steps - t, |v| self.unit_moves(u, v)))
            .collect();
        cartesian(&per_unit)
    }

    /// Size of the full plan space: defaults times all branch continuations.
    fn full_plan_count(&self) -> f64 {
        let counts = self.unit_walk_counts();
        let n = self.steps;
        let mut total = 0.0;
        for default in self.joint_defaults() {
            let mut prod = 1.0;
            for k in 0..self.branch_count() {
                let (_, t) = self.branch_key(k);
                for (u, path) in default.iter().enumerate() {
                    prod *= counts[u][n - t][path[t - 1]];
                }
            }
            total += prod;
        }
        total
    }

    /// Every Defender plan: defaults × all branch continuations, in
    /// lexicographic order (default first, then branch slots ascending).
    pub fn enumerate_plans(&self, cap: usize) -> Result<Vec<DefenderPlan>> {
        let count = self.full_plan_count();
        if count > cap as f64 {
            return Err(GameError::Capacity { count, cap });
        }
        let mut out = Vec::with_capacity(count as usize);
        for default in self.joint_defaults() {
            let options: Vec<Vec<Vec<Vec<usize>>>> = (0..self.branch_count())
                .map(|k| self.joint_continuations(&default, self.branch_key(k).1))
                .collect();
            for branches in cartesian(&options) {
                out.push(DefenderPlan {
                    default: default.clone(),
                    branches,
                });
            }
        }
        Ok(out)
    }

    /// Branch slots that can fire under `default`: a unit stands on `v` at
    /// step `t`, with `2 ≤ t ≤ n-1` (no trace predates step 1).
    pub fn reachable_branches(&self, default: &[Vec<usize>]) -> Vec<usize> {
        let mut keys = BTreeSet::new();
        for t in 2..self.steps {
            for path in default {
                keys.insert(self.branch_index(path[t - 1], t));
            }
        }
        keys.into_iter().collect()
    }

    /// One plan per realization-equivalence class: unreachable branches are
    /// fixed to "every unit stays put", reachable ones range over all
    /// continuations. Every full plan has a payoff-identical member here.
    pub fn enumerate_reduced_plans(&self, cap: usize) -> Result<Vec<DefenderPlan>> {
        let count = self.reduced_plan_count();
        if count > cap as f64 {
            return Err(GameError::Capacity { count, cap });
        }
        let n = self.steps;
        let mut out = Vec::new();
        for default in self.joint_defaults() {
            let base: Vec<Vec<Vec<usize>>> = (0..self.branch_count())
                .map(|k| {
                    let (_, t) = self.branch_key(k);
                    default.iter().map(|p| vec![p[t - 1]; n - t]).collect()
                })
                .collect();
            let live = self.reachable_branches(&default);
            let options: Vec<Vec<Vec<Vec<usize>>>> = live
                .iter()
                .map(|&k| self.joint_continuations(&default, self.branch_key(k).1))
                .collect();
            for choice in cartesian(&options) {
                let mut branches = base.clone();
                for (&k, cont) in live.iter().zip(choice) {
                    branches[k] = cont;
                }
                out.push(DefenderPlan {
                    default: default.clone(),
                    branches,
                });
            }
        }
        Ok(out)
    }

    /// Size of the space returned by [`Self::enumerate_reduced_plans`].
    pub fn reduced_plan_count(&self) -> f64 {
        let counts = self.unit_walk_counts();
        let n = self.steps;
        self.joint_defaults()
            .iter()
            .map(|default| {
                self.reachable_branches(default)
                    .into_iter()
                    .map(|k| {
                        let (_, t) = self.branch_key(k);
                        default
                            .iter()
                            .enumerate()
                            .map(|(u, p)| counts[u][n - t][p[t - 1]])
                            .product::<f64>()
                    })
                    .product::<f64>()
            })
            .sum()
    }

    /// Layered corridor digraph with two units on disjoint column bands.
    ///
    /// Vertex 0 is the entrance, followed by `max(1, n-1)` layers of `width`
    /// rooms and one or two targets. The Attacker only moves forward or
    /// sideways; units may also step back within their band.
    pub fn generate<R: Rng + ?Sized>(preset: SegPreset, steps: usize, rng: &mut R) -> Result<Self> {
        if steps == 0 || steps > MAX_STEPS {
            return Err(GameError::invalid(format!("n must be in 1..={MAX_STEPS}")));
        }
        let width = preset.width();
        let layers = steps.saturating_sub(1).max(1);
        let room = |l: usize, w: usize| 1 + l * width + w;
        let n_targets = if width == 2 { 1 } else { 2 };
        let first_target = 1 + layers * width;
        let v_count = first_target + n_targets;
        let mut edges = Vec::new();
        for w in 0..width {
            edges.push((0, room(0, w)));
        }
        for l in 0..layers {
            for w in 0..width {
                if w + 1 < width {
                    edges.push((room(l, w), room(l, w + 1)));
                    edges.push((room(l, w + 1), room(l, w)));
                }
                if l + 1 < layers {
                    for w2 in w.saturating_sub(1)..=(w + 1).min(width - 1) {
                        edges.push((room(l, w), room(l + 1, w2)));
                    }
                    edges.push((room(l + 1, w), room(l, w)));
                }
            }
        }
        let half = width.div_ceil(2);
        for w in 0..width {
            let target = if n_targets == 1 || w < half { first_target } else { first_target + 1 };
            edges.push((room(layers - 1, w), target));
        }
        let bands = [0..half, half..width];
        let units = bands
            .iter()
            .map(|band| {
                let allowed: Vec<usize> = (0..layers).flat_map(|l| band.clone().map(move |w| room(l, w))).collect();
                let start = allowed[rng.gen_range(0..allowed.len())];
                Unit { start, allowed }
            })
            .collect();
        let targets: Vec<bool> = (0..v_count).map(|v| v >= first_target).collect();
        let payoffs = (0..v_count)
            .map(|v| {
                let defender_reward = round_sig9(rng.gen_range(1.0..=2.0));
                let (attacker_reward, defender_penalty) = if targets[v] {
                    (round_sig9(rng.gen_range(1.0..=2.0)), -1.0)
                } else {
                    (0.0, 0.0)
                };
                VertexPayoffs {
                    attacker_reward,
                    attacker_penalty: -1.0,
                    defender_reward,
                    defender_penalty,
                }
            })
            .collect();
        SearchGame::new(payoffs, targets, edges, 0, units, steps)
    }

    pub fn to_file(&self) -> SegFile {
        SegFile {
            kind: "seg".into(),
            n: self.steps,
            vertices: (0..self.vertex_count())
                .map(|v| VertexRecord {
                    id: v,
                    payoffs: self.payoffs[v].to_array(),
                    target: self.targets[v],
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            attacker_start: self.attacker_start,
            units: self
                .units
                .iter()
                .map(|u| UnitRecord {
                    start: u.start,
                    allowed: u.allowed.clone(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: SegFile) -> Result<Self> {
        if file.kind != "seg" {
            return Err(GameError::validation(format!("expected type \"seg\", found {:?}", file.kind)));
        }
        let vertices = super::check_vertex_ids(&file.vertices)?;
        SearchGame::new(
            vertices.iter().map(|r| VertexPayoffs::from_array(r.payoffs)).collect(),
            vertices.iter().map(|r| r.target).collect(),
            file.edges.iter().map(|e| (e[0], e[1])).collect(),
            file.attacker_start,
            file.units
                .into_iter()
                .map(|u| Unit {
                    start: u.start,
                    allowed: u.allowed,
                })
                .collect(),
            file.n,
        )
    }
}

/// All combinations picking one element from each list, first list outermost.
fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::with_capacity(lists.len())];
    for list in lists {
        let mut next = Vec::with_capacity(acc.len() * list.len());
        for prefix in &acc {
            for item in list {
                let mut p = prefix.clone();
                p.push(item.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

impl GameModel for SearchGame {
    type Defender = DefenderPlan;
    type Attacker = AttackerWalk;

    fn steps(&self) -> usize {
        self.steps
    }

    fn simulate(&self, plan: &DefenderPlan, walk: &AttackerWalk) -> PayoffPair {
        let n = self.steps;
        let units = self.units.len();
        // traces[v]: bit t set when a trace deposited at step t lies on v.
        let mut traces = vec![0u64; self.vertex_count()];
        let mut positions = vec![0usize; units];
        let mut branch: Option<(usize, usize)> = None;
        let mut prev = self.attacker_start;
        for t in 1..=n {
            let at = walk.0[t - 1];
            for (u, pos) in positions.iter_mut().enumerate() {
                *pos = match branch {
                    None => plan.default[u][t - 1],
                    Some((k, tb)) => plan.branches[k][u][t - tb - 1],
                };
            }
            if t >= 2 && at == prev {
                traces[at] &= !(1u64 << (t - 1));
            } else {
                traces[at] |= 1u64 << t;
            }
            let p = &self.payoffs[at];
            if positions.contains(&at) {
                return PayoffPair::new(p.defender_reward, p.attacker_penalty);
            }
            if self.targets[at] {
                return PayoffPair::new(p.defender_penalty, p.attacker_reward);
            }
            if branch.is_none() && t < n {
                let older = (1u64 << t) - 1;
                let found = positions.iter().copied().filter(|&v| traces[v] & older != 0).min();
                if let Some(v) = found {
                    branch = Some((self.branch_index(v, t), t));
                }
            }
            prev = at;
        }
        PayoffPair::ZERO
    }

    fn validate_defender(&self, strategy: &DefenderPlan) -> Result<()> {
        self.validate_plan(strategy)
    }

    fn validate_attacker(&self, strategy: &AttackerWalk) -> Result<()> {
        self.validate_walk(strategy)
    }

    fn attacker_strategies(&self, cap: usize) -> Result<Vec<AttackerWalk>> {
        self.enumerate_walks(cap)
    }

    fn defender_strategies(&self, cap: usize) -> Result<Vec<DefenderPlan>> {
        self.enumerate_reduced_plans(cap)
    }

    fn strategy_count(&self, role: Role) -> f64 {
        match role {
            Role::Defender => self.full_plan_count(),
            Role::Attacker => {
                count_walks(self.vertex_count(), self.steps, |v| self.attacker_moves(v))[self.attacker_start]
            }
        }
    }

    fn random_defender<R: Rng + ?Sized>(&self, rng: &mut R) -> DefenderPlan {
        self.random_plan(rng)
    }

    fn resample_suffix<R: Rng + ?Sized>(&self, strategy: &DefenderPlan, step: usize, rng: &mut R) -> DefenderPlan {
        let list = self.random_selector(rng);
        self.resample_list(strategy, list, step, rng)
    }
}

impl Serialize for DefenderPlan {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // Branch slots are stored densely; only their paths are written,
        // in slot order (step-major, then vertex).
        let mut s = serializer.serialize_struct("DefenderPlan", 2)?;
        s.serialize_field("default", &self.default)?;
        s.serialize_field("branches", &self.branches)?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitRecord {
    pub start: usize,
    pub allowed: Vec<usize>,
}

/// On-disk SEG instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub n: usize,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<[usize; 2]>,
    pub attacker_start: usize,
    pub units: Vec<UnitRecord>,
}
