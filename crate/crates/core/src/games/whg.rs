//! Warehouse Games: single-unit pursuit on an undirected graph.
//!
//! Both players start on distinct vertices and, at every step, move to a
//! neighbouring vertex or stay. The game ends on interception (co-location),
//! on the Attacker reaching an un-intercepted target, or after `n` steps with
//! neutral payoffs.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bfs_distances, count_walks, enumerate_walks, round_sig9, VertexPayoffs, VertexRecord};
use crate::error::{GameError, Result};
use crate::strategy::{GameModel, PayoffPair, Role};

/// A WHG pure strategy: the vertex occupied at each step `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WhgPath(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
pub struct WarehouseGame {
    payoffs: Vec<VertexPayoffs>,
    targets: Vec<bool>,
    /// Sorted neighbour lists.
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    defender_start: usize,
    attacker_start: usize,
    steps: usize,
}

impl WarehouseGame {
    pub fn new(
        payoffs: Vec<VertexPayoffs>,
        targets: Vec<bool>,
        edges: Vec<(usize, usize)>,
        defender_start: usize,
        attacker_start: usize,
        steps: usize,
    ) -> Result<Self> {
        let v = payoffs.len();
        if v == 0 || targets.len() != v {
            return Err(GameError::validation("vertex payoffs and target flags must be non-empty and equal in length"));
        }
        if steps == 0 {
            return Err(GameError::validation("n must be at least 1"));
        }
        if defender_start >= v || attacker_start >= v {
            return Err(GameError::validation("start vertex out of range"));
        }
        if defender_start == attacker_start {
            return Err(GameError::validation("defender_start and attacker_start must differ"));
        }
        let mut neighbors = vec![Vec::new(); v];
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= v || b >= v {
                return Err(GameError::validation(format!("edge [{a}, {b}] references a missing vertex")));
            }
            if a == b {
                return Err(GameError::validation(format!("self-loop on vertex {a}")));
            }
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
                canonical.push((a.min(b), a.max(b)));
            }
        }
        for n in neighbors.iter_mut() {
            n.sort_unstable();
        }
        canonical.sort_unstable();
        if !targets.iter().any(|&t| t) {
            return Err(GameError::validation("at least one target is required"));
        }
        for (i, p) in payoffs.iter().enumerate() {
            if !p.is_finite() {
                return Err(GameError::validation(format!("vertex {i} has non-finite payoffs")));
            }
            if targets[i] && !(p.attacker_reward > 0.0 && p.defender_penalty < 0.0) {
                return Err(GameError::validation(format!(
                    "target {i} needs a positive attacker reward and a negative defender penalty"
                )));
            }
        }
        if bfs_distances(&neighbors, 0).contains(&usize::MAX) {
            return Err(GameError::validation("graph is not connected"));
        }
        Ok(WarehouseGame {
            payoffs,
            targets,
            neighbors,
            edges: canonical,
            defender_start,
            attacker_start,
            steps,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.payoffs.len()
    }

    pub fn payoffs(&self, v: usize) -> VertexPayoffs {
        self.payoffs[v]
    }

    pub fn is_target(&self, v: usize) -> bool {
        self.targets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn defender_start(&self) -> usize {
        self.defender_start
    }

    pub fn attacker_start(&self) -> usize {
        self.attacker_start
    }

    fn start(&self, role: Role) -> usize {
        match role {
            Role::Defender => self.defender_start,
            Role::Attacker => self.attacker_start,
        }
    }

    /// `{v} ∪ neighbors(v)` in ascending vertex order.
    pub fn moves(&self, v: usize) -> Vec<usize> {
        let mut m = Vec::with_capacity(self.neighbors[v].len() + 1);
        let mut inserted = false;
        for &w in &self.neighbors[v] {
            if !inserted && v < w {
                m.push(v);
                inserted = true;
            }
            m.push(w);
        }
        if !inserted {
            m.push(v);
        }
        m
    }

    fn is_move(&self, from: usize, to: usize) -> bool {
        from == to || self.neighbors[from].binary_search(&to).is_ok()
    }

    pub fn validate_path(&self, path: &WhgPath, role: Role) -> Result<()> {
        if path.0.len() != self.steps {
            return Err(GameError::validation(format!(
                "path has {} steps, game has {}",
                path.0.len(),
                self.steps
            )));
        }
        let mut prev = self.start(role);
        for (i, &v) in path.0.iter().enumerate() {
            if v >= self.vertex_count() || !self.is_move(prev, v) {
                return Err(GameError::validation(format!(
                    "step {}: vertex {v} is not reachable from vertex {prev}",
                    i + 1
                )));
            }
            prev = v;
        }
        Ok(())
    }

    /// Every valid path of `role`, depth-first in ascending vertex order.
    pub fn enumerate_strategies(&self, role: Role, cap: usize) -> Result<Vec<WhgPath>> {
        let count = self.strategy_count(role);
        if count > cap as f64 {
            return Err(GameError::Capacity { count, cap });
        }
        Ok(enumerate_walks(self.start(role), self.steps, |v| self.moves(v))
            .into_iter()
            .map(WhgPath)
            .collect())
    }

    pub fn random_path<R: Rng + ?Sized>(&self, role: Role, rng: &mut R) -> WhgPath {
        let mut path = Vec::with_capacity(self.steps);
        self.extend_random(self.start(role), &mut path, rng);
        WhgPath(path)
    }

    fn extend_random<R: Rng + ?Sized>(&self, mut at: usize, path: &mut Vec<usize>, rng: &mut R) {
        while path.len() < self.steps {
            let moves = self.moves(at);
            at = moves[rng.gen_range(0..moves.len())];
            path.push(at);
        }
    }

    /// Keeps steps `1..step` and re-draws the rest uniformly.
    pub fn resample_path<R: Rng + ?Sized>(&self, path: &WhgPath, role: Role, step: usize, rng: &mut R) -> WhgPath {
        let keep = step.clamp(1, self.steps) - 1;
        let mut out = path.0[..keep].to_vec();
        let from = if keep == 0 { self.start(role) } else { out[keep - 1] };
        self.extend_random(from, &mut out, rng);
        WhgPath(out)
    }

    /// Random warehouse-like instance: a grid of rooms with some walls opened,
    /// one to three targets far from the Defender.
    pub fn generate<R: Rng + ?Sized>(v_count: usize, steps: usize, rng: &mut R) -> Result<Self> {
        if v_count < 4 {
            return Err(GameError::invalid("warehouse games need at least 4 vertices"));
        }
        if steps == 0 {
            return Err(GameError::invalid("n must be at least 1"));
        }
        let edges = grid_layout(v_count, rng);
        let mut adj = vec![Vec::new(); v_count];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }

        // The intruder enters in the half of the building away from the guard.
        let defender_start = rng.gen_range(0..v_count);
        let from_defender = bfs_distances(&adj, defender_start);
        let mut by_distance: Vec<usize> = (0..v_count).filter(|&v| v != defender_start).collect();
        by_distance.sort_by_key(|&v| (std::cmp::Reverse(from_defender[v]), v));
        let attacker_start = by_distance[rng.gen_range(0..by_distance.len().div_ceil(2))];
        let from_attacker = bfs_distances(&adj, attacker_start);
        // Prefer targets both players can reach in time, so the Defender
        // has a chance to contest them; relax when none exist.
        let free = |v: usize| v != defender_start && v != attacker_start;
        let tiers: [&dyn Fn(usize) -> bool; 3] = [
            &|v| free(v) && (2..=steps).contains(&from_attacker[v]),
            &|v| free(v) && from_attacker[v] <= steps,
            &|v| free(v),
        ];
        let mut candidates: Vec<usize> = tiers
            .iter()
            .map(|keep| (0..v_count).filter(|&v| keep(v)).collect::<Vec<_>>())
            .find(|c| !c.is_empty())
            .expect("at least two vertices are free");
        candidates.sort_by_key(|&v| (std::cmp::Reverse(from_defender[v]), v));
        let far = candidates.len().div_ceil(2);
        let pool = &candidates[..far.max(1)];
        let k = rng.gen_range(1..=3usize).min(pool.len());
        let chosen: Vec<usize> = pool.choose_multiple(rng, k).copied().collect();

        let mut targets = vec![false; v_count];
        for &t in &chosen {
            targets[t] = true;
        }
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
        WarehouseGame::new(payoffs, targets, edges, defender_start, attacker_start, steps)
    }

    pub fn to_file(&self) -> WhgFile {
        WhgFile {
            kind: "whg".into(),
            n: self.steps,
            vertices: (0..self.vertex_count())
                .map(|v| VertexRecord {
                    id: v,
                    payoffs: self.payoffs[v].to_array(),
                    target: self.targets[v],
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            defender_start: self.defender_start,
            attacker_start: self.attacker_start,
        }
    }

    pub fn from_file(file: WhgFile) -> Result<Self> {
        if file.kind != "whg" {
            return Err(GameError::validation(format!("expected type \"whg\", found {:?}", file.kind)));
        }
        let vertices = super::check_vertex_ids(&file.vertices)?;
        WarehouseGame::new(
            vertices.iter().map(|r| VertexPayoffs::from_array(r.payoffs)).collect(),
            vertices.iter().map(|r| r.target).collect(),
            file.edges.iter().map(|e| (e[0], e[1])).collect(),
            file.defender_start,
            file.attacker_start,
            file.n,
        )
    }
}

/// Grid walls are opened at random until the layout is connected.
fn grid_layout<R: Rng + ?Sized>(v_count: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let rows = ((v_count as f64).sqrt().floor() as usize).max(1);
    let cols = v_count.div_ceil(rows);
    let mut walls = Vec::new();
    for v in 0..v_count {
        if v % cols + 1 < cols && v + 1 < v_count {
            walls.push((v, v + 1));
        }
        if v + cols < v_count {
            walls.push((v, v + cols));
        }
    }
    const OPEN_PROBABILITY: f64 = 0.6;
    const RETRIES: usize = 64;
    for _ in 0..RETRIES {
        let open: Vec<(usize, usize)> = walls.iter().copied().filter(|_| rng.gen_bool(OPEN_PROBABILITY)).collect();
        if is_connected(v_count, &open) {
            return open;
        }
    }
    // Fall back to a random spanning tree plus nothing else.
    let mut order = walls.clone();
    order.shuffle(rng);
    let mut parent: Vec<usize> = (0..v_count).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut tree = Vec::new();
    for (a, b) in order {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            tree.push((a, b));
        }
    }
    tree.sort_unstable();
    tree
}

fn is_connected(v_count: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); v_count];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    !bfs_distances(&adj, 0).contains(&usize::MAX)
}

impl GameModel for WarehouseGame {
    type Defender = WhgPath;
    type Attacker = WhgPath;

    fn steps(&self) -> usize {
        self.steps
    }

    fn simulate(&self, defender: &WhgPath, attacker: &WhgPath) -> PayoffPair {
        for (&d, &a) in defender.0.iter().zip(&attacker.0) {
            let p = &self.payoffs[a];
            if d == a {
                return PayoffPair::new(p.defender_reward, p.attacker_penalty);
            }
            if self.targets[a] {
                return PayoffPair::new(p.defender_penalty, p.attacker_reward);
            }
        }
        PayoffPair::ZERO
    }

    fn validate_defender(&self, strategy: &WhgPath) -> Result<()> {
        self.validate_path(strategy, Role::Defender)
    }

    fn validate_attacker(&self, strategy: &WhgPath) -> Result<()> {
        self.validate_path(strategy, Role::Attacker)
    }

    fn attacker_strategies(&self, cap: usize) -> Result<Vec<WhgPath>> {
        self.enumerate_strategies(Role::Attacker, cap)
    }

    fn defender_strategies(&self, cap: usize) -> Result<Vec<WhgPath>> {
        self.enumerate_strategies(Role::Defender, cap)
    }

    fn strategy_count(&self, role: Role) -> f64 {
        count_walks(self.vertex_count(), self.steps, |v| self.moves(v))[self.start(role)]
    }

    fn random_defender<R: Rng + ?Sized>(&self, rng: &mut R) -> WhgPath {
        self.random_path(Role::Defender, rng)
    }

    fn resample_suffix<R: Rng + ?Sized>(&self, strategy: &WhgPath, step: usize, rng: &mut R) -> WhgPath {
        self.resample_path(strategy, Role::Defender, step, rng)
    }
}

/// On-disk WHG instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhgFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub n: usize,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<[usize; 2]>,
    pub defender_start: usize,
    pub attacker_start: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::DEFAULT_STRATEGY_CAP;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plain(v: usize) -> Vec<VertexPayoffs> {
        vec![
            VertexPayoffs {
                attacker_reward: 1.5,
                attacker_penalty: -1.0,
                defender_reward: 1.0,
                defender_penalty: -1.0,
            };
            v
        ]
    }

    /// Star K_{1,3}: centre 0, leaves 1..=3; leaf 3 is the target.
    fn star(steps: usize) -> WarehouseGame {
        let mut targets = vec![false; 4];
        targets[3] = true;
        WarehouseGame::new(plain(4), targets, vec![(0, 1), (0, 2), (0, 3)], 0, 1, steps).unwrap()
    }

    #[test]
    fn star_centre_has_four_one_step_paths() {
        let g = star(1);
        let s = g.enumerate_strategies(Role::Defender, DEFAULT_STRATEGY_CAP).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0], WhgPath(vec![0]));
    }

    #[test]
    fn isolated_vertex_only_stays() {
        let walks = super::super::enumerate_walks(0, 4, |v| vec![v]);
        assert_eq!(walks, vec![vec![0; 4]]);
        let g = WarehouseGame::new(plain(2), vec![false, true], vec![(0, 1)], 0, 1, 1).unwrap();
        assert_eq!(g.moves(0), vec![0, 1]);
    }

    #[test]
    fn enumeration_respects_cap() {
        let g = star(6);
        let err = g.enumerate_strategies(Role::Defender, 10).unwrap_err();
        assert!(matches!(err, GameError::Capacity { cap: 10, .. }));
    }

    #[test]
    fn no_event_gives_zero() {
        let g = star(2);
        let out = g.simulate(&WhgPath(vec![2, 2]), &WhgPath(vec![1, 1]));
        assert_eq!(out, PayoffPair::ZERO);
    }

    #[test]
    fn co_location_is_interception() {
        let mut p = plain(4);
        p[0].defender_reward = 0.7;
        p[0].attacker_penalty = -0.9;
        let mut t = vec![false; 4];
        t[3] = true;
        let g = WarehouseGame::new(p, t, vec![(0, 1), (0, 2), (0, 3)], 2, 1, 2).unwrap();
        let out = g.simulate(&WhgPath(vec![0, 0]), &WhgPath(vec![0, 3]));
        assert_eq!(out, PayoffPair::new(0.7, -0.9));
    }

    #[test]
    fn interception_beats_target_capture() {
        let g = star(2);
        let out = g.simulate(&WhgPath(vec![0, 3]), &WhgPath(vec![0, 3]));
        // Both at 0 in step 1 already: interception at the centre.
        assert_eq!(out, PayoffPair::new(1.0, -1.0));
        let g = WarehouseGame::new(plain(4), vec![false, false, false, true], vec![(0, 1), (0, 2), (0, 3)], 2, 1, 2).unwrap();
        let out = g.simulate(&WhgPath(vec![0, 3]), &WhgPath(vec![0, 3]));
        assert_eq!(out, PayoffPair::new(1.0, -1.0));
        let out = g.simulate(&WhgPath(vec![2, 0]), &WhgPath(vec![0, 3]));
        assert_eq!(out, PayoffPair::new(-1.0, 1.5));
    }

    #[test]
    fn swapping_along_an_edge_is_not_interception() {
        let g = WarehouseGame::new(plain(3), vec![false, false, true], vec![(0, 1), (1, 2)], 0, 1, 1).unwrap();
        assert_eq!(g.simulate(&WhgPath(vec![1]), &WhgPath(vec![0])), PayoffPair::ZERO);
    }

    #[test]
    fn validation_names_the_step() {
        let g = star(2);
        let err = g.validate_path(&WhgPath(vec![1, 2]), Role::Defender).unwrap_err();
        assert!(err.to_string().contains("step 2"), "{err}");
        assert!(g.validate_path(&WhgPath(vec![1]), Role::Defender).is_err());
    }

    #[test]
    fn resample_keeps_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = WarehouseGame::generate(9, 5, &mut rng).unwrap();
        for _ in 0..200 {
            let p = g.random_path(Role::Defender, &mut rng);
            let q = g.resample_path(&p, Role::Defender, 3, &mut rng);
            assert_eq!(p.0[..2], q.0[..2]);
            g.validate_path(&q, Role::Defender).unwrap();
            let r = g.resample_path(&p, Role::Defender, 5, &mut rng);
            assert_eq!(p.0[..4], r.0[..4]);
        }
    }

    #[test]
    fn generated_instances_are_valid_and_seeded() {
        for seed in 0..100 {
            let g = WarehouseGame::generate(4 + (seed as usize % 8), 3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let again = WarehouseGame::generate(4 + (seed as usize % 8), 3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(g, again);
            // Constructor validation re-run on the file form.
            let back = WarehouseGame::from_file(g.to_file()).unwrap();
            assert_eq!(back, g);
            assert_ne!(g.defender_start(), g.attacker_start());
            let targets = (0..g.vertex_count()).filter(|&v| g.is_target(v)).count();
            assert!((1..=3).contains(&targets));
        }
    }

    #[test]
    fn count_follows_neighbour_recurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = WarehouseGame::generate(8, 3, &mut rng).unwrap();
        fn count(g: &WarehouseGame, v: usize, left: usize) -> usize {
            if left == 0 {
                return 1;
            }
            count(g, v, left - 1) + g.neighbors(v).iter().map(|&w| count(g, w, left - 1)).sum::<usize>()
        }
        let enumerated = g.enumerate_strategies(Role::Attacker, DEFAULT_STRATEGY_CAP).unwrap();
        assert_eq!(enumerated.len(), count(&g, g.attacker_start(), 3));
    }

    #[test]
    fn random_paths_belong_to_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = WarehouseGame::generate(7, 3, &mut rng).unwrap();
        let all: std::collections::HashSet<_> =
            g.enumerate_strategies(Role::Defender, DEFAULT_STRATEGY_CAP).unwrap().into_iter().collect();
        for _ in 0..1000 {
            assert!(all.contains(&g.random_path(Role::Defender, &mut rng)));
        }
    }
}
