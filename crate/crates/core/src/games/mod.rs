//! Benchmark game models: Warehouse, Search and FlipIt games.

pub mod fig;
pub mod seg;
pub mod whg;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Per-vertex outcome payoffs `(U^{A+}, U^{A-}, U^{D+}, U^{D-})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexPayoffs {
    pub attacker_reward: f64,
    pub attacker_penalty: f64,
    pub defender_reward: f64,
    pub defender_penalty: f64,
}

impl VertexPayoffs {
    pub fn to_array(self) -> [f64; 4] {
        [
            self.attacker_reward,
            self.attacker_penalty,
            self.defender_reward,
            self.defender_penalty,
        ]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        VertexPayoffs {
            attacker_reward: a[0],
            attacker_penalty: a[1],
            defender_reward: a[2],
            defender_penalty: a[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// Vertex record shared by the WHG and SEG instance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: usize,
    #[serde(serialize_with = "crate::io::ser_sig9_array")]
    pub payoffs: [f64; 4],
    pub target: bool,
}

/// Checks that vertex records are listed with ids `0..len` in order.
pub(crate) fn check_vertex_ids(vertices: &[VertexRecord]) -> crate::error::Result<&[VertexRecord]> {
    for (i, r) in vertices.iter().enumerate() {
        if r.id != i {
            return Err(crate::error::GameError::validation(format!(
                "vertices[{i}] has id {}, expected {i}",
                r.id
            )));
        }
    }
    Ok(vertices)
}

/// Rounds to nine significant digits, the precision of every saved file.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Breadth-first distances over an adjacency list; unreachable is `usize::MAX`.
pub(crate) fn bfs_distances(adj: &[Vec<usize>], from: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    dist[from] = 0;
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Depth-first enumeration of every length-`steps` walk, where `moves(v)`
/// lists the vertices reachable in one step from `v` in ascending order.
pub(crate) fn enumerate_walks<F>(start: usize, steps: usize, moves: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> Vec<usize>,
{
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(steps);
    fn rec<F: Fn(usize) -> Vec<usize>>(
        at: usize,
        left: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        moves: &F,
    ) {
        if left == 0 {
            out.push(path.clone());
            return;
        }
        for next in moves(at) {
            path.push(next);
            rec(next, left - 1, path, out, moves);
            path.pop();
        }
    }
    rec(start, steps, &mut path, &mut out, &moves);
    out
}

/// Number of length-`steps` walks from every vertex (as `f64`, may be huge).
pub(crate) fn count_walks<F>(n_vertices: usize, steps: usize, moves: F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<usize>,
{
    let mut count = vec![1.0; n_vertices];
    for _ in 0..steps {
        count = (0..n_vertices)
            .map(|v| moves(v).iter().map(|&w| count[w]).sum())
            .collect();
    }
    count
}
