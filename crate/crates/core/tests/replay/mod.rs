//! Naive re-implementations of the three game simulators, shared by the
//! simulator tests and the acceptance target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackevo_core::games::fig::{FigPreset, FlipItGame, FlipSequence};
use stackevo_core::games::seg::{AttackerWalk, DefenderPlan, SearchGame, SegPreset};
use stackevo_core::games::whg::{WarehouseGame, WhgPath};
use stackevo_core::{GameModel, PayoffPair, Role};

#[derive(Debug, Default)]
pub struct Outcomes {
    pub intercepted: usize,
    pub captured: usize,
    pub quiet: usize,
    pub switched: usize,
}

pub fn replay_whg(g: &WarehouseGame, d: &WhgPath, a: &WhgPath, seen: &mut Outcomes) -> PayoffPair {
    for step in 0..g.steps() {
        let (dv, av) = (d.0[step], a.0[step]);
        let p = g.payoffs(av);
        if dv == av {
            seen.intercepted += 1;
            return PayoffPair::new(p.defender_reward, p.attacker_penalty);
        }
        if g.is_target(av) {
            seen.captured += 1;
            return PayoffPair::new(p.defender_penalty, p.attacker_reward);
        }
    }
    seen.quiet += 1;
    PayoffPair::new(0.0, 0.0)
}

/// Is the trace the attacker left on `walk[s - 1]` at step `s` still there at step `t`?
pub fn trace_alive(walk: &[usize], s: usize, t: usize) -> bool {
    let v = walk[s - 1];
    // A step spent standing still erases instead of depositing.
    let deposited = s == 1 || walk[s - 2] != v;
    let erased = s < t && walk[s] == v;
    deposited && !erased
}

pub fn replay_seg(g: &SearchGame, plan: &DefenderPlan, walk: &AttackerWalk, seen: &mut Outcomes) -> PayoffPair {
    let n = g.steps();
    let mut switch: Option<(usize, usize)> = None;
    for t in 1..=n {
        let positions: Vec<usize> = (0..g.units().len())
            .map(|u| match switch {
                None => plan.default[u][t - 1],
                Some((v, ts)) => plan.branches[(ts - 1) * g.vertex_count() + v][u][t - ts - 1],
            })
            .collect();
        let at = walk.0[t - 1];
        let p = g.payoffs(at);
        if positions.contains(&at) {
            seen.intercepted += 1;
            return PayoffPair::new(p.defender_reward, p.attacker_penalty);
        }
        if g.is_target(at) {
            seen.captured += 1;
            return PayoffPair::new(p.defender_penalty, p.attacker_reward);
        }
        if switch.is_none() && t < n {
            let mut found: Vec<usize> = positions
                .iter()
                .copied()
                .filter(|&v| (1..t).any(|s| walk.0[s - 1] == v && trace_alive(&walk.0, s, t)))
                .collect();
            found.sort();
            if let Some(&v) = found.first() {
                switch = Some((v, t));
                seen.switched += 1;
            }
        }
    }
    seen.quiet += 1;
    PayoffPair::new(0.0, 0.0)
}

pub fn replay_fig(g: &FlipItGame, d: &FlipSequence, a: &FlipSequence) -> PayoffPair {
    let nv = g.vertex_count();
    let mut attacker_owns = vec![false; nv];
    let (mut def, mut att) = (0.0, 0.0);
    for round in 0..g.rounds() {
        let before = attacker_owns.clone();
        let (x, y) = (d.0[round], a.0[round]);
        let can_reach = |attacker: bool, node: usize| {
            g.is_entry(node) || g.edges().iter().any(|&(p, q)| q == node && before[p] == attacker)
        };
        // The owner of a node blocks a flip on it by flipping it too.
        let defender_wins = can_reach(false, x) && !(before[x] && y == x);
        let attacker_wins = can_reach(true, y) && !(!before[y] && x == y);
        if defender_wins {
            attacker_owns[x] = false;
        }
        if attacker_wins {
            attacker_owns[y] = true;
        }
        def -= g.cost(x);
        att -= g.cost(y);
        for v in 0..nv {
            if attacker_owns[v] {
                att += g.reward(v);
            } else {
                def += g.reward(v);
            }
        }
    }
    PayoffPair::new(def, att)
}

/// Plays `pairs` random strategy pairs on generated WHG instances; returns
/// the pairs where the simulator and the replay disagree.
pub fn whg_mismatches(seed: u64, pairs: usize, seen: &mut Outcomes) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for i in 0..pairs {
        let g = WarehouseGame::generate(rng.gen_range(4..=16), rng.gen_range(1..=5), &mut rng).unwrap();
        let d = g.random_path(Role::Defender, &mut rng);
        let a = g.random_path(Role::Attacker, &mut rng);
        let (got, want) = (g.simulate(&d, &a), replay_whg(&g, &d, &a, seen));
        if got != want {
            bad.push(format!("pair {i}: {d:?} vs {a:?}: {got:?} != {want:?}"));
        }
    }
    bad
}

pub fn seg_mismatches(seed: u64, pairs: usize, seen: &mut Outcomes) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut games = Vec::new();
    for preset in SegPreset::ALL {
        for steps in 1..=4 {
            games.push(SearchGame::generate(preset, steps, &mut rng).unwrap());
        }
    }
    let mut bad = Vec::new();
    for i in 0..pairs {
        let g = &games[i % games.len()];
        let plan = g.random_plan(&mut rng);
        let walk = g.random_walk(&mut rng);
        let (got, want) = (g.simulate(&plan, &walk), replay_seg(g, &plan, &walk, seen));
        if got != want {
            bad.push(format!("pair {i}: {walk:?}: {got:?} != {want:?}"));
        }
    }
    bad
}

pub fn fig_mismatches(seed: u64, pairs: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for i in 0..pairs {
        let preset = FigPreset::ALL[i % 3];
        let g = FlipItGame::generate(preset, rng.gen_range(1..=8), rng.gen_range(1..=5), &mut rng).unwrap();
        let d = g.random_sequence(Role::Defender, &mut rng);
        let a = g.random_sequence(Role::Attacker, &mut rng);
        let (got, want) = (g.simulate(&d, &a), replay_fig(&g, &d, &a));
        if got != want {
            bad.push(format!("pair {i}: {d:?} vs {a:?}: {got:?} != {want:?}"));
        }
    }
    bad
}
