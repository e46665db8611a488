//! Set searches shared by the isoperimetric and Sobolev constants: bitmask
//! enumeration and seeded hill climbing on a ratio num(F) / den(F).

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use super::{quotient, SafeRegion};
use crate::rips::RipsGraph;
use crate::rng;

const CHUNK_BITS: u32 = 12;
const BALL_SEEDS: usize = 4;
const COMPONENT_SEEDS: usize = 64;
const RANDOM_SET_CAP: usize = 256;

/// A set F of safe vertices with an incrementally maintained ratio.
pub(crate) trait Objective: Clone + Send + Sync {
    fn contains(&self, v: usize) -> bool;
    fn size(&self) -> usize;
    fn num(&self) -> f64;
    fn den(&self) -> f64;
    /// Change of (num, den) if `v` were toggled.
    fn delta(&self, v: usize) -> (f64, f64);
    fn toggle(&mut self, v: usize);
    /// Recompute num and den from scratch in canonical summation order.
    fn resync(&mut self);
    /// Members, ascending.
    fn members(&self) -> Vec<usize>;

    fn ratio(&self) -> f64 {
        quotient(self.num(), self.den())
    }
}

/// Best `(value, mask)` over all nonempty masks below 2^n, ties to the
/// smaller mask. Local bit i stands for the i-th safe vertex.
pub(crate) fn enumerate_masks(n: usize, eval: impl Fn(u32) -> f64 + Sync) -> (f64, u32) {
    debug_assert!((1..=30).contains(&n));
    let total: u64 = 1 << n;
    let chunk: u64 = 1 << CHUNK_BITS;
    let chunks = total.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = (c * chunk).max(1);
            let end = ((c + 1) * chunk).min(total);
            let mut best = (f64::NEG_INFINITY, 0u32);
            for mask in start..end {
                let v = eval(mask as u32);
                if v > best.0 {
                    best = (v, mask as u32);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, u32::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        )
}

/// Best-improvement single-vertex toggles until no toggle of a safe vertex
/// raises the ratio. Never empties F. Returns the number of moves made.
pub(crate) fn hill_climb<O: Objective>(state: &mut O, safe: &[usize]) -> usize {
    let max_moves = 4 * safe.len() + 16;
    let mut moves = 0;
    while moves < max_moves {
        let current = state.ratio();
        if current == f64::INFINITY {
            break;
        }
        let mut best: Option<(f64, usize)> = None;
        for &v in safe {
            if state.size() == 1 && state.contains(v) {
                continue;
            }
            let (dn, dd) = state.delta(v);
            let r = quotient(state.num() + dn, state.den() + dd);
            let threshold = best.map_or(current * (1.0 + 1e-12), |b| b.0);
            if r > threshold {
                best = Some((r, v));
            }
        }
        let Some((_, v)) = best else { break };
        state.toggle(v);
        state.resync();
        moves += 1;
        if state.ratio() <= current {
            // the incremental estimate was rounding noise
            state.toggle(v);
            state.resync();
            break;
        }
    }
    moves
}

pub(crate) struct GreedyOutcome {
    pub members: Vec<usize>,
    pub moves: usize,
}

/// Hill climbing from ball-sweep seeds, each safe component, and random
/// connected sets. `empty` is the objective at F = ∅.
pub(crate) fn greedy_search<O: Objective>(
    graph: &RipsGraph,
    safe: &SafeRegion,
    empty: &O,
    restarts: usize,
    seed: u64,
) -> GreedyOutcome {
    let mut seeds: Vec<Vec<usize>> = ball_seeds(graph, safe, empty);
    let components = safe.components(graph);
    seeds.extend(components.iter().take(COMPONENT_SEEDS).cloned());
    let mut rng = rng::stream(seed, "greedy-seeds");
    for _ in 0..restarts {
        seeds.push(random_connected_set(graph, safe, &mut rng));
    }
    let results: Vec<(f64, Vec<usize>, usize)> = seeds
        .par_iter()
        .map(|start| {
            let mut state = empty.clone();
            for &v in start {
                state.toggle(v);
            }
            state.resync();
            let moves = hill_climb(&mut state, safe.vertices());
            (state.ratio(), state.members(), moves)
        })
        .collect();
    let moves = results.iter().map(|r| r.2).sum();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = i;
        }
    }
    GreedyOutcome {
        members: results[best].1.clone(),
        moves,
    }
}

/// The best few sets F = {x safe : |x| <= r}, r over the distinct norms.
fn ball_seeds<O: Objective>(graph: &RipsGraph, safe: &SafeRegion, empty: &O) -> Vec<Vec<usize>> {
    let mut order = safe.vertices().to_vec();
    order.sort_by(|&a, &b| graph.norm(a).total_cmp(&graph.norm(b)).then(a.cmp(&b)));
    let mut state = empty.clone();
    let mut balls: Vec<(f64, usize)> = Vec::new();
    for (k, &v) in order.iter().enumerate() {
        state.toggle(v);
        let last_of_shell = order
            .get(k + 1)
            .is_none_or(|&w| graph.norm(w) > graph.norm(v) + crate::TOL);
        if last_of_shell {
            state.resync();
            balls.push((state.ratio(), k + 1));
        }
    }
    balls.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    balls
        .into_iter()
        .take(BALL_SEEDS)
        .map(|(_, k)| {
            let mut s = order[..k].to_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

/// A breadth-first blob of random size around a random safe vertex.
fn random_connected_set(graph: &RipsGraph, safe: &SafeRegion, rng: &mut rng::Rng) -> Vec<usize> {
    let start = *safe.vertices().choose(rng).expect("safe region is nonempty");
    let target = rng.gen_range(1..=safe.len().min(RANDOM_SET_CAP));
    bfs_blob(graph, safe, start, target)
}

/// Up to `target` safe vertices in breadth-first order from `start`,
/// ascending.
pub(crate) fn bfs_blob(graph: &RipsGraph, safe: &SafeRegion, start: usize, target: usize) -> Vec<usize> {
    let mut out = vec![start];
    let mut seen = std::collections::HashSet::from([start]);
    let mut k = 0;
    while k < out.len() && out.len() < target {
        let v = out[k];
        k += 1;
        for &u in graph.neighbors(v) {
            let u = u as usize;
            if out.len() >= target {
                break;
            }
            if safe.contains(u) && seen.insert(u) {
                out.push(u);
            }
        }
    }
    out.sort_unstable();
    out
}
