use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PointId;
use crate::error::Result;
use crate::rips::RipsGraph;

/// Which vertex pairs a sampled check examines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSample {
    Exhaustive,
    Random {
        count: usize,
        seed: u64,
    },
    /// Pairs of space point ids, all of which must be graph vertices.
    Explicit(Vec<(PointId, PointId)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiconvexityReport {
    /// Largest ratio of Rips path length to distance; infinite when some
    /// sampled pair is disconnected.
    #[serde(with = "crate::io::float_or_inf")]
    pub ratio: f64,
    pub witness: Option<(PointId, PointId)>,
    pub path_length: f64,
    pub dist: f64,
    pub pairs: usize,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest metric-weighted path lengths in the Rips graph from `source`.
pub fn weighted_paths_from(graph: &RipsGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, source)]);
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &v in graph.neighbors(u) {
            let v = v as usize;
            let nd = d + graph.edge_length(u, v);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Item(nd, v));
            }
        }
    }
    dist
}

/// Q̂ = max over sampled pairs of (Rips path length) / d(x, y).
pub fn quasiconvexity_ratio(graph: &RipsGraph, pairs: &PairSample) -> Result<QuasiconvexityReport> {
    let pairs = graph.resolve_pairs(pairs)?;
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(i, j) in &pairs {
        if i != j {
            by_source.entry(i).or_default().push(j);
        }
    }
    let sources: Vec<(usize, Vec<usize>)> = by_source.into_iter().collect();
    let best = sources
        .par_iter()
        .map(|(i, targets)| {
            let paths = weighted_paths_from(graph, *i);
            let mut best = (1.0f64, None, 0.0, 0.0);
            for &j in targets {
                let d = graph.edge_length(*i, j);
                let ratio = paths[j] / d;
                if ratio > best.0 || best.1.is_none() {
                    best = (ratio, Some((graph.point(*i), graph.point(j))), paths[j], d);
                }
            }
            best
        })
        .reduce(
            || (1.0, None, 0.0, 0.0),
            |a, b| match (a.1, b.1) {
                (None, _) => b,
                (_, None) => a,
                (Some(wa), Some(wb)) => {
                    if b.0 > a.0 || (b.0 == a.0 && wb < wa) {
                        b
                    } else {
                        a
                    }
                }
            },
        );
    Ok(QuasiconvexityReport {
        ratio: best.0,
        witness: best.1,
        path_length: best.2,
        dist: best.3,
        pairs: pairs.len(),
    })
}
