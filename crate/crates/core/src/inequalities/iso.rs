use serde::{Deserialize, Serialize};

use super::search::{enumerate_masks, greedy_search, Objective};
use super::{boundary_vertices, exact_cap, quotient, Method, SafeRegion, SearchOptions};
use crate::control::ControlFunction;
use crate::error::{invalid, Result};
use crate::metric::PointId;
use crate::rips::RipsGraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricReport {
    pub rho: ControlFunction,
    pub method: Method,
    /// False when the value is only a lower bound.
    pub certified: bool,
    pub eps: f64,
    pub margin: f64,
    pub safe_vertices: usize,
    /// F*, as point ids.
    pub best_set: Vec<PointId>,
    pub boundary: Vec<PointId>,
    /// #F*
    pub numerator: f64,
    /// Σ_{x ∈ ∂F*} ρ(|x|)
    pub denominator: f64,
    /// C* = numerator / denominator.
    #[serde(with = "crate::io::float_or_inf")]
    pub value: f64,
    /// Subsets enumerated (exact) or hill-climbing moves made (greedy).
    pub examined: u64,
}

/// #F / Σ_{x ∈ ∂F} ρ(|x|) evaluated directly, as (numerator, denominator,
/// ratio). F must lie in the safe region.
pub fn iso_ratio(
    graph: &RipsGraph,
    rho: &ControlFunction,
    safe: &SafeRegion,
    set: &[PointId],
) -> Result<(f64, f64, f64)> {
    let f = safe.resolve(graph, set)?;
    let weights = vertex_weights(graph, rho);
    let (num, den) = evaluate(graph, &weights, &f);
    Ok((num, den, quotient(num, den)))
}

pub(crate) fn vertex_weights(graph: &RipsGraph, rho: &ControlFunction) -> Vec<f64> {
    (0..graph.len()).map(|i| rho.at(graph.norm(i))).collect()
}

fn evaluate(graph: &RipsGraph, weights: &[f64], f: &[usize]) -> (f64, f64) {
    let mut in_f = vec![false; graph.len()];
    for &i in f {
        in_f[i] = true;
    }
    let den = boundary_vertices(graph, &in_f).into_iter().map(|x| weights[x]).sum();
    (f.len() as f64, den)
}

fn report(
    graph: &RipsGraph,
    rho: &ControlFunction,
    safe: &SafeRegion,
    method: Method,
    f: Vec<usize>,
    examined: u64,
) -> IsoperimetricReport {
    let weights = vertex_weights(graph, rho);
    let (num, den) = evaluate(graph, &weights, &f);
    let mut in_f = vec![false; graph.len()];
    for &i in &f {
        in_f[i] = true;
    }
    let mut boundary: Vec<PointId> = boundary_vertices(graph, &in_f)
        .into_iter()
        .map(|i| graph.point(i))
        .collect();
    boundary.sort_unstable();
    let mut best_set: Vec<PointId> = f.iter().map(|&i| graph.point(i)).collect();
    best_set.sort_unstable();
    IsoperimetricReport {
        rho: rho.clone(),
        method,
        certified: method.is_certified(),
        eps: graph.eps(),
        margin: safe.margin(),
        safe_vertices: safe.len(),
        best_set,
        boundary,
        numerator: num,
        denominator: den,
        value: quotient(num, den),
        examined,
    }
}

/// C* by enumerating every nonempty subset of the safe region.
pub fn iso_constant_exact(
    graph: &RipsGraph,
    rho: &ControlFunction,
    opts: &SearchOptions,
) -> Result<IsoperimetricReport> {
    rho.validate()?;
    let safe = SafeRegion::for_graph(graph, opts.margin)?;
    safe.ensure_nonempty()?;
    exact_cap(&safe, opts)?;
    let (f, _) = best_subset(graph, &vertex_weights(graph, rho), safe.vertices());
    Ok(report(graph, rho, &safe, Method::Exact, f, (1u64 << safe.len()) - 1))
}

/// The nonempty subset of `universe` (ascending vertex indices, at most 30)
/// with the largest #F / Σ_{∂F} w, and that ratio.
pub(crate) fn best_subset(graph: &RipsGraph, weights: &[f64], universe: &[usize]) -> (Vec<usize>, f64) {
    let n = universe.len();
    let mut local = vec![u32::MAX; graph.len()];
    for (b, &v) in universe.iter().enumerate() {
        local[v] = b as u32;
    }
    // every vertex that can enter ∂F: the universe and its neighbours,
    // ascending so sums match the direct evaluation bit for bit
    let mut touch: Vec<usize> = universe
        .iter()
        .flat_map(|&v| std::iter::once(v).chain(graph.neighbors(v).iter().map(|&u| u as usize)))
        .collect();
    touch.sort_unstable();
    touch.dedup();
    struct Touch {
        weight: f64,
        bit: u32,
        inner_neighbors: u32,
        outer_neighbor: bool,
    }
    let table: Vec<Touch> = touch
        .iter()
        .map(|&u| {
            let mut inner_neighbors = 0u32;
            let mut outer_neighbor = false;
            for &w in graph.neighbors(u) {
                match local[w as usize] {
                    u32::MAX => outer_neighbor = true,
                    b => inner_neighbors |= 1 << b,
                }
            }
            Touch {
                weight: weights[u],
                bit: local[u],
                inner_neighbors,
                outer_neighbor,
            }
        })
        .collect();
    let (value, mask) = enumerate_masks(n, |mask| {
        let mut den = 0.0;
        for t in &table {
            let inside = t.bit != u32::MAX && mask & (1 << t.bit) != 0;
            let on_boundary = if inside {
                t.outer_neighbor || t.inner_neighbors & !mask != 0
            } else {
                t.inner_neighbors & mask != 0
            };
            if on_boundary {
                den += t.weight;
            }
        }
        quotient(mask.count_ones() as f64, den)
    });
    let f = (0..n).filter(|&b| mask & (1 << b) != 0).map(|b| universe[b]).collect();
    (f, value)
}

/// A lower bound on C* by hill climbing from ball, component and random
/// seeds; the reported value is re-evaluated from the returned set.
pub fn iso_constant_greedy(
    graph: &RipsGraph,
    rho: &ControlFunction,
    opts: &SearchOptions,
) -> Result<IsoperimetricReport> {
    rho.validate()?;
    let safe = SafeRegion::for_graph(graph, opts.margin)?;
    safe.ensure_nonempty()?;
    let empty = IsoState::new(graph, vertex_weights(graph, rho));
    let out = greedy_search(graph, &safe, &empty, opts.restarts, opts.seed);
    Ok(report(graph, rho, &safe, Method::Greedy, out.members, out.moves as u64))
}

/// Exact, greedy, or (auto) exact when the safe region fits the cap.
pub fn iso_constant(
    graph: &RipsGraph,
    rho: &ControlFunction,
    method: Method,
    opts: &SearchOptions,
) -> Result<IsoperimetricReport> {
    match method {
        Method::Exact => iso_constant_exact(graph, rho, opts),
        Method::Greedy => iso_constant_greedy(graph, rho, opts),
        Method::Auto => {
            let safe = SafeRegion::for_graph(graph, opts.margin)?;
            if safe.len() <= opts.max_exact_vertices {
                iso_constant_exact(graph, rho, opts)
            } else {
                iso_constant_greedy(graph, rho, opts)
            }
        }
        Method::Parametric => Err(invalid(
            "the vertex-boundary ratio has no parametric cut form; use exact or greedy",
        )),
    }
}

/// F with counts of F-neighbours per vertex; x ∈ ∂F iff x ∈ F has fewer
/// F-neighbours than neighbours, or x ∉ F has at least one.
#[derive(Clone)]
struct IsoState<'a> {
    graph: &'a RipsGraph,
    weights: Vec<f64>,
    in_f: Vec<bool>,
    f_neighbors: Vec<u32>,
    size: usize,
    num: f64,
    den: f64,
}

impl<'a> IsoState<'a> {
    fn new(graph: &'a RipsGraph, weights: Vec<f64>) -> Self {
        IsoState {
            graph,
            weights,
            in_f: vec![false; graph.len()],
            f_neighbors: vec![0; graph.len()],
            size: 0,
            num: 0.0,
            den: 0.0,
        }
    }

    fn on_boundary(&self, x: usize, inside: bool, f_neighbors: u32) -> bool {
        if inside {
            (f_neighbors as usize) < self.graph.valency(x)
        } else {
            f_neighbors > 0
        }
    }
}

impl Objective for IsoState<'_> {
    fn contains(&self, v: usize) -> bool {
        self.in_f[v]
    }

    fn size(&self) -> usize {
        self.size
    }

    fn num(&self) -> f64 {
        self.num
    }

    fn den(&self) -> f64 {
        self.den
    }

    fn delta(&self, v: usize) -> (f64, f64) {
        let adding = !self.in_f[v];
        let step: i64 = if adding { 1 } else { -1 };
        let mut dd = 0.0;
        let before = self.on_boundary(v, self.in_f[v], self.f_neighbors[v]);
        let after = self.on_boundary(v, adding, self.f_neighbors[v]);
        dd += (after as i32 - before as i32) as f64 * self.weights[v];
        for &u in self.graph.neighbors(v) {
            let u = u as usize;
            let n = self.f_neighbors[u];
            let before = self.on_boundary(u, self.in_f[u], n);
            let after = self.on_boundary(u, self.in_f[u], (n as i64 + step) as u32);
            dd += (after as i32 - before as i32) as f64 * self.weights[u];
        }
        (step as f64, dd)
    }

    fn toggle(&mut self, v: usize) {
        let (dn, dd) = self.delta(v);
        let adding = !self.in_f[v];
        self.in_f[v] = adding;
        for &u in self.graph.neighbors(v) {
            let c = &mut self.f_neighbors[u as usize];
            if adding {
                *c += 1;
            } else {
                *c -= 1;
            }
        }
        if adding {
            self.size += 1;
        } else {
            self.size -= 1;
        }
        self.num += dn;
        self.den += dd;
    }

    fn resync(&mut self) {
        self.num = self.size as f64;
        self.den = boundary_vertices(self.graph, &self.in_f)
            .into_iter()
            .map(|x| self.weights[x])
            .sum();
    }

    fn members(&self) -> Vec<usize> {
        (0..self.in_f.len()).filter(|&i| self.in_f[i]).collect()
    }
}
