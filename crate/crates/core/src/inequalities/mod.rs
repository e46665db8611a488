//! Weighted isoperimetric and Sobolev constants of Rips graphs, and the
//! inequalities relating them to each other and to Ponzi certificates.
//!
//! Sets F live in a safe region {x : |x| <= T - margin} of a truncation at
//! radius T, while boundaries and cuts are taken in the whole graph. With
//! |(x, y)| = max(|x|, |y|):
//!
//! * C* = max over F of #F / Σ_{x ∈ ∂F} ρ(|x|), where ∂F is the outer plus
//!   the inner vertex boundary;
//! * D* = max over η of Σ_x m_x |η(x)| / Σ_x Σ_{y ~ x} |η(x) - η(y)| ρ(|(x, y)|) m_x,
//!   with m ≡ 1 (counting) or m_p = μ(B(p, ε)) (measure).
//!
//! By the layer-cake formula D* is attained at an indicator, so it equals
//! the largest m(F) / cut(F) where an edge {p, q} leaving F costs
//! (m_p + m_q) ρ(|(p, q)|).

mod checks;
mod iso;
mod search;
mod sobolev;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metric::PointId;
use crate::rips::RipsGraph;
use crate::TOL;

pub use checks::{
    basepoint_robustness, iso_sobolev_crosscheck, ponzi_iso_consistency, transfer_check, BasepointReport,
    ConsistencyReport, CrosscheckReport, TransferReport,
};
pub use iso::{iso_constant, iso_constant_exact, iso_constant_greedy, iso_ratio, IsoperimetricReport};
pub use sobolev::{sobolev_constant, EtaValidation, SobolevProblem, SobolevReport};

/// Exhaustive searches enumerate at most 2^20 subsets.
pub const DEFAULT_MAX_EXACT_VERTICES: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Exhaustive when the safe region is small enough, otherwise the best
    /// certified alternative (parametric for Sobolev, greedy for sets).
    #[default]
    Auto,
    Exact,
    /// Dinkelbach iteration on minimum cuts (Sobolev constants only).
    Parametric,
    /// Hill climbing; the value is a lower bound.
    Greedy,
}

impl Method {
    pub fn is_certified(self) -> bool {
        matches!(self, Method::Exact | Method::Parametric)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Exact => "exact",
            Method::Parametric => "parametric",
            Method::Greedy => "greedy",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "exact" => Ok(Method::Exact),
            "parametric" => Ok(Method::Parametric),
            "greedy" => Ok(Method::Greedy),
            _ => Err(invalid(format!(
                "unknown method {s:?}, expected auto|exact|parametric|greedy"
            ))),
        }
    }
}

/// Vertex masses m_p in the Sobolev quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// m ≡ 1.
    Counting,
    /// m_p = μ(B(p, ε)) from the space's point weights.
    Measure,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Counting => "counting",
            WeightMode::Measure => "measure",
        })
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counting" => Ok(WeightMode::Counting),
            "measure" => Ok(WeightMode::Measure),
            _ => Err(invalid(format!("unknown weight mode {s:?}, expected counting|measure"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Distance kept between the safe region and the truncation; 3ε when
    /// unset.
    pub margin: Option<f64>,
    pub max_exact_vertices: usize,
    /// Random starting sets for greedy searches.
    pub restarts: usize,
    /// Random η tried against a Sobolev constant.
    pub eta_samples: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            margin: None,
            max_exact_vertices: DEFAULT_MAX_EXACT_VERTICES,
            restarts: 32,
            eta_samples: 10_000,
            seed: 0,
        }
    }
}

/// The vertices at least `margin` inside the truncation.
#[derive(Clone, Debug)]
pub struct SafeRegion {
    margin: f64,
    limit: f64,
    vertices: Vec<usize>,
    member: Vec<bool>,
}

impl SafeRegion {
    pub fn new(graph: &RipsGraph, margin: f64) -> Result<SafeRegion> {
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(invalid(format!("margin must be a nonnegative real, got {margin}")));
        }
        let limit = graph.space().truncation_radius() - margin;
        let member: Vec<bool> = (0..graph.len()).map(|i| graph.norm(i) <= limit + TOL).collect();
        let vertices = (0..graph.len()).filter(|&i| member[i]).collect();
        Ok(SafeRegion {
            margin,
            limit,
            vertices,
            member,
        })
    }

    /// One Rips hop (3ε) unless a margin is given.
    pub fn for_graph(graph: &RipsGraph, margin: Option<f64>) -> Result<SafeRegion> {
        Self::new(graph, margin.unwrap_or(3.0 * graph.eps()))
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Largest admissible |x|.
    pub fn limit(&self) -> f64 {
        self.limit
    }

    /// Graph vertex indices, ascending.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, vertex: usize) -> bool {
        self.member.get(vertex).copied().unwrap_or(false)
    }

    pub fn points(&self, graph: &RipsGraph) -> Vec<PointId> {
        self.vertices.iter().map(|&i| graph.point(i)).collect()
    }

    /// Vertex indices of a point set, sorted; every point must be a safe
    /// vertex.
    pub fn resolve(&self, graph: &RipsGraph, set: &[PointId]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(set.len());
        for &p in set {
            let i = graph
                .vertex(p)
                .ok_or_else(|| invalid(format!("point {p} is not a vertex of the graph")))?;
            if !self.contains(i) {
                return Err(invalid(format!(
                    "point {p} at |x| = {} lies within the margin {} of the truncation",
                    graph.norm(i),
                    self.margin
                )));
            }
            out.push(i);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Connected components of the subgraph induced on the region, each
    /// ascending, ordered by smallest vertex.
    pub fn components(&self, graph: &RipsGraph) -> Vec<Vec<usize>> {
        let mut seen = vec![false; graph.len()];
        let mut out = Vec::new();
        for &s in &self.vertices {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut k = 0;
            while k < comp.len() {
                let v = comp[k];
                k += 1;
                for &u in graph.neighbors(v) {
                    let u = u as usize;
                    if self.member[u] && !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub(crate) fn ensure_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            return Err(invalid(format!(
                "the safe region |x| <= {} is empty (margin {})",
                self.limit, self.margin
            )));
        }
        Ok(())
    }
}

/// Vertices in ∂F: those outside F with a neighbour in F, and those in F
/// with a neighbour outside F. `in_f` is indexed by vertex.
pub(crate) fn boundary_vertices(graph: &RipsGraph, in_f: &[bool]) -> Vec<usize> {
    (0..graph.len())
        .filter(|&x| graph.neighbors(x).iter().any(|&y| in_f[y as usize] != in_f[x]))
        .collect()
}

/// ∂F as point ids, ascending. F must lie in the safe region.
pub fn boundary_set(graph: &RipsGraph, safe: &SafeRegion, set: &[PointId]) -> Result<Vec<PointId>> {
    let f = safe.resolve(graph, set)?;
    let mut in_f = vec![false; graph.len()];
    for &i in &f {
        in_f[i] = true;
    }
    let mut out: Vec<PointId> = boundary_vertices(graph, &in_f)
        .into_iter()
        .map(|i| graph.point(i))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// num / den, with a positive mass over an empty boundary counting as +∞.
pub(crate) fn quotient(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

pub(crate) fn exact_cap(safe: &SafeRegion, opts: &SearchOptions) -> Result<()> {
    let cap = opts.max_exact_vertices.min(30);
    if safe.len() > cap {
        return Err(Error::RegionTooLarge {
            vertices: safe.len(),
            cap,
        });
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use std::sync::Arc;

    use crate::metric::{generate_space, SpaceSpec};
    use crate::rips::RipsGraph;

    /// The path 0-1-2-3-4 based at 2, at ε = 1/3 so Rips edges are the
    /// path edges.
    pub fn path5() -> RipsGraph {
        let s = Arc::new(
            generate_space(&SpaceSpec::Graph {
                vertices: 5,
                edges: vec![(0, 1), (1, 2), (2, 3), (3, 4)],
                basepoint: 2,
            })
            .unwrap(),
        );
        RipsGraph::on_points(&s, (0..5).collect(), 1.0 / 3.0).unwrap()
    }

    /// A connected graph on `n` vertices: a random spanning tree plus
    /// extra edges, based at vertex 0.
    pub fn random_graph(n: usize, extra: usize, seed: u64) -> RipsGraph {
        use rand::Rng as _;
        let mut rng = crate::rng::stream(seed, "fixture-graph");
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
        for _ in 0..extra {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                edges.push((a.min(b), a.max(b)));
            }
        }
        let s = Arc::new(
            generate_space(&SpaceSpec::Graph {
                vertices: n,
                edges,
                basepoint: 0,
            })
            .unwrap(),
        );
        RipsGraph::on_points(&s, (0..n).collect(), 1.0 / 3.0).unwrap()
    }
}
