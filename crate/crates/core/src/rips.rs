//! Rips graphs on nets: p ~ q iff 0 < d(p, q) <= 3ε.

use std::collections::{HashMap, VecDeque};
use std::io::Write;
use std::sync::{Arc, Mutex};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metric::{le, DoublingProfile, FiniteMetricSpace, PointId};
use crate::net::PointedNet;
use crate::TOL;

/// Hop distances from one source; `UNREACHED` marks other components.
pub type HopTable = Arc<Vec<u32>>;
pub const UNREACHED: u32 = u32::MAX;

#[derive(Debug)]
pub struct RipsGraph {
    space: Arc<FiniteMetricSpace>,
    eps: f64,
    members: Vec<PointId>,
    slot: HashMap<PointId, u32>,
    adj: Vec<Vec<u32>>,
    hops: Mutex<HashMap<u32, HopTable>>,
}

impl Clone for RipsGraph {
    fn clone(&self) -> Self {
        RipsGraph {
            space: Arc::clone(&self.space),
            eps: self.eps,
            members: self.members.clone(),
            slot: self.slot.clone(),
            adj: self.adj.clone(),
            hops: Mutex::new(HashMap::new()),
        }
    }
}

impl RipsGraph {
    /// Rips graph of a net at the net's own scale.
    pub fn build(net: &PointedNet) -> RipsGraph {
        Self::on_points(net.space(), net.members().to_vec(), net.eps()).expect("net members are valid points")
    }

    /// Rips graph at scale ε on an arbitrary vertex subset (a quasi-lattice).
    pub fn on_points(space: &Arc<FiniteMetricSpace>, members: Vec<PointId>, eps: f64) -> Result<RipsGraph> {
        if !(eps > 0.0) {
            return Err(invalid("Rips scale must be positive"));
        }
        let mut slot = HashMap::with_capacity(members.len());
        for (i, &p) in members.iter().enumerate() {
            if p >= space.len() || slot.insert(p, i as u32).is_some() {
                return Err(invalid(format!("bad Rips vertex {p}")));
            }
        }
        let reach = 3.0 * eps;
        // |d(p, o) - d(q, o)| <= d(p, q) limits the candidates to a window
        // of vertices sorted by norm
        let mut by_norm: Vec<(f64, u32)> = members
            .iter()
            .enumerate()
            .map(|(i, &p)| (space.norm(p), i as u32))
            .collect();
        by_norm.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let adj: Vec<Vec<u32>> = (0..members.len())
            .into_par_iter()
            .map(|i| {
                let p = members[i];
                let r = space.norm(p);
                let lo = by_norm.partition_point(|&(n, _)| n < r - reach - 2.0 * TOL);
                let hi = by_norm.partition_point(|&(n, _)| n <= r + reach + 2.0 * TOL);
                let mut out: Vec<u32> = by_norm[lo..hi]
                    .iter()
                    .map(|&(_, j)| j)
                    .filter(|&j| {
                        let d = space.dist(p, members[j as usize]);
                        j as usize != i && d > 0.0 && le(d, reach)
                    })
                    .collect();
                out.sort_unstable();
                out
            })
            .collect();
        Ok(RipsGraph {
            space: Arc::clone(space),
            eps,
            members,
            slot,
            adj,
            hops: Mutex::new(HashMap::new()),
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Vertex `i` is the space point `members()[i]`.
    pub fn members(&self) -> &[PointId] {
        &self.members
    }

    pub fn point(&self, i: usize) -> PointId {
        self.members[i]
    }

    pub fn vertex(&self, p: PointId) -> Option<usize> {
        self.slot.get(&p).map(|&i| i as usize)
    }

    /// Neighbours of vertex `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn valency(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn max_valency(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// histogram[k] = number of vertices of valency k.
    pub fn valency_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.max_valency() + 1];
        for a in &self.adj {
            h[a.len()] += 1;
        }
        h
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges (i, j) with i < j, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, a)| a.iter().map(move |&j| (i, j as usize)).filter(|&(i, j)| i < j))
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    /// |p| = d(p, o) of vertex `i`.
    pub fn norm(&self, i: usize) -> f64 {
        self.space.norm(self.members[i])
    }

    pub fn edge_length(&self, i: usize, j: usize) -> f64 {
        self.space.dist(self.members[i], self.members[j])
    }

    /// Breadth-first hop distances from vertex `source`, memoised.
    pub fn hops_from(&self, source: usize) -> HopTable {
        if let Some(t) = self.hops.lock().expect("hop cache").get(&(source as u32)) {
            return Arc::clone(t);
        }
        let mut dist = vec![UNREACHED; self.len()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = dist[u] + 1;
                    queue.push_back(v as usize);
                }
            }
        }
        let table = Arc::new(dist);
        self.hops
            .lock()
            .expect("hop cache")
            .entry(source as u32)
            .or_insert_with(|| Arc::clone(&table));
        table
    }

    /// Combinatorial écart between vertices; `None` when disconnected.
    pub fn ecart(&self, i: usize, j: usize) -> Option<u32> {
        let d = self.hops_from(i)[j];
        (d != UNREACHED).then_some(d)
    }

    /// Écart between two member points.
    pub fn ecart_points(&self, p: PointId, q: PointId) -> Result<Option<u32>> {
        let i = self
            .vertex(p)
            .ok_or_else(|| invalid(format!("{p} is not a Rips vertex")))?;
        let j = self
            .vertex(q)
            .ok_or_else(|| invalid(format!("{q} is not a Rips vertex")))?;
        Ok(self.ecart(i, j))
    }

    /// Connected components, as sizes in descending order.
    pub fn connectivity(&self) -> Connectivity {
        let mut comp = vec![usize::MAX; self.len()];
        let mut sizes = Vec::new();
        for s in 0..self.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = sizes.len();
            comp[s] = c;
            let mut stack = vec![s];
            let mut size = 0;
            while let Some(u) = stack.pop() {
                size += 1;
                for &v in &self.adj[u] {
                    if comp[v as usize] == usize::MAX {
                        comp[v as usize] = c;
                        stack.push(v as usize);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Connectivity {
            connected: sizes.len() <= 1,
            component_sizes: sizes,
        }
    }

    /// Pairs of vertex indices drawn from a pair specification.
    pub fn resolve_pairs(&self, pairs: &PairSample) -> Result<Vec<(usize, usize)>> {
        let n = self.len();
        Ok(match pairs {
            PairSample::Exhaustive => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
            PairSample::Random { count, seed } => {
                let mut rng = crate::rng::stream(*seed, "pairs");
                (0..*count)
                    .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
                    .collect()
            }
            PairSample::Explicit(list) => list
                .iter()
                .map(|&(p, q)| match (self.vertex(p), self.vertex(q)) {
                    (Some(i), Some(j)) => Ok((i, j)),
                    _ => Err(invalid(format!("pair ({p}, {q}) is not a pair of Rips vertices"))),
                })
                .collect::<Result<_>>()?,
        })
    }

    /// Write the edge list as CSV with columns p,q,dist (space point ids).
    pub fn write_edge_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "p,q,dist")?;
        for (i, j) in self.edges() {
            writeln!(
                out,
                "{},{},{}",
                self.members[i],
                self.members[j],
                self.edge_length(i, j)
            )?;
        }
        Ok(())
    }
}

pub use crate::metric::PairSample;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connectivity {
    pub connected: bool,
    pub component_sizes: Vec<usize>,
}

/// Worst pair on one side of the quasi-isometry inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiWitness {
    pub p: PointId,
    pub q: PointId,
    pub dist: f64,
    pub ecart: Option<u32>,
    #[serde(with = "crate::io::float_or_inf")]
    pub slack: f64,
}

/// Outcome of [`verify_qi_bounds`]. Slack is rhs - lhs; negative slack is a
/// violation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiReport {
    pub q: f64,
    pub eps: f64,
    pub pairs: usize,
    pub exact_arithmetic: bool,
    /// d_R <= Q d / ε + 1
    pub upper: Option<QiWitness>,
    /// d <= 3ε d_R
    pub lower: Option<QiWitness>,
    pub holds: bool,
}

/// Check d_R(p,q) <= Q d(p,q)/ε + 1 and d(p,q) <= 3ε d_R(p,q) on the given
/// pairs. Integral spaces at integral ε and Q are compared exactly.
pub fn verify_qi_bounds(graph: &RipsGraph, q: f64, pairs: &PairSample) -> Result<QiReport> {
    if !(q > 0.0) {
        return Err(invalid("quasiconvexity constant must be positive"));
    }
    let eps = graph.eps();
    let exact = graph.space().is_integral() && eps.fract() == 0.0 && q.fract() == 0.0;
    let tol = if exact { 0.0 } else { TOL };
    let pairs = graph.resolve_pairs(pairs)?;
    let mut by_source: Vec<(usize, usize)> = pairs.clone();
    by_source.sort_unstable();

    let mut upper: Option<QiWitness> = None;
    let mut lower: Option<QiWitness> = None;
    let mut holds = true;
    let keep = |slot: &mut Option<QiWitness>, w: QiWitness| {
        if slot.as_ref().is_none_or(|b| w.slack < b.slack) {
            *slot = Some(w);
        }
    };
    for &(i, j) in &by_source {
        let d = graph.edge_length(i, j);
        let (p, qp) = (graph.point(i), graph.point(j));
        match graph.ecart(i, j) {
            None => {
                holds = false;
                keep(
                    &mut upper,
                    QiWitness {
                        p,
                        q: qp,
                        dist: d,
                        ecart: None,
                        slack: f64::NEG_INFINITY,
                    },
                );
            }
            Some(h) => {
                let h = f64::from(h);
                // multiply through by ε so integral inputs stay integral
                let up = (q * d + eps) - h * eps;
                let lo = 3.0 * eps * h - d;
                if up < -tol || lo < -tol {
                    holds = false;
                }
                keep(
                    &mut upper,
                    QiWitness {
                        p,
                        q: qp,
                        dist: d,
                        ecart: Some(h as u32),
                        slack: up / eps,
                    },
                );
                keep(
                    &mut lower,
                    QiWitness {
                        p,
                        q: qp,
                        dist: d,
                        ecart: Some(h as u32),
                        slack: lo,
                    },
                );
            }
        }
    }
    Ok(QiReport {
        q,
        eps,
        pairs: pairs.len(),
        exact_arithmetic: exact,
        upper,
        lower,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValencyReport {
    pub max_valency: usize,
    pub histogram: Vec<usize>,
    /// N̂_d(4ε), N̂_d(2ε), N̂_d(ε)
    pub factors: [usize; 3],
    pub bound: usize,
    pub holds: bool,
}

/// max valency <= N̂_d(4ε) N̂_d(2ε) N̂_d(ε).
pub fn valency_bound_check(graph: &RipsGraph, profile: &DoublingProfile) -> Result<ValencyReport> {
    let eps = graph.eps();
    let get = |r: f64| {
        profile
            .at(r)
            .ok_or_else(|| invalid(format!("doubling profile lacks radius {r}")))
    };
    let factors = [get(4.0 * eps)?, get(2.0 * eps)?, get(eps)?];
    let bound = factors.iter().product();
    let max_valency = graph.max_valency();
    Ok(ValencyReport {
        max_valency,
        histogram: graph.valency_histogram(),
        factors,
        bound,
        holds: max_valency <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{doubling_profile, generate_space, SpaceSpec};

    fn line_graph(r: u32, eps: f64) -> RipsGraph {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 1, radius: r }).unwrap());
        RipsGraph::build(&PointedNet::build(&s, eps).unwrap())
    }

    fn at(g: &RipsGraph, v: i64) -> usize {
        (0..g.len())
            .find(|&i| g.space().coords(g.point(i)).unwrap()[0] as i64 == v)
            .unwrap()
    }

    #[test]
    fn line_valency_and_ecart() {
        let g = line_graph(50, 1.0);
        assert_eq!(g.valency(at(&g, 0)), 6);
        assert_eq!(g.max_valency(), 6);
        assert_eq!(g.ecart(at(&g, 0), at(&g, 30)), Some(10));
        assert_eq!(g.ecart(at(&g, 7), at(&g, 7)), Some(0));
        assert_eq!(g.ecart(at(&g, 7), at(&g, 9)), Some(1));
        assert!(g.connectivity().connected);
    }

    #[test]
    fn edge_rule_is_closed_and_symmetric() {
        let g = line_graph(20, 1.0);
        for i in 0..g.len() {
            assert!(!g.are_adjacent(i, i));
            for j in 0..g.len() {
                let d = g.edge_length(i, j);
                assert_eq!(g.are_adjacent(i, j), d > 0.0 && d <= 3.0);
                assert_eq!(g.are_adjacent(i, j), g.are_adjacent(j, i));
            }
        }
    }

    #[test]
    fn two_far_points_are_disconnected() {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 1, radius: 10 }).unwrap());
        let g = RipsGraph::on_points(&s, vec![0, 19], 1.0).unwrap(); // 0 and 10
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.connectivity().component_sizes, vec![1, 1]);
        assert_eq!(g.ecart(0, 1), None);
        let g = RipsGraph::on_points(&s, vec![0, 19], 10.0 / 3.0).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn qi_bounds_on_the_line() {
        let g = line_graph(50, 1.0);
        let pair = PairSample::Explicit(vec![(g.point(at(&g, 0)), g.point(at(&g, 30))), (3, 3)]);
        let r = verify_qi_bounds(&g, 1.0, &pair).unwrap();
        assert!(r.holds && r.exact_arithmetic);
        // 30 <= 3 * 10 is tight
        assert_eq!(r.lower.unwrap().slack, 0.0);
        let r = verify_qi_bounds(&g, 1.0, &PairSample::Random { count: 2000, seed: 4 }).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn valency_bound_on_line() {
        let g = line_graph(50, 1.0);
        let p = doubling_profile(g.space(), &[1.0, 2.0, 4.0], 500, 0).unwrap();
        let r = valency_bound_check(&g, &p).unwrap();
        assert_eq!(r.max_valency, 6);
        assert!(r.holds && r.bound >= 6);
    }

    #[test]
    fn one_point_net_has_no_edges() {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 2, radius: 2 }).unwrap());
        let g = RipsGraph::build(&PointedNet::build(&s, 50.0).unwrap());
        assert_eq!(g.max_valency(), 0);
        assert_eq!(g.valency_histogram(), vec![1]);
    }

    #[test]
    fn rebuild_is_identical() {
        let s = Arc::new(generate_space(&SpaceSpec::HeisenbergZ { radius: 4 }).unwrap());
        let net = PointedNet::build(&s, 1.0).unwrap();
        let a = RipsGraph::build(&net);
        let b = RipsGraph::build(&net);
        assert_eq!(a.adj, b.adj);
    }

    #[test]
    fn edge_csv_has_header_and_rows() {
        let g = line_graph(2, 1.0);
        let mut buf = Vec::new();
        g.write_edge_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p,q,dist\n"));
        assert_eq!(text.lines().count(), 1 + g.edge_count());
    }
}
