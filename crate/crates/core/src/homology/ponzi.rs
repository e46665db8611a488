use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{boundary1, control_norm, propagation, Chain0, Chain1};
use crate::control::ControlFunction;
use crate::error::{invalid, Error, Result};
use crate::flow::{FlowNetwork, FLOW_TOL};
use crate::io::{space_fingerprint, FORMAT_VERSION};
use crate::metric::PointId;
use crate::rips::RipsGraph;
use crate::TOL;

/// Tolerance on ∂t = 1 and on the flow deficit.
pub const CERT_TOL: f64 = 1e-9;

/// Sources F and absorbing sinks, as space point ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub sources: Vec<PointId>,
    pub sinks: Vec<PointId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Truncation radius minus `radius`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl Region {
    /// F = {x : |x| < R} and sinks {x : |x| > R} among the graph vertices.
    /// The truncation must leave at least one Rips hop (3ε) beyond R.
    pub fn ball(graph: &RipsGraph, radius: f64) -> Result<Region> {
        let space = graph.space();
        let margin = space.truncation_radius() - radius;
        if margin < 3.0 * graph.eps() - TOL {
            return Err(invalid(format!(
                "region radius {radius} leaves margin {margin} inside truncation {}, need at least 3ε = {}",
                space.truncation_radius(),
                3.0 * graph.eps()
            )));
        }
        let mut sources = Vec::new();
        let mut sinks = Vec::new();
        for &p in graph.members() {
            let r = space.norm(p);
            if r < radius - TOL {
                sources.push(p);
            } else if r > radius + TOL {
                sinks.push(p);
            }
        }
        sources.sort_unstable();
        sinks.sort_unstable();
        Ok(Region {
            sources,
            sinks,
            radius: Some(radius),
            margin: Some(margin),
        })
    }

    pub fn explicit(mut sources: Vec<PointId>, mut sinks: Vec<PointId>) -> Region {
        sources.sort_unstable();
        sources.dedup();
        sinks.sort_unstable();
        sinks.dedup();
        Region {
            sources,
            sinks,
            radius: None,
            margin: None,
        }
    }
}

/// Per-source piece t_y of a certificate, with ∂t_y = [y] - (sink terms).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub source: PointId,
    pub chain: Chain1,
}

/// A controlled 1-chain t with ∂t = 1 at every vertex of F.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PonziCertificate {
    pub format_version: u32,
    pub space_hash: String,
    pub eps: f64,
    pub rho: ControlFunction,
    /// Declared control constant.
    pub k: f64,
    /// Declared propagation.
    pub p: f64,
    pub region: Vec<PointId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub chain: Chain1,
    pub tails: Vec<Tail>,
}

/// Flow network of a Ponzi problem, reusable across values of K.
struct PonziNetwork<'a> {
    graph: &'a RipsGraph,
    net: FlowNetwork,
    /// (i, j, arc i -> j, ρ weight) per undirected edge; arc + 2 is j -> i.
    edge_arcs: Vec<(usize, usize, usize, f64)>,
    source_arcs: Vec<(usize, usize)>,
    is_sink: Vec<bool>,
    s: usize,
    t: usize,
}

impl<'a> PonziNetwork<'a> {
    fn new(graph: &'a RipsGraph, region: &Region, rho: &ControlFunction) -> Result<Self> {
        let n = graph.len();
        let (s, t) = (n, n + 1);
        let mut net = FlowNetwork::new(n + 2);
        let vertex = |p: PointId| {
            graph
                .vertex(p)
                .ok_or_else(|| invalid(format!("point {p} is not a vertex of the Rips graph")))
        };
        let mut is_sink = vec![false; n];
        for &p in &region.sinks {
            let v = vertex(p)?;
            is_sink[v] = true;
            net.add_arc(v, t, f64::INFINITY);
        }
        let mut source_arcs = Vec::with_capacity(region.sources.len());
        for &p in &region.sources {
            let v = vertex(p)?;
            if is_sink[v] {
                return Err(invalid(format!("point {p} is both a source and a sink")));
            }
            source_arcs.push((v, net.add_arc(s, v, 1.0)));
        }
        let space = graph.space();
        let mut edge_arcs = Vec::with_capacity(graph.edge_count());
        for (i, j) in graph.edges() {
            let w = rho.at(space.norm(graph.point(i)).max(space.norm(graph.point(j))));
            let a = net.add_arc(i, j, w);
            let b = net.add_arc(j, i, w);
            edge_arcs.push((i, j, a, w));
            debug_assert_eq!(b, a + 2);
        }
        Ok(PonziNetwork {
            graph,
            net,
            edge_arcs,
            source_arcs,
            is_sink,
            s,
            t,
        })
    }

    /// Smallest source point id from which no sink is reachable.
    fn unreachable_source(&self) -> Option<PointId> {
        let mut seen = self.is_sink.clone();
        let mut queue: VecDeque<usize> = (0..seen.len()).filter(|&v| seen[v]).collect();
        while let Some(u) = queue.pop_front() {
            for &v in self.graph.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v as usize);
                }
            }
        }
        self.source_arcs
            .iter()
            .filter(|&&(v, _)| !seen[v])
            .map(|&(v, _)| self.graph.point(v))
            .min()
    }

    fn solve(&mut self, k: f64) -> f64 {
        self.net.reset();
        for &(_, _, a, w) in &self.edge_arcs {
            self.net.set_capacity(a, k * w);
            self.net.set_capacity(a + 2, k * w);
        }
        self.net.max_flow(self.s, self.t)
    }

    fn demand(&self) -> f64 {
        self.source_arcs.len() as f64
    }

    fn is_feasible(&self, flow: f64) -> bool {
        flow >= self.demand() - CERT_TOL * self.demand().max(1.0)
    }

    /// Split the current flow into unit tails per source, in ascending
    /// source id, walking to the smallest-id neighbour with remaining flow
    /// and cancelling any cycle met on the way.
    fn decompose(&self) -> Result<Vec<Tail>> {
        let graph = self.graph;
        let n = graph.len();
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, a, _) in &self.edge_arcs {
            let f = self.net.flow(a) - self.net.flow(a + 2);
            if f > FLOW_TOL {
                out[i].push((j, f));
            } else if f < -FLOW_TOL {
                out[j].push((i, -f));
            }
        }
        for list in &mut out {
            list.sort_by_key(|&(j, _)| graph.point(j));
        }
        let mut cursor = vec![0usize; n];
        let mut sources: Vec<(PointId, usize, f64)> = self
            .source_arcs
            .iter()
            .map(|&(v, arc)| (graph.point(v), v, self.net.flow(arc)))
            .collect();
        sources.sort_by_key(|s| s.0);

        let mut tails = Vec::with_capacity(sources.len());
        for (p, x, supply) in sources {
            let mut chain = Chain1::new();
            let mut routed = 0.0;
            let mut remaining = supply;
            while remaining > FLOW_TOL {
                // path as (vertex, index into out[vertex] of the arc taken)
                let mut path: Vec<(usize, usize)> = Vec::new();
                let mut on_path: HashMap<usize, usize> = HashMap::from([(x, 0)]);
                let mut u = x;
                let stuck = loop {
                    if self.is_sink[u] {
                        break false;
                    }
                    while cursor[u] < out[u].len() && out[u][cursor[u]].1 <= FLOW_TOL {
                        cursor[u] += 1;
                    }
                    if cursor[u] == out[u].len() {
                        break true;
                    }
                    let k = cursor[u];
                    let v = out[u][k].0;
                    path.push((u, k));
                    if let Some(&start) = on_path.get(&v) {
                        let cycle = &path[start..];
                        let d = cycle.iter().map(|&(a, k)| out[a][k].1).fold(f64::INFINITY, f64::min);
                        for &(a, k) in cycle {
                            out[a][k].1 -= d;
                        }
                        for &(a, _) in &path[start + 1..] {
                            on_path.remove(&a);
                        }
                        path.truncate(start);
                        u = v;
                        continue;
                    }
                    on_path.insert(v, path.len());
                    u = v;
                };
                if stuck {
                    break;
                }
                let d = path.iter().map(|&(a, k)| out[a][k].1).fold(remaining, f64::min);
                for &(a, k) in &path {
                    out[a][k].1 -= d;
                    // flow a -> b is recorded as d·[b, a]
                    chain.add(graph.point(out[a][k].0), graph.point(a), d);
                }
                remaining -= d;
                routed += d;
            }
            if (routed - 1.0).abs() > 1e-6 {
                return Err(Error::Assertion(format!(
                    "flow decomposition routed {routed} units from point {p}, expected 1"
                )));
            }
            tails.push(Tail {
                source: p,
                chain: chain.scaled(1.0 / routed),
            });
        }
        Ok(tails)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PonziOutcome {
    pub feasible: bool,
    pub k: f64,
    pub flow: f64,
    pub demand: f64,
    pub deficit: f64,
    /// A source from which no sink can be reached.
    pub unreachable: Option<PointId>,
    pub certificate: Option<PonziCertificate>,
}

/// Decide whether every source can push one unit into the sinks through
/// arcs of capacity K·ρ(max(|u|, |v|)), and on success build the
/// certificate from the flow.
pub fn ponzi_feasible(graph: &RipsGraph, region: &Region, rho: &ControlFunction, k: f64) -> Result<PonziOutcome> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid(format!("control constant must be positive, got {k}")));
    }
    rho.validate()?;
    let mut network = PonziNetwork::new(graph, region, rho)?;
    let demand = network.demand();
    let unreachable = network.unreachable_source();
    let flow = network.solve(k);
    let feasible = unreachable.is_none() && network.is_feasible(flow);
    let certificate = if feasible {
        let tails = network.decompose()?;
        let mut chain = Chain1::new();
        for t in &tails {
            chain.axpy(1.0, &t.chain);
        }
        Some(PonziCertificate {
            format_version: FORMAT_VERSION,
            space_hash: space_fingerprint(graph.space()),
            eps: graph.eps(),
            rho: rho.clone(),
            k,
            p: 3.0 * graph.eps(),
            region: region.sources.clone(),
            region_radius: region.radius,
            margin: region.margin,
            seed: None,
            chain,
            tails,
        })
    } else {
        None
    };
    Ok(PonziOutcome {
        feasible,
        k,
        flow,
        demand,
        deficit: (demand - flow).max(0.0),
        unreachable,
        certificate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum CertificateFailure {
    /// ∂t at a region vertex differs from 1.
    Boundary {
        vertex: PointId,
        coefficient: f64,
    },
    Control {
        u: PointId,
        v: PointId,
        norm: f64,
        declared: f64,
    },
    Propagation {
        u: PointId,
        v: PointId,
        length: f64,
        declared: f64,
    },
    NotRipsEdge {
        u: PointId,
        v: PointId,
    },
    SpaceMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub passed: bool,
    pub boundary_ok: bool,
    pub control_ok: bool,
    pub propagation_ok: bool,
    pub edges_ok: bool,
    pub max_boundary_error: f64,
    pub control_norm: f64,
    pub declared_k: f64,
    pub propagation: f64,
    pub declared_p: f64,
    pub first_failure: Option<CertificateFailure>,
}

/// Check (a) ∂t = 1 on F, (b) K(t) <= K, (c) P(t) <= P and (d) every
/// support edge is a Rips edge of `graph`.
pub fn verify_certificate(cert: &PonziCertificate, graph: &RipsGraph) -> CertificateReport {
    let space = graph.space();
    let mut failures: Vec<CertificateFailure> = Vec::new();
    if cert.space_hash != space_fingerprint(space) {
        failures.push(CertificateFailure::SpaceMismatch);
    }
    let bd = boundary1(&cert.chain);
    let mut max_boundary_error = 0.0f64;
    let mut boundary_ok = true;
    for &x in &cert.region {
        let err = (bd.get(x) - 1.0).abs();
        max_boundary_error = max_boundary_error.max(err);
        if err > CERT_TOL && boundary_ok {
            boundary_ok = false;
            failures.push(CertificateFailure::Boundary {
                vertex: x,
                coefficient: bd.get(x),
            });
        }
    }

    let norm = control_norm(&cert.chain, space, &cert.rho);
    let control_ok = norm <= cert.k * (1.0 + CERT_TOL);
    if !control_ok {
        let (u, v, _) = cert
            .chain
            .iter()
            .find(|&(u, v, a)| a.abs() / cert.rho.at(space.norm(u).max(space.norm(v))) > cert.k * (1.0 + CERT_TOL))
            .expect("some edge exceeds the declared constant");
        failures.push(CertificateFailure::Control {
            u,
            v,
            norm,
            declared: cert.k,
        });
    }

    let prop = propagation(&cert.chain, space);
    let propagation_ok = prop <= cert.p + TOL;
    if !propagation_ok {
        let (u, v, _) = cert
            .chain
            .iter()
            .find(|&(u, v, _)| space.dist(u, v) > cert.p + TOL)
            .expect("some edge is too long");
        failures.push(CertificateFailure::Propagation {
            u,
            v,
            length: space.dist(u, v),
            declared: cert.p,
        });
    }

    let bad_edge = cert.chain.iter().find(
        |&(u, v, _)| !matches!((graph.vertex(u), graph.vertex(v)), (Some(i), Some(j)) if graph.are_adjacent(i, j)),
    );
    let edges_ok = bad_edge.is_none();
    if let Some((u, v, _)) = bad_edge {
        failures.push(CertificateFailure::NotRipsEdge { u, v });
    }

    CertificateReport {
        passed: failures.is_empty(),
        boundary_ok,
        control_ok,
        propagation_ok,
        edges_ok,
        max_boundary_error,
        control_norm: norm,
        declared_k: cert.k,
        propagation: prop,
        declared_p: cert.p,
        first_failure: failures.into_iter().next(),
    }
}

/// The fundamental chain of the certificate's region.
pub fn fundamental_chain(cert: &PonziCertificate) -> Chain0 {
    Chain0::fundamental(cert.region.iter().copied())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSearch {
    /// Relative tolerance of the bisection.
    pub tol: f64,
    /// Largest K tried before giving up.
    pub cap: f64,
}

impl Default for KSearch {
    fn default() -> Self {
        KSearch { tol: 1e-3, cap: 1e6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KStar {
    /// Smallest feasible K found; +∞ when infeasible at the cap.
    #[serde(with = "crate::io::float_or_inf")]
    pub k: f64,
    /// Largest K found infeasible.
    #[serde(with = "crate::io::float_or_inf")]
    pub infeasible_below: f64,
    pub feasible_at_cap: bool,
    pub solves: usize,
}

/// Minimal control constant K* by doubling and bisection.
pub fn min_control_constant(
    graph: &RipsGraph,
    region: &Region,
    rho: &ControlFunction,
    search: KSearch,
) -> Result<KStar> {
    rho.validate()?;
    if !(search.tol > 0.0) || !(search.cap > 0.0) {
        return Err(invalid("K search needs positive tolerance and cap"));
    }
    let mut network = PonziNetwork::new(graph, region, rho)?;
    if region.sources.is_empty() {
        return Ok(KStar {
            k: 0.0,
            infeasible_below: 0.0,
            feasible_at_cap: true,
            solves: 0,
        });
    }
    let infinite = |solves| KStar {
        k: f64::INFINITY,
        infeasible_below: search.cap,
        feasible_at_cap: false,
        solves,
    };
    if network.unreachable_source().is_some() {
        return Ok(infinite(0));
    }
    let mut solves = 0;
    let mut feasible = |k: f64, solves: &mut usize| {
        *solves += 1;
        let f = network.solve(k);
        network.is_feasible(f)
    };
    let mut hi = 1.0f64.min(search.cap);
    let mut lo;
    if feasible(hi, &mut solves) {
        lo = hi / 2.0;
        while feasible(lo, &mut solves) {
            hi = lo;
            lo /= 2.0;
            if lo < 1e-12 {
                return Err(Error::Assertion("Ponzi problem is feasible at every K".into()));
            }
        }
    } else {
        loop {
            lo = hi;
            if hi >= search.cap {
                return Ok(infinite(solves));
            }
            hi = (hi * 2.0).min(search.cap);
            if feasible(hi, &mut solves) {
                break;
            }
        }
    }
    while hi - lo > search.tol * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid, &mut solves) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(KStar {
        k: hi,
        infeasible_below: lo,
        feasible_at_cap: true,
        solves,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub radius: f64,
    #[serde(with = "crate::io::float_or_inf")]
    pub k_star: f64,
    pub feasible_at_cap: bool,
    /// Wall-clock seconds; excluded from determinism comparisons.
    pub runtime: f64,
}

/// K*(R) for ball regions of each radius, solved in parallel.
pub fn ponzi_sweep(graph: &RipsGraph, rho: &ControlFunction, radii: &[f64], search: KSearch) -> Result<Vec<SweepRow>> {
    radii
        .par_iter()
        .map(|&r| {
            let start = Instant::now();
            let region = Region::ball(graph, r)?;
            let k = min_control_constant(graph, &region, rho, search)?;
            Ok(SweepRow {
                radius: r,
                k_star: k.k,
                feasible_at_cap: k.feasible_at_cap,
                runtime: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// CSV with header `R,K*,feasible_at_cap,runtime`.
pub fn write_sweep_csv(rows: &[SweepRow], mut out: impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "R,K*,feasible_at_cap,runtime")?;
    for r in rows {
        writeln!(out, "{},{},{},{:.6}", r.radius, r.k_star, r.feasible_at_cap, r.runtime)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metric::{generate_space, SpaceSpec};
    use crate::net::PointedNet;

    fn graph_of(spec: SpaceSpec, eps: f64) -> RipsGraph {
        let s = Arc::new(generate_space(&spec).unwrap());
        RipsGraph::build(&PointedNet::build(&s, eps).unwrap())
    }

    fn line(r: u32) -> RipsGraph {
        graph_of(SpaceSpec::Zn { dims: 1, radius: r }, 1.0)
    }

    #[test]
    fn empty_region_is_feasible() {
        let g = line(10);
        let out = ponzi_feasible(&g, &Region::explicit(vec![], vec![0]), &ControlFunction::Constant, 1.0).unwrap();
        assert!(out.feasible);
        assert!(out.certificate.unwrap().chain.is_zero());
    }

    #[test]
    fn single_edge() {
        let g = graph_of(
            SpaceSpec::Graph {
                vertices: 2,
                edges: vec![(0, 1)],
                basepoint: 0,
            },
            1.0 / 3.0,
        );
        let region = Region::explicit(vec![0], vec![1]);
        let rho = ControlFunction::affine(1.0);
        let out = ponzi_feasible(&g, &region, &rho, 0.5).unwrap();
        assert!(out.feasible);
        let cert = out.certificate.unwrap();
        assert_eq!(cert.chain.get(1, 0), 1.0);
        assert!(verify_certificate(&cert, &g).passed);
        let k = min_control_constant(&g, &region, &rho, KSearch::default()).unwrap();
        assert!(k.k >= 0.5 && k.k <= 0.5 * 1.001, "{k:?}");
        assert!(!ponzi_feasible(&g, &region, &rho, 0.49).unwrap().feasible);
    }

    #[test]
    fn line_with_affine_control() {
        let g = line(210);
        let region = Region::ball(&g, 200.0).unwrap();
        assert_eq!(region.sources.len(), 399);
        let out = ponzi_feasible(&g, &region, &ControlFunction::affine(1.0), 1.0).unwrap();
        assert!(out.feasible);
        let report = verify_certificate(out.certificate.as_ref().unwrap(), &g);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn line_k_star_matches_cut_count() {
        // 2R - 1 units leave through two ends of six lanes each
        let g = line(60);
        for r in [10.0, 20.0, 30.0] {
            let region = Region::ball(&g, r).unwrap();
            let k = min_control_constant(&g, &region, &ControlFunction::Constant, KSearch::default()).unwrap();
            let exact = (2.0 * r - 1.0) / 12.0;
            assert!(
                k.k >= exact * (1.0 - 1e-9) && k.k <= exact * 1.001,
                "R={r}: {k:?} vs {exact}"
            );
        }
    }

    #[test]
    fn margin_is_enforced() {
        let g = line(20);
        assert!(Region::ball(&g, 18.0).is_err());
        assert!(Region::ball(&g, 17.0).is_ok());
    }

    #[test]
    fn unreachable_source_is_reported() {
        let g = graph_of(
            SpaceSpec::Graph {
                vertices: 4,
                edges: vec![(0, 1), (1, 2), (2, 3)],
                basepoint: 0,
            },
            0.2,
        );
        // scale 0.2 reaches 0.6 < 1: no edges at all
        let out = ponzi_feasible(
            &g,
            &Region::explicit(vec![0], vec![3]),
            &ControlFunction::Constant,
            10.0,
        )
        .unwrap();
        assert!(!out.feasible);
        assert_eq!(out.unreachable, Some(0));
        let k = min_control_constant(
            &g,
            &Region::explicit(vec![0], vec![3]),
            &ControlFunction::Constant,
            KSearch::default(),
        )
        .unwrap();
        assert!(k.k.is_infinite() && !k.feasible_at_cap);
    }

    #[test]
    fn tampered_certificates_fail() {
        let g = line(30);
        let region = Region::ball(&g, 20.0).unwrap();
        let rho = ControlFunction::Constant;
        let cert = ponzi_feasible(&g, &region, &rho, 5.0).unwrap().certificate.unwrap();
        assert!(verify_certificate(&cert, &g).passed);

        let mut bumped = cert.clone();
        let (u, v, _) = bumped.chain.iter().next().unwrap();
        bumped.chain.add(u, v, 1.0);
        let r = verify_certificate(&bumped, &g);
        assert!(!r.boundary_ok);
        assert!(matches!(r.first_failure, Some(CertificateFailure::Boundary { .. })));

        let mut tight = cert.clone();
        tight.k = r.control_norm / 2.0;
        assert!(!verify_certificate(&tight, &g).control_ok);

        let mut short = cert.clone();
        short.p = 1.0;
        assert!(!verify_certificate(&short, &g).propagation_ok);

        let mut long = cert;
        let far = g.members().iter().copied().find(|&p| g.space().norm(p) > 10.0).unwrap();
        long.chain.add(0, far, 1e-3);
        assert!(!verify_certificate(&long, &g).edges_ok);
    }

    #[test]
    fn tails_sum_to_the_chain_with_unit_boundaries() {
        let g = graph_of(SpaceSpec::FreeGroup { rank: 2, radius: 5 }, 1.0 / 3.0);
        let region = Region::ball(&g, 4.0).unwrap();
        let cert = ponzi_feasible(&g, &region, &ControlFunction::Constant, 2.0)
            .unwrap()
            .certificate
            .unwrap();
        let mut total = Chain1::new();
        for t in &cert.tails {
            total.axpy(1.0, &t.chain);
            let b = boundary1(&t.chain);
            assert!((b.get(t.source) - 1.0).abs() < 1e-12);
            for (x, c) in b.iter() {
                assert!(x == t.source || c < 0.0 || c.abs() < 1e-12);
            }
        }
        let mut diff = total;
        diff.axpy(-1.0, &cert.chain);
        assert!(diff.iter().all(|(_, _, c)| c.abs() < 1e-12));
    }

    #[test]
    fn k_star_is_monotone_in_region_and_rho() {
        let g = line(40);
        let rho1 = ControlFunction::Constant;
        let rho2 = ControlFunction::affine(1.0);
        let mut last = 0.0;
        for r in [5.0, 10.0, 20.0, 30.0] {
            let region = Region::ball(&g, r).unwrap();
            let k1 = min_control_constant(&g, &region, &rho1, KSearch::default()).unwrap().k;
            let k2 = min_control_constant(&g, &region, &rho2, KSearch::default()).unwrap().k;
            assert!(k1 >= last * (1.0 - 1e-3));
            assert!(k2 <= k1 * (1.0 + 1e-3));
            last = k1;
        }
    }

    #[test]
    fn sweep_csv() {
        let g = line(30);
        let rows = ponzi_sweep(&g, &ControlFunction::Constant, &[10.0, 20.0], KSearch::default()).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("R,K*,feasible_at_cap,runtime\n10,"));
        let mut empty = Vec::new();
        write_sweep_csv(&[], &mut empty).unwrap();
        assert_eq!(empty, b"R,K*,feasible_at_cap,runtime\n");
    }
}
