use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{bfs_blob, enumerate_masks, greedy_search, Objective};
use super::{exact_cap, quotient, Method, SafeRegion, SearchOptions, WeightMode};
use crate::control::ControlFunction;
use crate::error::{invalid, Error, Result};
use crate::flow::FlowNetwork;
use crate::metric::PointId;
use crate::rips::RipsGraph;
use crate::rng;

const ETA_SUPPORT_CAP: usize = 64;
const DINKELBACH_ROUNDS: usize = 200;

/// Outcome of trying random η against a Sobolev constant.
/// Ratio of one random η, and the best superlevel set when it beats the constant.
type EtaDraw = (f64, Option<(Vec<usize>, f64)>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaValidation {
    pub samples: usize,
    /// Largest quotient among the samples.
    #[serde(with = "crate::io::float_or_inf")]
    pub max_ratio: f64,
    /// Some sample exceeded D*(1 + 1e-9).
    pub exceeded: bool,
    /// A superlevel set of some sample improved a greedy bound.
    pub improved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub rho: ControlFunction,
    pub weights: WeightMode,
    pub method: Method,
    /// False when the value is only a lower bound.
    pub certified: bool,
    pub eps: f64,
    pub margin: f64,
    pub safe_vertices: usize,
    /// η* = indicator of this set, as point ids.
    pub best_set: Vec<PointId>,
    /// m(F*)
    pub numerator: f64,
    /// Σ over edges {p, q} leaving F* of (m_p + m_q) ρ(|(p, q)|)
    pub denominator: f64,
    /// D* = numerator / denominator.
    #[serde(with = "crate::io::float_or_inf")]
    pub value: f64,
    /// Subsets enumerated, cut rounds, or hill-climbing moves.
    pub examined: u64,
    pub validation: Option<EtaValidation>,
}

impl SobolevReport {
    /// η* as sparse (point, value) pairs.
    pub fn best_function(&self) -> Vec<(PointId, f64)> {
        self.best_set.iter().map(|&p| (p, 1.0)).collect()
    }
}

/// Masses and edge weights of the Sobolev quotient on one graph.
#[derive(Clone, Debug)]
pub struct SobolevProblem<'a> {
    graph: &'a RipsGraph,
    safe: SafeRegion,
    mass: Vec<f64>,
    /// Aligned with `graph.neighbors(v)`: (m_v + m_u) ρ(max(|v|, |u|)).
    edge_weight: Vec<Vec<f64>>,
}

impl<'a> SobolevProblem<'a> {
    pub fn new(
        graph: &'a RipsGraph,
        rho: &ControlFunction,
        weights: WeightMode,
        margin: Option<f64>,
    ) -> Result<SobolevProblem<'a>> {
        rho.validate()?;
        let safe = SafeRegion::for_graph(graph, margin)?;
        let space = graph.space();
        let mass: Vec<f64> = match weights {
            WeightMode::Counting => vec![1.0; graph.len()],
            WeightMode::Measure => (0..graph.len())
                .into_par_iter()
                .map(|i| space.ball_weight(graph.point(i), graph.eps()))
                .collect(),
        };
        let edge_weight = (0..graph.len())
            .map(|v| {
                graph
                    .neighbors(v)
                    .iter()
                    .map(|&u| {
                        let u = u as usize;
                        (mass[v] + mass[u]) * rho.at(graph.norm(v).max(graph.norm(u)))
                    })
                    .collect()
            })
            .collect();
        Ok(SobolevProblem {
            graph,
            safe,
            mass,
            edge_weight,
        })
    }

    pub fn safe_region(&self) -> &SafeRegion {
        &self.safe
    }

    /// m_p of a graph vertex.
    pub fn mass(&self, vertex: usize) -> f64 {
        self.mass[vertex]
    }

    /// (m(F), cut(F), ratio) for a set of safe points.
    pub fn set_ratio(&self, set: &[PointId]) -> Result<(f64, f64, f64)> {
        let f = self.safe.resolve(self.graph, set)?;
        let (num, den) = self.evaluate(&f);
        Ok((num, den, quotient(num, den)))
    }

    /// Σ m|η| over Σ_x Σ_{y ~ x} |η(x) - η(y)| ρ(|(x, y)|) m_x for η
    /// supported on safe points; zero entries are allowed.
    pub fn function_ratio(&self, eta: &[(PointId, f64)]) -> Result<(f64, f64, f64)> {
        let dense = self.dense(eta)?;
        let support: Vec<usize> = self
            .safe
            .vertices()
            .iter()
            .copied()
            .filter(|&v| dense[v] != 0.0)
            .collect();
        let (num, den) = self.function_terms(&dense, &support);
        Ok((num, den, quotient(num, den)))
    }

    /// The superlevel set {|η| >= t} with the largest set ratio, and that
    /// ratio. The function ratio never exceeds it.
    pub fn best_superlevel(&self, eta: &[(PointId, f64)]) -> Result<(Vec<PointId>, f64)> {
        let dense = self.dense(eta)?;
        let (set, r) = self.superlevel(&dense);
        Ok((set.into_iter().map(|v| self.graph.point(v)).collect(), r))
    }

    fn dense(&self, eta: &[(PointId, f64)]) -> Result<Vec<f64>> {
        let mut dense = vec![0.0; self.graph.len()];
        for &(p, x) in eta {
            if !x.is_finite() {
                return Err(invalid(format!("η({p}) = {x} is not finite")));
            }
            let v = self.safe.resolve(self.graph, &[p])?[0];
            dense[v] = x;
        }
        Ok(dense)
    }

    fn function_terms(&self, dense: &[f64], support: &[usize]) -> (f64, f64) {
        let mut num = 0.0;
        let mut den = 0.0;
        for &v in support {
            num += self.mass[v] * dense[v].abs();
            for (k, &u) in self.graph.neighbors(v).iter().enumerate() {
                let u = u as usize;
                let w = self.edge_weight[v][k];
                if dense[u] == 0.0 {
                    den += w * dense[v].abs();
                } else if u > v {
                    den += w * (dense[v] - dense[u]).abs();
                }
            }
        }
        (num, den)
    }

    fn superlevel(&self, dense: &[f64]) -> (Vec<usize>, f64) {
        let mut order: Vec<usize> = self
            .safe
            .vertices()
            .iter()
            .copied()
            .filter(|&v| dense[v] != 0.0)
            .collect();
        order.sort_by(|&a, &b| dense[b].abs().total_cmp(&dense[a].abs()).then(a.cmp(&b)));
        let mut best = (Vec::new(), 0.0f64);
        for k in 1..=order.len() {
            if k < order.len() && dense[order[k]].abs() == dense[order[k - 1]].abs() {
                continue;
            }
            let mut f = order[..k].to_vec();
            f.sort_unstable();
            let (num, den) = self.evaluate(&f);
            let r = quotient(num, den);
            if r > best.1 {
                best = (f, r);
            }
        }
        best
    }

    /// (m(F), cut(F)) in canonical order: members ascending, neighbours in
    /// adjacency order.
    fn evaluate(&self, f: &[usize]) -> (f64, f64) {
        let mut in_f = vec![false; self.graph.len()];
        for &v in f {
            in_f[v] = true;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for &v in f {
            num += self.mass[v];
            for (k, &u) in self.graph.neighbors(v).iter().enumerate() {
                if !in_f[u as usize] {
                    den += self.edge_weight[v][k];
                }
            }
        }
        (num, den)
    }

    /// A safe component with no edge leaving the region, if any.
    fn closed_component(&self) -> Option<Vec<usize>> {
        self.safe.components(self.graph).into_iter().find(|c| {
            c.iter()
                .all(|&v| self.graph.neighbors(v).iter().all(|&u| self.safe.contains(u as usize)))
        })
    }

    fn exact(&self, opts: &SearchOptions) -> Result<(Vec<usize>, u64)> {
        exact_cap(&self.safe, opts)?;
        let n = self.safe.len();
        let mut local = vec![u32::MAX; self.graph.len()];
        for (b, &v) in self.safe.vertices().iter().enumerate() {
            local[v] = b as u32;
        }
        let rows: Vec<(f64, Vec<(u32, f64)>)> = self
            .safe
            .vertices()
            .iter()
            .map(|&v| {
                let edges = self
                    .graph
                    .neighbors(v)
                    .iter()
                    .zip(&self.edge_weight[v])
                    .map(|(&u, &w)| (local[u as usize], w))
                    .collect();
                (self.mass[v], edges)
            })
            .collect();
        let (_, mask) = enumerate_masks(n, |mask| {
            let mut num = 0.0;
            let mut den = 0.0;
            for (b, (m, edges)) in rows.iter().enumerate() {
                if mask & (1 << b) == 0 {
                    continue;
                }
                num += m;
                for &(bit, w) in edges {
                    if bit == u32::MAX || mask & (1 << bit) == 0 {
                        den += w;
                    }
                }
            }
            quotient(num, den)
        });
        let f = (0..n)
            .filter(|&b| mask & (1 << b) != 0)
            .map(|b| self.safe.vertices()[b])
            .collect();
        Ok((f, (1u64 << n) - 1))
    }

    /// Dinkelbach: with λ the best ratio so far, a minimum cut of
    /// s -m_v-> v, v <-λw-> u, v -λw-> t (u safe, edges to unsafe
    /// vertices going to t) has source side F maximising m(F) - λ cut(F);
    /// stop when that maximum is zero.
    fn parametric(&self) -> Result<(Vec<usize>, u64)> {
        let n = self.safe.len();
        let mut local = vec![usize::MAX; self.graph.len()];
        for (b, &v) in self.safe.vertices().iter().enumerate() {
            local[v] = b;
        }
        let mut best = self.safe.vertices().to_vec();
        let (num, den) = self.evaluate(&best);
        let mut lambda = quotient(num, den);
        for round in 1..=DINKELBACH_ROUNDS {
            let (s, t) = (n, n + 1);
            let mut net = FlowNetwork::new(n + 2);
            for (b, &v) in self.safe.vertices().iter().enumerate() {
                net.add_arc(s, b, self.mass[v]);
                let mut out = 0.0;
                for (k, &u) in self.graph.neighbors(v).iter().enumerate() {
                    let w = lambda * self.edge_weight[v][k];
                    match local[u as usize] {
                        usize::MAX => out += w,
                        c if c > b => {
                            net.add_arc(b, c, w);
                            net.add_arc(c, b, w);
                        }
                        _ => {}
                    }
                }
                if out > 0.0 {
                    net.add_arc(b, t, out);
                }
            }
            net.max_flow(s, t);
            let side = net.source_side(s);
            let f: Vec<usize> = (0..n).filter(|&b| side[b]).map(|b| self.safe.vertices()[b]).collect();
            if f.is_empty() {
                return Ok((best, round as u64));
            }
            let (num, den) = self.evaluate(&f);
            let gain = num - lambda * den;
            if gain <= 1e-12 * num.max(1.0) {
                return Ok((best, round as u64));
            }
            let r = quotient(num, den);
            if r <= lambda {
                return Ok((best, round as u64));
            }
            best = f;
            lambda = r;
        }
        Err(Error::Assertion(format!(
            "parametric Sobolev search did not settle in {DINKELBACH_ROUNDS} rounds"
        )))
    }

    fn validate(&self, value: f64, samples: usize, seed: u64) -> (EtaValidation, Option<Vec<usize>>) {
        let results: Vec<EtaDraw> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::substream(seed, "sobolev-eta", i as u64);
                let dense = self.random_eta(&mut rng);
                let support: Vec<usize> = self
                    .safe
                    .vertices()
                    .iter()
                    .copied()
                    .filter(|&v| dense[v] != 0.0)
                    .collect();
                let (num, den) = self.function_terms(&dense, &support);
                let r = quotient(num, den);
                let better = (r > value).then(|| self.superlevel(&dense));
                (r, better)
            })
            .collect();
        let max_ratio = results.iter().map(|r| r.0).fold(0.0, f64::max);
        let exceeded = results.iter().any(|r| r.0 > value * (1.0 + 1e-9));
        let mut improvement: Option<(Vec<usize>, f64)> = None;
        for (_, better) in results.into_iter() {
            if let Some((set, r)) = better {
                if r > value && improvement.as_ref().is_none_or(|b| r > b.1) {
                    improvement = Some((set, r));
                }
            }
        }
        let validation = EtaValidation {
            samples,
            max_ratio,
            exceeded,
            improved: improvement.is_some(),
        };
        (validation, improvement.map(|b| b.0))
    }

    /// Up to four distinct magnitudes with random signs on a random
    /// connected blob of the safe region.
    fn random_eta(&self, rng: &mut rng::Rng) -> Vec<f64> {
        let vs = self.safe.vertices();
        let start = vs[rng.gen_range(0..vs.len())];
        let size = rng.gen_range(1..=vs.len().min(ETA_SUPPORT_CAP));
        let blob = bfs_blob(self.graph, &self.safe, start, size);
        let levels: Vec<f64> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0.05..=1.0)).collect();
        let mut dense = vec![0.0; self.graph.len()];
        for v in blob {
            let x = levels[rng.gen_range(0..levels.len())];
            dense[v] = if rng.gen_bool(0.8) { x } else { -x };
        }
        dense
    }
}

/// D* for counting or measure weights. Exact enumerates indicators,
/// parametric solves minimum cuts, greedy hill-climbs; auto is exact up to
/// the size cap and parametric above it. When `opts.eta_samples > 0`,
/// random η are checked against the result.
pub fn sobolev_constant(
    graph: &RipsGraph,
    rho: &ControlFunction,
    weights: WeightMode,
    method: Method,
    opts: &SearchOptions,
) -> Result<SobolevReport> {
    let problem = SobolevProblem::new(graph, rho, weights, opts.margin)?;
    problem.safe.ensure_nonempty()?;
    let method = match method {
        Method::Auto if problem.safe.len() <= opts.max_exact_vertices => Method::Exact,
        Method::Auto => Method::Parametric,
        m => m,
    };
    let (mut f, examined) = if let Some(c) = problem.closed_component() {
        (c, 0)
    } else {
        match method {
            Method::Exact => problem.exact(opts)?,
            Method::Parametric => problem.parametric()?,
            _ => {
                let out = greedy_search(graph, &problem.safe, &CutState::new(&problem), opts.restarts, opts.seed);
                (out.members, out.moves as u64)
            }
        }
    };
    let (num, den) = problem.evaluate(&f);
    let mut value = quotient(num, den);
    let mut validation = None;
    if opts.eta_samples > 0 && value.is_finite() {
        let (v, better) = problem.validate(value, opts.eta_samples, opts.seed);
        if method.is_certified() && v.exceeded {
            return Err(Error::Assertion(format!(
                "a random η reached {} above the {method} Sobolev constant {value}",
                v.max_ratio
            )));
        }
        if let Some(b) = better.filter(|_| !method.is_certified()) {
            f = b;
            let (num, den) = problem.evaluate(&f);
            value = quotient(num, den);
        }
        validation = Some(v);
    }
    let (num, den) = problem.evaluate(&f);
    Ok(SobolevReport {
        rho: rho.clone(),
        weights,
        method,
        certified: method.is_certified(),
        eps: graph.eps(),
        margin: problem.safe.margin(),
        safe_vertices: problem.safe.len(),
        best_set: f.iter().map(|&v| graph.point(v)).collect(),
        numerator: num,
        denominator: den,
        value,
        examined,
        validation,
    })
}

#[derive(Clone)]
struct CutState<'p, 'a> {
    problem: &'p SobolevProblem<'a>,
    in_f: Vec<bool>,
    size: usize,
    num: f64,
    den: f64,
}

impl<'p, 'a> CutState<'p, 'a> {
    fn new(problem: &'p SobolevProblem<'a>) -> Self {
        CutState {
            problem,
            in_f: vec![false; problem.graph.len()],
            size: 0,
            num: 0.0,
            den: 0.0,
        }
    }
}

impl Objective for CutState<'_, '_> {
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
        let p = self.problem;
        let mut dd = 0.0;
        for (k, &u) in p.graph.neighbors(v).iter().enumerate() {
            let w = p.edge_weight[v][k];
            dd += if self.in_f[u as usize] { -w } else { w };
        }
        if self.in_f[v] {
            (-p.mass[v], -dd)
        } else {
            (p.mass[v], dd)
        }
    }

    fn toggle(&mut self, v: usize) {
        let (dn, dd) = self.delta(v);
        self.in_f[v] = !self.in_f[v];
        if self.in_f[v] {
            self.size += 1;
        } else {
            self.size -= 1;
        }
        self.num += dn;
        self.den += dd;
    }

    fn resync(&mut self) {
        let (num, den) = self.problem.evaluate(&self.members());
        self.num = num;
        self.den = den;
    }

    fn members(&self) -> Vec<usize> {
        (0..self.in_f.len()).filter(|&i| self.in_f[i]).collect()
    }
}
