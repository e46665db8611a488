use serde::{Deserialize, Serialize};

use super::iso::{best_subset, iso_constant_exact, vertex_weights};
use super::sobolev::sobolev_constant;
use super::{boundary_vertices, Method, SearchOptions, WeightMode};
use crate::control::ControlFunction;
use crate::error::{invalid, Error, Result};
use crate::homology::Region;
use crate::metric::{MeasureProfile, PointId};
use crate::report::Check;
use crate::rips::RipsGraph;

/// Counting against measure-weighted Sobolev constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub eps: f64,
    /// f̂(ε)
    pub f_hat: f64,
    /// ĝ(ε)
    pub g_hat: f64,
    #[serde(with = "crate::io::float_or_inf")]
    pub counting: f64,
    #[serde(with = "crate::io::float_or_inf")]
    pub measure: f64,
    pub method: Method,
    pub checks: Vec<Check>,
    pub holds: bool,
}

/// D*_counting <= (ĝ/f̂) D*_measure and D*_measure <= (ĝ/f̂) D*_counting,
/// with f̂, ĝ read from `profile` at the graph scale ε.
pub fn transfer_check(
    graph: &RipsGraph,
    rho: &ControlFunction,
    profile: &MeasureProfile,
    opts: &SearchOptions,
) -> Result<TransferReport> {
    let eps = graph.eps();
    let (f_hat, g_hat) = profile
        .at(eps)
        .ok_or_else(|| invalid(format!("measure profile has no entry at ε = {eps}")))?;
    let counting = sobolev_constant(graph, rho, WeightMode::Counting, Method::Auto, opts)?;
    let measure = sobolev_constant(graph, rho, WeightMode::Measure, Method::Auto, opts)?;
    let factor = g_hat / f_hat;
    let checks = vec![
        Check::le(
            "D*_counting <= (g/f) D*_measure",
            counting.value,
            factor * measure.value,
        ),
        Check::le(
            "D*_measure <= (g/f) D*_counting",
            measure.value,
            factor * counting.value,
        ),
    ];
    Ok(TransferReport {
        eps,
        f_hat,
        g_hat,
        counting: counting.value,
        measure: measure.value,
        method: counting.method,
        holds: checks.iter().all(|c| c.holds),
        checks,
    })
}

/// Isoperimetric against Sobolev constants on the same graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    #[serde(with = "crate::io::float_or_inf")]
    pub iso: f64,
    pub iso_set: Vec<PointId>,
    #[serde(with = "crate::io::float_or_inf")]
    pub sobolev: f64,
    pub sobolev_set: Vec<PointId>,
    pub max_valency: usize,
    /// Longest Rips edge.
    pub propagation: f64,
    /// (ρ1) constant over the propagation.
    pub l_hat: f64,
    pub checks: Vec<Check>,
    pub holds: bool,
}

/// C* exactly and D* (counting) by minimum cuts, then
/// D* <= C* <= 2 v L̂(P) D* with v the largest valency and P the longest
/// edge, and agreement on finiteness.
pub fn iso_sobolev_crosscheck(
    graph: &RipsGraph,
    rho: &ControlFunction,
    opts: &SearchOptions,
) -> Result<CrosscheckReport> {
    let iso = iso_constant_exact(graph, rho, opts)?;
    let sob = sobolev_constant(graph, rho, WeightMode::Counting, Method::Parametric, opts)?;
    let max_valency = graph.max_valency();
    let propagation = graph.edges().map(|(i, j)| graph.edge_length(i, j)).fold(0.0, f64::max);
    let l_hat = rho.l_hat(propagation)?;
    let scale = 2.0 * max_valency as f64 * l_hat;
    let checks = vec![
        Check::holds_if(
            "C* and D* agree on finiteness",
            iso.value.is_finite() == sob.value.is_finite(),
        ),
        Check::le("D* <= C*", sob.value, iso.value),
        Check::le(
            "C* / (2 v L(P)) <= D*",
            if scale > 0.0 { iso.value / scale } else { iso.value },
            sob.value,
        ),
    ];
    Ok(CrosscheckReport {
        iso: iso.value,
        iso_set: iso.best_set,
        sobolev: sob.value,
        sobolev_set: sob.best_set,
        max_valency,
        propagation,
        l_hat,
        holds: checks.iter().all(|c| c.holds),
        checks,
    })
}

/// A finite K* against the isoperimetric inequality on subsets of F.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    #[serde(with = "crate::io::float_or_inf")]
    pub k_star: f64,
    pub max_valency: usize,
    pub propagation: f64,
    pub l_hat: f64,
    /// K* v L̂(P)
    #[serde(with = "crate::io::float_or_inf")]
    pub constant: f64,
    pub subsets: u64,
    /// The F' ⊆ F with the largest #F' / Σ_{∂F'} ρ(|x|).
    pub worst_set: Vec<PointId>,
    /// max #F' / Σ_{∂F'} ρ(|x|) against the constant.
    pub check: Check,
    pub holds: bool,
}

/// Summing ∂t = 1 over F' ⊆ F leaves only edges leaving F', so
/// #F' <= K* v L̂(P) Σ_{x ∈ ∂F'} ρ(|x|) for every nonempty F'. Checked over
/// all subsets of the region's sources (at most `max_vertices`).
pub fn ponzi_iso_consistency(
    graph: &RipsGraph,
    region: &Region,
    rho: &ControlFunction,
    k_star: f64,
    max_vertices: usize,
) -> Result<ConsistencyReport> {
    let cap = max_vertices.min(30);
    if region.sources.len() > cap {
        return Err(Error::RegionTooLarge {
            vertices: region.sources.len(),
            cap,
        });
    }
    if region.sources.is_empty() {
        return Err(invalid("the region has no sources"));
    }
    let mut universe = Vec::with_capacity(region.sources.len());
    for &p in &region.sources {
        universe.push(
            graph
                .vertex(p)
                .ok_or_else(|| invalid(format!("source {p} is not a vertex of the graph")))?,
        );
    }
    universe.sort_unstable();
    let max_valency = graph.max_valency();
    let propagation = graph.edges().map(|(i, j)| graph.edge_length(i, j)).fold(0.0, f64::max);
    let l_hat = rho.l_hat(propagation)?;
    let constant = k_star * max_valency as f64 * l_hat;
    let (worst, ratio) = best_subset(graph, &vertex_weights(graph, rho), &universe);
    let check = Check::le("#F' / sum over dF' of rho <= K* v L(P)", ratio, constant);
    Ok(ConsistencyReport {
        k_star,
        max_valency,
        propagation,
        l_hat,
        constant,
        subsets: (1u64 << universe.len()) - 1,
        worst_set: worst.into_iter().map(|i| graph.point(i)).collect(),
        holds: check.holds,
        check,
    })
}

/// Boundary weight of one set measured from two basepoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasepointReport {
    pub basepoint: PointId,
    pub moved_to: PointId,
    /// d(o, o')
    pub shift: f64,
    /// (ρ1) constant over the shift.
    pub l_hat: f64,
    /// Σ_{x ∈ ∂F} ρ(d(x, o))
    pub before: f64,
    /// Σ_{x ∈ ∂F} ρ(d(x, o'))
    pub after: f64,
    pub checks: Vec<Check>,
    pub holds: bool,
}

/// Moving the basepoint by s changes every ρ(|x|) by at most the factor
/// L̂(s), so each boundary sum bounds the other up to that factor.
pub fn basepoint_robustness(
    graph: &RipsGraph,
    rho: &ControlFunction,
    set: &[PointId],
    moved_to: PointId,
) -> Result<BasepointReport> {
    rho.validate()?;
    let space = graph.space();
    if moved_to >= space.len() {
        return Err(invalid(format!("basepoint {moved_to} is not a point of the space")));
    }
    let mut in_f = vec![false; graph.len()];
    for &p in set {
        let i = graph
            .vertex(p)
            .ok_or_else(|| invalid(format!("point {p} is not a vertex of the graph")))?;
        in_f[i] = true;
    }
    let boundary = boundary_vertices(graph, &in_f);
    let before: f64 = boundary.iter().map(|&x| rho.at(graph.norm(x))).sum();
    let after: f64 = boundary
        .iter()
        .map(|&x| rho.at(space.dist(graph.point(x), moved_to)))
        .sum();
    let shift = space.norm(moved_to);
    let l_hat = rho.l_hat(shift)?;
    let checks = vec![
        Check::le("sum from o' <= L(s) sum from o", after, l_hat * before),
        Check::le("sum from o <= L(s) sum from o'", before, l_hat * after),
    ];
    Ok(BasepointReport {
        basepoint: space.basepoint(),
        moved_to,
        shift,
        l_hat,
        before,
        after,
        holds: checks.iter().all(|c| c.holds),
        checks,
    })
}
