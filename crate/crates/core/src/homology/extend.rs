use serde::{Deserialize, Serialize};

use super::chain::{control_norm, Chain1};
use super::ponzi::{PonziCertificate, Tail};
use crate::error::{invalid, Error, Result};
use crate::io::space_fingerprint;
use crate::metric::PointId;
use crate::rips::RipsGraph;
use crate::TOL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub certificate: PonziCertificate,
    /// (w, y): new region vertex w and the covered vertex whose tail it uses.
    pub added: Vec<(PointId, PointId)>,
    pub coboundedness: f64,
    pub k: f64,
    pub k_prime: f64,
    pub p_prime: f64,
    /// L̂(2C), the (ρ1) constant over twice the coboundedness radius.
    pub l_hat: f64,
    /// K·L̂(2C) + 1/ρ(0)
    pub stated_bound: f64,
    /// Largest number of new vertices assigned to one covered vertex.
    pub max_assigned: usize,
    /// max{(1 + max_assigned)·K, max over new edges 1/ρ(|[y, w]|)}
    pub derived_bound: f64,
    pub holds: bool,
}

/// Extend a certificate from the vertices of `sublattice` to those of
/// `target`: every new vertex w within `c` of the sublattice takes the
/// nearest sublattice vertex y (ties to the smaller id) and, when y lies
/// in the region, contributes the tail [y, w] + t_y.
pub fn extend_tails(
    cert: &PonziCertificate,
    sublattice: &RipsGraph,
    target: &RipsGraph,
    c: f64,
) -> Result<ExtensionReport> {
    let space = target.space();
    if space_fingerprint(sublattice.space()) != space_fingerprint(space) || cert.space_hash != space_fingerprint(space)
    {
        return Err(invalid(
            "certificate, sublattice and target must live on the same space",
        ));
    }
    if let Some(&p) = sublattice.members().iter().find(|&&p| target.vertex(p).is_none()) {
        return Err(invalid(format!(
            "sublattice vertex {p} is not a vertex of the target graph"
        )));
    }
    if c > 3.0 * target.eps() + TOL {
        return Err(invalid(format!(
            "coboundedness radius {c} exceeds the target Rips reach {}",
            3.0 * target.eps()
        )));
    }
    let tails: std::collections::HashMap<PointId, &Tail> = cert.tails.iter().map(|t| (t.source, t)).collect();
    if tails.len() != cert.region.len() || cert.region.iter().any(|x| !tails.contains_key(x)) {
        return Err(invalid("certificate does not carry one tail per region vertex"));
    }

    let mut chain = cert.chain.clone();
    let mut new_tails = cert.tails.clone();
    let mut region = cert.region.clone();
    let mut added = Vec::new();
    let mut assigned: std::collections::HashMap<PointId, usize> = std::collections::HashMap::new();
    let mut new_edge_bound = 0.0f64;
    let mut new_vertices: Vec<PointId> = target
        .members()
        .iter()
        .copied()
        .filter(|&w| sublattice.vertex(w).is_none())
        .collect();
    new_vertices.sort_unstable();
    for w in new_vertices {
        let (d, y) = sublattice
            .members()
            .iter()
            .map(|&y| (space.dist(w, y), y))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .ok_or_else(|| invalid("empty sublattice"))?;
        if d > c + TOL {
            return Err(invalid(format!(
                "point {w} is at distance {d} from the sublattice, beyond C = {c}"
            )));
        }
        let Some(t_y) = tails.get(&y) else { continue };
        let mut t = Chain1::new();
        t.add(y, w, 1.0);
        t.axpy(1.0, &t_y.chain);
        chain.axpy(1.0, &t);
        new_tails.push(Tail { source: w, chain: t });
        region.push(w);
        added.push((w, y));
        *assigned.entry(y).or_default() += 1;
        new_edge_bound = new_edge_bound.max(1.0 / cert.rho.at(space.norm(w).max(space.norm(y))));
    }
    region.sort_unstable();
    new_tails.sort_by_key(|t| t.source);

    let k_prime = control_norm(&chain, space, &cert.rho);
    let p_prime = added.iter().map(|&(w, y)| space.dist(w, y)).fold(cert.p, f64::max);
    let l_hat = cert.rho.l_hat(2.0 * c)?;
    let max_assigned = assigned.values().copied().max().unwrap_or(0);
    let stated_bound = cert.k * l_hat + 1.0 / cert.rho.at(0.0);
    let derived_bound = ((1 + max_assigned) as f64 * cert.k).max(new_edge_bound);
    let holds = k_prime <= derived_bound * (1.0 + 1e-9);
    if !holds {
        return Err(Error::Assertion(format!(
            "extended control constant {k_prime} exceeds the derived bound {derived_bound}"
        )));
    }
    Ok(ExtensionReport {
        certificate: PonziCertificate {
            eps: target.eps(),
            k: k_prime,
            p: p_prime,
            region,
            chain,
            tails: new_tails,
            ..cert.clone()
        },
        added,
        coboundedness: c,
        k: cert.k,
        k_prime,
        p_prime,
        l_hat,
        stated_bound,
        max_assigned,
        derived_bound,
        holds,
    })
}
