//! Lipschitz partition of unity subordinate to a maximal net, and the
//! extension of net functions it induces.
//!
//! For a net member p,
//!
//! ```text
//! ψ_p(x) = min{1, (2/ε) dist(x, X \ B(p, 3ε/2))},   φ_p(x) = ψ_p(x) / Σ_q ψ_q(x)
//! ```
//!
//! with dist(x, ∅) = +∞. The distance to the complement is taken over the
//! finite space, so every quantity here is the sampled one.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metric::{lt, PointId};
use crate::net::PointedNet;

#[derive(Debug)]
pub struct PartitionOfUnity {
    net: PointedNet,
    complement_dist: Mutex<HashMap<(u32, u32), f64>>,
}

/// ψ_p(x) for every member p with ψ_p(x) > 0, in member order.
pub type Weights = Vec<(PointId, f64)>;

impl PartitionOfUnity {
    pub fn new(net: &PointedNet) -> Self {
        PartitionOfUnity {
            net: net.clone(),
            complement_dist: Mutex::new(HashMap::new()),
        }
    }

    pub fn net(&self) -> &PointedNet {
        &self.net
    }

    pub fn eps(&self) -> f64 {
        self.net.eps()
    }

    /// True when the scale exceeds min{2, R/2} for the doubling radius R;
    /// the formulas still make sense on a finite space.
    pub fn scale_warning(&self, doubling_radius: f64) -> bool {
        self.eps() > 2.0f64.min(doubling_radius / 2.0)
    }

    fn dist_to_complement(&self, p: PointId, x: PointId) -> f64 {
        let key = (p as u32, x as u32);
        if let Some(&d) = self.complement_dist.lock().expect("cache").get(&key) {
            return d;
        }
        let space = self.net.space();
        let reach = 1.5 * self.eps();
        let d = (0..space.len())
            .filter(|&y| !lt(space.dist(p, y), reach))
            .map(|y| space.dist(x, y))
            .fold(f64::INFINITY, f64::min);
        self.complement_dist.lock().expect("cache").insert(key, d);
        d
    }

    pub fn psi(&self, p: PointId, x: PointId) -> Result<f64> {
        if !self.net.contains(p) {
            return Err(invalid(format!("{p} is not a net member")));
        }
        Ok(self.psi_unchecked(p, x))
    }

    fn psi_unchecked(&self, p: PointId, x: PointId) -> f64 {
        let d = self.dist_to_complement(p, x);
        if d.is_infinite() {
            1.0
        } else {
            (2.0 / self.eps() * d).min(1.0)
        }
    }

    /// Nonzero ψ_p(x) over the net. Members at distance >= 3ε/2 from x
    /// are skipped: x lies in their complement ball, so ψ_p(x) = 0.
    pub fn psi_all(&self, x: PointId) -> Weights {
        let space = self.net.space();
        let reach = 1.5 * self.eps();
        self.net
            .members()
            .iter()
            .filter(|&&p| lt(space.dist(p, x), reach))
            .map(|&p| (p, self.psi_unchecked(p, x)))
            .filter(|&(_, w)| w > 0.0)
            .collect()
    }

    /// φ_p(x) for every member with φ_p(x) > 0.
    pub fn phi_all(&self, x: PointId) -> Result<Weights> {
        let mut w = self.psi_all(x);
        let total: f64 = w.iter().map(|&(_, v)| v).sum();
        if !(total > 0.0) {
            return Err(Error::Assertion(format!(
                "ψ vanishes at point {x}: the net does not cover it"
            )));
        }
        for (_, v) in &mut w {
            *v /= total;
        }
        Ok(w)
    }

    pub fn phi(&self, p: PointId, x: PointId) -> Result<f64> {
        if !self.net.contains(p) {
            return Err(invalid(format!("{p} is not a net member")));
        }
        Ok(self
            .phi_all(x)?
            .into_iter()
            .find(|&(q, _)| q == p)
            .map_or(0.0, |(_, v)| v))
    }

    /// v̄(x) = Σ_p v(p) φ_p(x), where `v` is indexed like the net's member list.
    pub fn extend(&self, v: &[f64], x: PointId) -> Result<f64> {
        if v.len() != self.net.len() {
            return Err(invalid("extension needs one value per net member"));
        }
        Ok(self
            .phi_all(x)?
            .into_iter()
            .map(|(p, w)| v[self.net.index_of(p).expect("member")] * w)
            .sum())
    }
}

/// Pairs (x, y) with 0 < d(x, y) < radius: x uniform, y uniform in the
/// punctured ball. Points whose punctured ball is empty are skipped.
pub fn sample_near_pairs(net: &PointedNet, count: usize, radius: f64, seed: u64) -> Vec<(PointId, PointId)> {
    let space = net.space();
    let mut rng = crate::rng::stream(seed, "near-pairs");
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 20 * count.max(1) {
        attempts += 1;
        let x = rng.gen_range(0..space.len());
        let ball: Vec<PointId> = space.ball(x, radius).into_iter().filter(|&y| y != x).collect();
        if ball.is_empty() {
            continue;
        }
        out.push((x, ball[rng.gen_range(0..ball.len())]));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub pairs: usize,
    /// max |φ_p(x) - φ_p(y)| / d(x, y)
    pub empirical: f64,
    pub witness: Option<(PointId, PointId, PointId)>,
    /// max #(net ∩ B(x, 2ε)) over all x
    pub net_count_2eps: usize,
    /// 4 N̂(2ε) / ε
    pub bound: f64,
    pub holds: bool,
}

/// Empirical Lipschitz constant of the partition against 4 N̂(2ε)/ε.
pub fn verify_partition_lipschitz(
    partition: &PartitionOfUnity,
    pairs: &[(PointId, PointId)],
) -> Result<LipschitzReport> {
    let net = partition.net();
    let space = net.space();
    let eps = partition.eps();
    let (count, _) = net.max_count_in_balls(2.0 * eps);
    let bound = 4.0 * count as f64 / eps;
    let mut empirical = 0.0f64;
    let mut witness = None;
    let mut used = 0;
    for &(x, y) in pairs {
        let d = space.dist(x, y);
        if !(d > 0.0) {
            continue;
        }
        used += 1;
        let fx: HashMap<PointId, f64> = partition.phi_all(x)?.into_iter().collect();
        let fy: HashMap<PointId, f64> = partition.phi_all(y)?.into_iter().collect();
        let mut keys: Vec<PointId> = fx.keys().chain(fy.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        for p in keys {
            let q = (fx.get(&p).copied().unwrap_or(0.0) - fy.get(&p).copied().unwrap_or(0.0)).abs() / d;
            if q > empirical {
                empirical = q;
                witness = Some((p, x, y));
            }
        }
    }
    Ok(LipschitzReport {
        pairs: used,
        empirical,
        witness,
        net_count_2eps: count,
        bound,
        holds: empirical <= bound * (1.0 + 1e-12),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ineq2Sample {
    pub x: PointId,
    pub y: PointId,
    pub center: PointId,
    pub quotient: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ineq2Report {
    pub samples: usize,
    pub max_quotient: f64,
    /// Sample with the smallest bound - quotient.
    pub tightest: Option<Ineq2Sample>,
    pub holds: bool,
}

/// For sampled x with a covering member p (d(x, p) < ε) and y with
/// 0 < d(x, y) < ε/2, check
///
/// |v̄(x) - v̄(y)| / d(x, y) <= (4 N̂(2ε)/ε) Σ_{q ∈ B(p, 3ε) ∩ net} |v(q) - v(p)|.
///
/// Points isolated at scale ε/2 contribute nothing, matching the pointwise
/// Lipschitz constant.
pub fn verify_ineq2_bound(partition: &PartitionOfUnity, v: &[f64], samples: usize, seed: u64) -> Result<Ineq2Report> {
    let net = partition.net();
    let space = net.space();
    let eps = partition.eps();
    if v.len() != net.len() {
        return Err(invalid("ineq2 check needs one value per net member"));
    }
    let (count, _) = net.max_count_in_balls(2.0 * eps);
    let lip = 4.0 * count as f64 / eps;
    let pairs = sample_near_pairs(net, samples, eps / 2.0, seed);
    let mut max_quotient = 0.0f64;
    let mut tightest: Option<Ineq2Sample> = None;
    let mut holds = true;
    for (x, y) in pairs {
        // first covering member in insertion order
        let p = *net
            .members()
            .iter()
            .find(|&&p| lt(space.dist(p, x), eps))
            .ok_or_else(|| Error::Assertion(format!("point {x} is not covered by the net")))?;
        let vp = v[net.index_of(p).expect("member")];
        let variation: f64 = net
            .members()
            .iter()
            .enumerate()
            .filter(|&(_, &q)| lt(space.dist(p, q), 3.0 * eps))
            .map(|(i, _)| (v[i] - vp).abs())
            .sum();
        let bound = lip * variation;
        let quotient = (partition.extend(v, x)? - partition.extend(v, y)?).abs() / space.dist(x, y);
        max_quotient = max_quotient.max(quotient);
        if quotient > bound * (1.0 + 1e-12) + 1e-12 {
            holds = false;
        }
        let sample = Ineq2Sample {
            x,
            y,
            center: p,
            quotient,
            bound,
        };
        if tightest
            .as_ref()
            .is_none_or(|t| bound - quotient < t.bound - t.quotient)
        {
            tightest = Some(sample);
        }
    }
    Ok(Ineq2Report {
        samples,
        max_quotient,
        tightest,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub samples: usize,
    /// max |Σ_p φ_p(x) - 1|
    pub max_sum_error: f64,
    pub min_psi_sum: f64,
    pub max_psi_sum: f64,
    /// max #(net ∩ B(x, 2ε)) over all x
    pub net_count_2eps: usize,
    /// A member p with ψ_p(x) > 0 although d(p, x) >= 3ε/2.
    pub support_violation: Option<(PointId, PointId)>,
    pub holds: bool,
}

/// At sampled points x (all points when `samples` covers the space), check
/// Σ_p φ_p(x) = 1, 1 <= Σ_p ψ_p(x) <= N̂(2ε), and that ψ_p(x) vanishes for
/// every member p with 3ε/2 <= d(p, x) < 3ε.
pub fn verify_partition_sums(partition: &PartitionOfUnity, samples: usize, seed: u64) -> Result<SumReport> {
    let net = partition.net();
    let space = net.space();
    let eps = partition.eps();
    let (count, _) = net.max_count_in_balls(2.0 * eps);
    let points: Vec<PointId> = if samples >= space.len() {
        (0..space.len()).collect()
    } else {
        let mut rng = crate::rng::stream(seed, "partition-sums");
        (0..samples).map(|_| rng.gen_range(0..space.len())).collect()
    };
    let mut max_sum_error = 0.0f64;
    let mut min_psi_sum = f64::INFINITY;
    let mut max_psi_sum = 0.0f64;
    let mut support_violation = None;
    for &x in &points {
        let psi: f64 = partition.psi_all(x).iter().map(|&(_, w)| w).sum();
        min_psi_sum = min_psi_sum.min(psi);
        max_psi_sum = max_psi_sum.max(psi);
        let phi: f64 = partition.phi_all(x)?.iter().map(|&(_, w)| w).sum();
        max_sum_error = max_sum_error.max((phi - 1.0).abs());
        if support_violation.is_none() {
            for &p in net.members() {
                let d = space.dist(p, x);
                if !lt(d, 1.5 * eps) && lt(d, 3.0 * eps) && partition.psi_unchecked(p, x) > 0.0 {
                    support_violation = Some((p, x));
                    break;
                }
            }
        }
    }
    let holds = max_sum_error <= crate::TOL
        && min_psi_sum >= 1.0 - crate::TOL
        && max_psi_sum <= count as f64 + crate::TOL
        && support_violation.is_none();
    Ok(SumReport {
        samples: points.len(),
        max_sum_error,
        min_psi_sum,
        max_psi_sum,
        net_count_2eps: count,
        support_violation,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metric::{generate_space, FiniteMetricSpace, SpaceSpec};

    fn line_net(r: u32, eps: f64) -> PointedNet {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 1, radius: r }).unwrap());
        PointedNet::build(&s, eps).unwrap()
    }

    fn id(s: &FiniteMetricSpace, v: i64) -> PointId {
        (0..s.len()).find(|&i| s.coords(i).unwrap()[0] as i64 == v).unwrap()
    }

    #[test]
    fn psi_at_the_centre_on_the_line() {
        let net = line_net(20, 1.0);
        let pu = PartitionOfUnity::new(&net);
        let s = net.space();
        let p = id(s, 4);
        // complement of B(4, 1.5) is at distance 2 from 4
        assert_eq!(pu.dist_to_complement(p, p), 2.0);
        assert_eq!(pu.psi(p, p).unwrap(), 1.0);
        assert_eq!(pu.psi(p, id(s, 6)).unwrap(), 0.0);
        assert!(pu.psi(p, p).is_ok());
    }

    #[test]
    fn midpoint_splits_evenly() {
        let net = line_net(20, 2.0);
        let pu = PartitionOfUnity::new(&net);
        let s = net.space();
        let (a, b, x) = (id(s, 0), id(s, 2), id(s, 1));
        assert_eq!(pu.phi(a, x).unwrap(), 0.5);
        assert_eq!(pu.phi(b, x).unwrap(), 0.5);
        let mut v = vec![0.0; net.len()];
        v[net.index_of(b).unwrap()] = 1.0;
        assert_eq!(pu.extend(&v, x).unwrap(), 0.5);
    }

    #[test]
    fn sums_to_one_and_constants_extend_to_constants() {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 2, radius: 8 }).unwrap());
        let net = PointedNet::build(&s, 2.0).unwrap();
        let pu = PartitionOfUnity::new(&net);
        let c = vec![3.25; net.len()];
        for x in 0..s.len() {
            let total: f64 = pu.phi_all(x).unwrap().iter().map(|&(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((pu.extend(&c, x).unwrap() - 3.25).abs() < 1e-12);
            let psi: f64 = pu.psi_all(x).iter().map(|&(_, w)| w).sum();
            assert!(psi >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn single_nearby_member_gets_everything() {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 1, radius: 3 }).unwrap());
        let net = PointedNet::build(&s, 100.0).unwrap();
        let pu = PartitionOfUnity::new(&net);
        // complement of B(o, 150) is empty: ψ ≡ 1
        for x in 0..s.len() {
            assert_eq!(pu.phi(0, x).unwrap(), 1.0);
        }
    }

    #[test]
    fn uncovered_point_is_reported() {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 1, radius: 10 }).unwrap());
        let net = PointedNet::from_members(&s, 1.0, vec![0]).unwrap();
        let pu = PartitionOfUnity::new(&net);
        assert!(matches!(pu.phi_all(id(&s, 7)), Err(Error::Assertion(_))));
    }

    #[test]
    fn lipschitz_bound_on_the_line() {
        let net = line_net(30, 2.0);
        let pu = PartitionOfUnity::new(&net);
        let pairs = sample_near_pairs(&net, 300, 4.0, 1);
        let r = verify_partition_lipschitz(&pu, &pairs).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.bound, 4.0 * r.net_count_2eps as f64 / 2.0);
        assert!(r.empirical > 0.0);
    }

    #[test]
    fn far_indicator_extends_to_zero() {
        let net = line_net(30, 2.0);
        let pu = PartitionOfUnity::new(&net);
        let s = net.space();
        let mut v = vec![0.0; net.len()];
        v[net.index_of(id(s, 20)).unwrap()] = 1.0;
        assert_eq!(pu.extend(&v, id(s, 0)).unwrap(), 0.0);
        assert_eq!(pu.extend(&v, id(s, 17)).unwrap(), 0.0);
    }

    #[test]
    fn ineq2_zero_function_and_indicator() {
        let s = Arc::new(
            generate_space(&SpaceSpec::HyperbolicDisk {
                count: 150,
                max_radius: 3.0,
                seed: 2,
            })
            .unwrap(),
        );
        let net = PointedNet::build(&s, 1.0).unwrap();
        let pu = PartitionOfUnity::new(&net);
        let zero = vec![0.0; net.len()];
        let r = verify_ineq2_bound(&pu, &zero, 200, 3).unwrap();
        assert!(r.holds && r.max_quotient == 0.0);
        let mut ind = zero.clone();
        ind[0] = 1.0;
        let r = verify_ineq2_bound(&pu, &ind, 200, 3).unwrap();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn sums_and_supports_hold_on_the_plane() {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 2, radius: 8 }).unwrap());
        let net = PointedNet::build(&s, 2.0).unwrap();
        let pu = PartitionOfUnity::new(&net);
        let r = verify_partition_sums(&pu, usize::MAX, 0).unwrap();
        assert_eq!(r.samples, s.len());
        assert!(r.holds, "{r:?}");
        assert!(r.min_psi_sum >= 1.0);
        let sub = verify_partition_sums(&pu, 10, 3).unwrap();
        assert_eq!(sub.samples, 10);
    }
}
