//! Pointed maximal ε-nets.
//!
//! A net is built greedily: the basepoint first, then every point in
//! ascending id order that is at distance at least ε from all members so
//! far. Coverage uses open balls, so a point at distance exactly ε from its
//! nearest member is both separated and uncovered and gets inserted.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metric::{lt, DoublingProfile, FiniteMetricSpace, PointId};
use crate::TOL;

const NOT_MEMBER: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct PointedNet {
    space: Arc<FiniteMetricSpace>,
    eps: f64,
    members: Vec<PointId>,
    slot: Vec<u32>,
}

impl PointedNet {
    /// Greedy maximal ε-net containing the basepoint.
    pub fn build(space: &Arc<FiniteMetricSpace>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(invalid(format!("net scale must be positive, got {eps}")));
        }
        let o = space.basepoint();
        let mut members = vec![o];
        if space.is_integral() && eps <= 1.0 {
            // distinct points are at distance >= 1, so every point is taken
            members.extend((0..space.len()).filter(|&x| x != o));
            return Self::from_members(space, eps, members);
        }
        for x in (0..space.len()).filter(|&x| x != o) {
            if members.iter().all(|&p| !lt(space.dist(p, x), eps)) {
                members.push(x);
            }
        }
        let net = Self::from_members(space, eps, members)?;
        match net.verify() {
            NetCheck::Pass => Ok(net),
            bad => Err(crate::Error::Assertion(format!(
                "greedy net failed verification: {bad:?}"
            ))),
        }
    }

    /// Wrap an explicit member list (basepoint first) without checking the
    /// net axioms; call [`PointedNet::verify`] for that.
    pub fn from_members(space: &Arc<FiniteMetricSpace>, eps: f64, members: Vec<PointId>) -> Result<Self> {
        let mut slot = vec![NOT_MEMBER; space.len()];
        for (i, &p) in members.iter().enumerate() {
            if p >= space.len() {
                return Err(invalid(format!("net member {p} is not a point of the space")));
            }
            if slot[p] != NOT_MEMBER {
                return Err(invalid(format!("net member {p} listed twice")));
            }
            slot[p] = i as u32;
        }
        Ok(PointedNet {
            space: Arc::clone(space),
            eps,
            members,
            slot,
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Members in insertion order; the basepoint comes first.
    pub fn members(&self) -> &[PointId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: PointId) -> bool {
        self.slot.get(x).is_some_and(|&s| s != NOT_MEMBER)
    }

    /// Position of `x` in the member list.
    pub fn index_of(&self, x: PointId) -> Option<usize> {
        self.slot.get(x).filter(|&&s| s != NOT_MEMBER).map(|&s| s as usize)
    }

    /// Separation, coverage and basepoint membership.
    pub fn verify(&self) -> NetCheck {
        let space = &self.space;
        if !self.contains(space.basepoint()) {
            return NetCheck::MissingBasepoint;
        }
        let m = &self.members;
        let sep = (0..m.len()).into_par_iter().find_map_first(|i| {
            m[i + 1..]
                .iter()
                .find(|&&q| lt(space.dist(m[i], q), self.eps))
                .map(|&q| (m[i], q))
        });
        if let Some((p, q)) = sep {
            return NetCheck::Separation {
                p,
                q,
                dist: space.dist(p, q),
            };
        }
        let uncovered = (0..space.len())
            .into_par_iter()
            .find_first(|&x| !m.iter().any(|&p| lt(space.dist(p, x), self.eps)));
        match uncovered {
            Some(x) => NetCheck::Coverage { point: x },
            None => NetCheck::Pass,
        }
    }

    /// Number of members in the open ball B(x, r).
    pub fn count_in_ball(&self, x: PointId, r: f64) -> usize {
        self.members.iter().filter(|&&p| lt(self.space.dist(x, p), r)).count()
    }

    /// max over all points x of #(net ∩ B(x, r)), with a maximising centre.
    pub fn max_count_in_balls(&self, r: f64) -> (usize, PointId) {
        (0..self.space.len())
            .into_par_iter()
            .map(|x| (self.count_in_ball(x, r), x))
            .reduce(
                || (0, 0),
                |a, b| {
                    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                },
            )
    }
}

/// Outcome of [`PointedNet::verify`], with the first violation found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum NetCheck {
    Pass,
    MissingBasepoint,
    Separation { p: PointId, q: PointId, dist: f64 },
    Coverage { point: PointId },
}

impl NetCheck {
    pub fn passed(&self) -> bool {
        matches!(self, NetCheck::Pass)
    }
}

/// One row of [`net_ball_count_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetCountRow {
    pub radius: f64,
    pub measured: usize,
    pub center: PointId,
    /// Radii whose doubling numbers multiply to the bound.
    pub factor_radii: Vec<f64>,
    pub bound: Option<u64>,
    pub holds: Option<bool>,
}

/// Radii r, r/2, ..., r/2^(m-1) with m minimal such that 2r/2^m <= ε:
/// after m halvings every covering ball has diameter at most ε and holds
/// at most one net point.
pub fn count_bound_radii(r: f64, eps: f64) -> Vec<f64> {
    let mut radii = Vec::new();
    let mut s = r;
    while 2.0 * s > eps + TOL {
        radii.push(s);
        s /= 2.0;
    }
    radii
}

/// Compare max #(net ∩ B(x, r)) with the product of doubling numbers that
/// bounds it. Rows whose factor radii are missing from the profile report
/// no bound.
pub fn net_ball_count_bound(net: &PointedNet, profile: &DoublingProfile, radii: &[f64]) -> Vec<NetCountRow> {
    radii
        .iter()
        .map(|&r| {
            let (measured, center) = net.max_count_in_balls(r);
            let factor_radii = count_bound_radii(r, net.eps());
            let bound = factor_radii
                .iter()
                .map(|&s| profile.at(s).map(|k| k as u64))
                .try_fold(1u64, |acc, k| k.map(|k| acc.saturating_mul(k)));
            NetCountRow {
                radius: r,
                measured,
                center,
                factor_radii,
                bound,
                holds: bound.map(|b| measured as u64 <= b),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{doubling_profile, generate_space, SpaceSpec};

    fn line(r: u32) -> Arc<FiniteMetricSpace> {
        Arc::new(generate_space(&SpaceSpec::Zn { dims: 1, radius: r }).unwrap())
    }

    fn values(net: &PointedNet) -> Vec<i64> {
        let mut v: Vec<i64> = net
            .members()
            .iter()
            .map(|&p| net.space().coords(p).unwrap()[0] as i64)
            .collect();
        v.sort();
        v
    }

    #[test]
    fn unit_scale_takes_every_integer() {
        let net = PointedNet::build(&line(10), 1.0).unwrap();
        assert_eq!(net.len(), 21);
    }

    #[test]
    fn scale_two_takes_the_even_integers() {
        let net = PointedNet::build(&line(10), 2.0).unwrap();
        assert_eq!(values(&net), vec![-10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10]);
        assert_eq!(net.members()[0], 0);
    }

    #[test]
    fn huge_scale_keeps_only_the_basepoint() {
        let s = Arc::new(generate_space(&SpaceSpec::FreeGroup { rank: 2, radius: 3 }).unwrap());
        let net = PointedNet::build(&s, 100.0).unwrap();
        assert_eq!(net.members(), &[s.basepoint()]);
    }

    #[test]
    fn verification_reports_witnesses() {
        let s = line(10);
        let close = PointedNet::from_members(&s, 2.0, vec![0, 1]).unwrap();
        assert!(matches!(close.verify(), NetCheck::Separation { p: 0, q: 1, .. }));
        let sparse = PointedNet::from_members(&s, 2.0, vec![0]).unwrap();
        assert!(matches!(sparse.verify(), NetCheck::Coverage { .. }));
        let no_base = PointedNet::from_members(&s, 2.0, vec![3]).unwrap();
        assert_eq!(no_base.verify(), NetCheck::MissingBasepoint);
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(PointedNet::build(&line(3), 0.0).is_err());
        assert!(PointedNet::build(&line(3), -1.0).is_err());
    }

    #[test]
    fn greedy_net_is_maximal() {
        let s = Arc::new(generate_space(&SpaceSpec::Zn { dims: 2, radius: 6 }).unwrap());
        let net = PointedNet::build(&s, 2.5).unwrap();
        for x in (0..s.len()).filter(|&x| !net.contains(x)) {
            assert!(net.members().iter().any(|&p| s.dist(p, x) < 2.5));
        }
    }

    #[test]
    fn strict_ball_count_on_the_even_net() {
        let s = line(50);
        let net = PointedNet::build(&s, 2.0).unwrap();
        // only x itself is strictly within 2 of a net point x
        assert_eq!(net.max_count_in_balls(2.0).0, 2);
        assert_eq!(net.count_in_ball(0, 2.0), 1);
        for r in [0.5, 1.0] {
            assert_eq!(net.max_count_in_balls(r).0, 1);
        }
        // odd centres see both even neighbours
        assert_eq!(net.max_count_in_balls(1.9).0, 2);
    }

    #[test]
    fn count_bound_holds_on_line_and_tree() {
        let s = line(50);
        let net = PointedNet::build(&s, 2.0).unwrap();
        let prof = doubling_profile(&s, &[1.0, 2.0, 4.0], 1000, 0).unwrap();
        for row in net_ball_count_bound(&net, &prof, &[2.0, 4.0]) {
            assert_eq!(row.holds, Some(true), "{row:?}");
        }

        let t = Arc::new(generate_space(&SpaceSpec::FreeGroup { rank: 2, radius: 8 }).unwrap());
        let net = PointedNet::build(&t, 1.0).unwrap();
        let radii = count_bound_radii(4.0, 1.0);
        assert_eq!(radii, vec![4.0, 2.0, 1.0]);
        let prof = doubling_profile(&t, &radii, 60, 1).unwrap();
        let row = &net_ball_count_bound(&net, &prof, &[4.0])[0];
        assert_eq!(row.holds, Some(true), "{row:?}");
    }
}
