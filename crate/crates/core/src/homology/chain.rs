use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::control::ControlFunction;
use crate::metric::{FiniteMetricSpace, PointId};

/// A finitely supported 0-chain Σ c_x [x].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(PointId, f64)>", into = "Vec<(PointId, f64)>")]
pub struct Chain0 {
    coeffs: BTreeMap<PointId, f64>,
}

impl Chain0 {
    pub fn new() -> Self {
        Self::default()
    }

    /// The fundamental chain Σ_{x ∈ F} [x].
    pub fn fundamental(points: impl IntoIterator<Item = PointId>) -> Self {
        let mut c = Self::new();
        for x in points {
            c.add(x, 1.0);
        }
        c
    }

    pub fn add(&mut self, x: PointId, c: f64) {
        let v = self.coeffs.entry(x).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.coeffs.remove(&x);
        }
    }

    pub fn get(&self, x: PointId) -> f64 {
        self.coeffs.get(&x).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, f64)> + '_ {
        self.coeffs.iter().map(|(&x, &c)| (x, c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// self + a·other
    pub fn axpy(&mut self, a: f64, other: &Chain0) {
        for (x, c) in other.iter() {
            self.add(x, a * c);
        }
    }

    pub fn scaled(&self, a: f64) -> Chain0 {
        let mut out = Chain0::new();
        out.axpy(a, self);
        out
    }

    /// max |c_x - other_x| over the union of supports.
    pub fn max_abs_diff(&self, other: &Chain0) -> f64 {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }
}

impl From<Vec<(PointId, f64)>> for Chain0 {
    fn from(v: Vec<(PointId, f64)>) -> Self {
        let mut c = Chain0::new();
        for (x, a) in v {
            c.add(x, a);
        }
        c
    }
}

impl From<Chain0> for Vec<(PointId, f64)> {
    fn from(c: Chain0) -> Self {
        c.coeffs.into_iter().collect()
    }
}

/// A finitely supported alternating 1-chain Σ c_[u,v] [u, v]. Only keys
/// with u < v are stored; c_[v,u] = -c_[u,v] and degenerate simplices
/// [x, x] vanish.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(PointId, PointId, f64)>", into = "Vec<(PointId, PointId, f64)>")]
pub struct Chain1 {
    coeffs: BTreeMap<(PointId, PointId), f64>,
}

impl Chain1 {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add c·[u, v].
    pub fn add(&mut self, u: PointId, v: PointId, c: f64) {
        if u == v {
            return;
        }
        let (key, c) = if u < v { ((u, v), c) } else { ((v, u), -c) };
        let e = self.coeffs.entry(key).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.coeffs.remove(&key);
        }
    }

    /// c_[u, v] in the alternating convention.
    pub fn get(&self, u: PointId, v: PointId) -> f64 {
        if u < v {
            self.coeffs.get(&(u, v)).copied().unwrap_or(0.0)
        } else {
            -self.coeffs.get(&(v, u)).copied().unwrap_or(0.0)
        }
    }

    /// Stored entries (u, v, c_[u,v]) with u < v, in key order.
    pub fn iter(&self) -> impl Iterator<Item = (PointId, PointId, f64)> + '_ {
        self.coeffs.iter().map(|(&(u, v), &c)| (u, v, c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn axpy(&mut self, a: f64, other: &Chain1) {
        for (u, v, c) in other.iter() {
            self.add(u, v, a * c);
        }
    }

    pub fn scaled(&self, a: f64) -> Chain1 {
        let mut out = Chain1::new();
        out.axpy(a, self);
        out
    }
}

impl From<Vec<(PointId, PointId, f64)>> for Chain1 {
    fn from(v: Vec<(PointId, PointId, f64)>) -> Self {
        let mut c = Chain1::new();
        for (x, y, a) in v {
            c.add(x, y, a);
        }
        c
    }
}

impl From<Chain1> for Vec<(PointId, PointId, f64)> {
    fn from(c: Chain1) -> Self {
        c.coeffs.into_iter().map(|((u, v), a)| (u, v, a)).collect()
    }
}

/// ∂[u, v] = [v] - [u], extended linearly.
pub fn boundary1(c: &Chain1) -> Chain0 {
    let mut out = Chain0::new();
    for (u, v, a) in c.iter() {
        out.add(v, a);
        out.add(u, -a);
    }
    out
}

/// K(c) = max |c_[u,v]| / ρ(max(|u|, |v|)); zero for the zero chain.
pub fn control_norm(c: &Chain1, space: &FiniteMetricSpace, rho: &ControlFunction) -> f64 {
    c.iter()
        .map(|(u, v, a)| a.abs() / rho.at(space.norm(u).max(space.norm(v))))
        .fold(0.0, f64::max)
}

/// P(c) = max d(u, v) over the support; zero for the zero chain.
pub fn propagation(c: &Chain1, space: &FiniteMetricSpace) -> f64 {
    c.iter().map(|(u, v, _)| space.dist(u, v)).fold(0.0, f64::max)
}
