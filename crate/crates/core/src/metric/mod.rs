//! Finite metric spaces: truncations of the example spaces, ball queries,
//! covering and measure profiles, Gromov products and hyperbolicity.

mod generate;
mod gromov;
mod profile;
mod quasiconvex;

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::TOL;

pub use generate::{generate_space, generate_space_with, GenerateOptions, SpaceSpec};
pub use gromov::{estimate_delta, gromov_product, DeltaEstimate, DeltaOptions};
pub use profile::{doubling_profile, measure_profile, DoublingProfile, MeasureProfile};
pub use quasiconvex::{quasiconvexity_ratio, PairSample, QuasiconvexityReport};

/// Index of a point in its space. Ids are dense, `0..len`.
pub type PointId = usize;

/// Closed-form or tabulated distance oracle.
#[derive(Clone, Debug)]
pub(crate) enum Metric {
    /// L1 word metric of the standard generators of Z^dims.
    Lattice { dims: usize, coords: Vec<i64> },
    /// Reduced words in a tree-like group (free group or free product of
    /// order-two groups); distance is |g| + |h| - 2 lcp(g, h).
    WordTree { words: Vec<Vec<u8>> },
    /// Integer Heisenberg group, word metric looked up in a length table
    /// that covers twice the truncation radius.
    Heisenberg {
        elems: Vec<[i64; 3]>,
        lengths: Arc<HashMap<[i64; 3], u32>>,
    },
    /// Euclidean distance in the plane.
    Plane { coords: Vec<[f64; 2]> },
    /// Left-invariant gauge distance on the real Heisenberg group.
    HeisenbergGauge { coords: Vec<[f64; 3]> },
    /// Hyperbolic plane in geodesic polar coordinates (r, theta).
    Hyperbolic { polar: Vec<[f64; 2]> },
    /// Full row-major table.
    Dense { n: usize, table: Vec<f64> },
}

impl Metric {
    fn len(&self) -> usize {
        match self {
            Metric::Lattice { dims, coords } => coords.len() / dims,
            Metric::WordTree { words } => words.len(),
            Metric::Heisenberg { elems, .. } => elems.len(),
            Metric::Plane { coords } => coords.len(),
            Metric::HeisenbergGauge { coords } => coords.len(),
            Metric::Hyperbolic { polar } => polar.len(),
            Metric::Dense { n, .. } => *n,
        }
    }

    fn dist(&self, x: PointId, y: PointId) -> f64 {
        match self {
            Metric::Lattice { dims, coords } => {
                let a = &coords[x * dims..(x + 1) * dims];
                let b = &coords[y * dims..(y + 1) * dims];
                a.iter().zip(b).map(|(p, q)| (p - q).unsigned_abs()).sum::<u64>() as f64
            }
            Metric::WordTree { words } => {
                let (a, b) = (&words[x], &words[y]);
                let common = a.iter().zip(b).take_while(|(p, q)| p == q).count();
                (a.len() + b.len() - 2 * common) as f64
            }
            Metric::Heisenberg { elems, lengths } => {
                let g = heisenberg_mul(heisenberg_inv(elems[x]), elems[y]);
                f64::from(
                    *lengths
                        .get(&g)
                        .expect("length table covers twice the truncation radius"),
                )
            }
            Metric::Plane { coords } => {
                let (a, b) = (coords[x], coords[y]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            }
            Metric::HeisenbergGauge { coords } => {
                let a = coords[x];
                let b = coords[y];
                let g = [b[0] - a[0], b[1] - a[1], b[2] - a[2] - (a[0] * b[1] - a[1] * b[0])];
                let h = g[0] * g[0] + g[1] * g[1];
                (h * h + g[2] * g[2]).sqrt().sqrt()
            }
            Metric::Hyperbolic { polar } => {
                let ([r1, t1], [r2, t2]) = (polar[x], polar[y]);
                let radial = ((r1 - r2) / 2.0).sinh();
                let angular = ((t1 - t2) / 2.0).sin();
                let s = (radial * radial + r1.sinh() * r2.sinh() * angular * angular).sqrt();
                2.0 * s.asinh()
            }
            Metric::Dense { n, table } => table[x * n + y],
        }
    }
}

/// Group law (x1,y1,z1)(x2,y2,z2) = (x1+x2, y1+y2, z1+z2 + x1 y2 - y1 x2).
pub(crate) fn heisenberg_mul(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn heisenberg_inv(a: [i64; 3]) -> [i64; 3] {
    [-a[0], -a[1], -a[2]]
}

/// A finite pointed metric measure space.
///
/// Immutable after construction. Distances to the basepoint are cached,
/// everything else goes through the oracle.
#[derive(Clone, Debug)]
pub struct FiniteMetricSpace {
    spec: SpaceSpec,
    metric: Metric,
    coords: Vec<Vec<f64>>,
    basepoint: PointId,
    weights: Option<Vec<f64>>,
    radii: Vec<f64>,
    truncation_radius: f64,
    integral: bool,
}

impl FiniteMetricSpace {
    pub(crate) fn new(
        spec: SpaceSpec,
        metric: Metric,
        coords: Vec<Vec<f64>>,
        basepoint: PointId,
        weights: Option<Vec<f64>>,
        truncation_radius: Option<f64>,
        integral: bool,
    ) -> Result<Self> {
        let n = metric.len();
        if n == 0 {
            return Err(invalid("space has no points"));
        }
        if basepoint >= n {
            return Err(invalid(format!("basepoint {basepoint} is not a point of the space")));
        }
        if !coords.is_empty() && coords.len() != n {
            return Err(invalid("coordinate list length differs from point count"));
        }
        if let Some(w) = &weights {
            if w.len() != n {
                return Err(invalid("weight list length differs from point count"));
            }
            if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
                return Err(invalid(format!("point {i} has non-positive weight {v}")));
            }
        }
        let radii: Vec<f64> = (0..n).map(|x| metric.dist(x, basepoint)).collect();
        let truncation_radius = truncation_radius.unwrap_or_else(|| radii.iter().copied().fold(0.0, f64::max));
        Ok(FiniteMetricSpace {
            spec,
            metric,
            coords,
            basepoint,
            weights,
            radii,
            truncation_radius,
            integral,
        })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn basepoint(&self) -> PointId {
        self.basepoint
    }

    #[inline]
    pub fn dist(&self, x: PointId, y: PointId) -> f64 {
        self.metric.dist(x, y)
    }

    /// |x| = d(x, o).
    #[inline]
    pub fn norm(&self, x: PointId) -> f64 {
        self.radii[x]
    }

    pub fn norms(&self) -> &[f64] {
        &self.radii
    }

    /// Measure of a single point (1 unless weights were supplied).
    #[inline]
    pub fn weight(&self, x: PointId) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[x])
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Replace the point weights. Every weight must be strictly positive.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(invalid("weight list length differs from point count"));
        }
        if let Some((i, v)) = weights.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(invalid(format!("point {i} has non-positive weight {v}")));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// The same points and distances measured from a different basepoint.
    /// The truncation radius shrinks by d(o, o'), the largest ball about
    /// the new basepoint that the old truncation ball still contains.
    pub fn with_basepoint(&self, basepoint: PointId) -> Result<Self> {
        if basepoint >= self.len() {
            return Err(invalid(format!("basepoint {basepoint} is not a point of the space")));
        }
        let mut spec = self.spec.clone();
        if let SpaceSpec::Graph { basepoint: b, .. } = &mut spec {
            *b = basepoint;
        }
        Ok(FiniteMetricSpace {
            spec,
            basepoint,
            radii: (0..self.len()).map(|x| self.metric.dist(x, basepoint)).collect(),
            truncation_radius: self.truncation_radius - self.radii[basepoint],
            ..self.clone()
        })
    }

    pub fn coords(&self, x: PointId) -> Option<&[f64]> {
        self.coords.get(x).map(Vec::as_slice)
    }

    /// Radius of the ball the generator truncated the infinite space to.
    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    /// True when every distance is an integer (Cayley graph kinds).
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// The open ball {y : d(x, y) < r}, in id order.
    pub fn ball(&self, x: PointId, r: f64) -> Vec<PointId> {
        (0..self.len()).filter(|&y| lt(self.dist(x, y), r)).collect()
    }

    /// Total weight of the open ball B(x, r).
    pub fn ball_weight(&self, x: PointId, r: f64) -> f64 {
        (0..self.len())
            .filter(|&y| lt(self.dist(x, y), r))
            .map(|y| self.weight(y))
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for x in 0..n {
            for y in x + 1..n {
                best = best.max(self.dist(x, y));
            }
        }
        best
    }

    /// Full distance table, row-major. Only sensible for small spaces.
    pub fn distance_table(&self) -> Vec<f64> {
        let n = self.len();
        let mut t = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                t[x * n + y] = self.dist(x, y);
            }
        }
        t
    }

    /// Check the metric axioms on every pair and on `triples` random triples.
    pub fn check_axioms(&self, triples: usize, seed: u64) -> std::result::Result<(), AxiomViolation> {
        let n = self.len();
        for x in 0..n {
            if self.dist(x, x) != 0.0 {
                return Err(AxiomViolation::Diagonal(x));
            }
        }
        if n <= 2000 {
            for x in 0..n {
                for y in x + 1..n {
                    let (a, b) = (self.dist(x, y), self.dist(y, x));
                    if a != b {
                        return Err(AxiomViolation::Asymmetric(x, y));
                    }
                    if !(a > 0.0) {
                        return Err(AxiomViolation::NotSeparated(x, y));
                    }
                }
            }
        }
        let mut rng = crate::rng::stream(seed, "axioms");
        for _ in 0..triples {
            let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            if x != y && (self.dist(x, y) != self.dist(y, x) || !(self.dist(x, y) > 0.0)) {
                return Err(AxiomViolation::Asymmetric(x, y));
            }
            if self.dist(x, z) > self.dist(x, y) + self.dist(y, z) + TOL {
                return Err(AxiomViolation::Triangle(x, y, z));
            }
        }
        Ok(())
    }

    pub(crate) fn metric(&self) -> &Metric {
        &self.metric
    }
}

/// First metric axiom found to fail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxiomViolation {
    Diagonal(PointId),
    Asymmetric(PointId, PointId),
    NotSeparated(PointId, PointId),
    Triangle(PointId, PointId, PointId),
}

/// `a < b` with the crate tolerance: ties within `TOL` are not strictly less.
#[inline]
pub(crate) fn lt(a: f64, b: f64) -> bool {
    a < b - TOL
}

/// `a <= b` with the crate tolerance.
#[inline]
pub(crate) fn le(a: f64, b: f64) -> bool {
    a <= b + TOL
}
