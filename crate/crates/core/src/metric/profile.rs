use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lt, FiniteMetricSpace, PointId};
use crate::error::{invalid, Result};
use crate::TOL;

/// A greedy cover of one ball, kept as evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverWitness {
    pub center: PointId,
    pub radius: f64,
    pub cover_radius: f64,
    pub cover_centers: Vec<PointId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringEntry {
    pub big: f64,
    pub small: f64,
    pub count: usize,
}

/// Empirical doubling function N_d(r) and covering numbers N(R, r).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingProfile {
    pub radii: Vec<f64>,
    /// Largest greedy cover size seen at each radius.
    pub raw: Vec<usize>,
    /// Running maximum of `raw`, the value used downstream.
    pub doubling: Vec<usize>,
    pub witnesses: Vec<CoverWitness>,
    pub covering: Vec<CoveringEntry>,
    pub centers: Vec<PointId>,
}

impl DoublingProfile {
    /// N̂_d(r) for a grid radius `r`.
    pub fn at(&self, r: f64) -> Option<usize> {
        self.radii
            .iter()
            .position(|&g| (g - r).abs() <= TOL)
            .map(|i| self.doubling[i])
    }

    /// N̂(big, small) if both radii are on the grid.
    pub fn covering_number(&self, big: f64, small: f64) -> Option<usize> {
        self.covering
            .iter()
            .find(|e| (e.big - big).abs() <= TOL && (e.small - small).abs() <= TOL)
            .map(|e| e.count)
    }
}

/// Greedily cover `points` (scanned in the given order) by open balls of
/// radius `r` centred at points of the set.
pub(crate) fn greedy_cover(space: &FiniteMetricSpace, points: &[PointId], r: f64) -> Vec<PointId> {
    let mut covered = vec![false; points.len()];
    let mut centers = Vec::new();
    for i in 0..points.len() {
        if covered[i] {
            continue;
        }
        let c = points[i];
        centers.push(c);
        for (j, &y) in points.iter().enumerate().skip(i) {
            if !covered[j] && lt(space.dist(c, y), r) {
                covered[j] = true;
            }
        }
    }
    centers
}

fn covers(space: &FiniteMetricSpace, points: &[PointId], centers: &[PointId], r: f64) -> bool {
    points.iter().all(|&y| centers.iter().any(|&c| lt(space.dist(c, y), r)))
}

pub(crate) fn sample_centers(space: &FiniteMetricSpace, count: usize, seed: u64, label: &str) -> Vec<PointId> {
    let n = space.len();
    if count >= n {
        return (0..n).collect();
    }
    let mut rng = crate::rng::stream(seed, label);
    let mut c: Vec<PointId> = sample(&mut rng, n, count).into_iter().collect();
    if !c.contains(&space.basepoint()) {
        c.push(space.basepoint());
    }
    c.sort_unstable();
    c
}

/// Estimate N_d(r) on a grid of radii from greedy covers of B(x, r) by
/// balls of radius r/2, scanning each ball outward from its centre, over
/// `sample_size` centres (all centres when the
/// sample is at least the space size). Every retained cover is verified.
pub fn doubling_profile(
    space: &FiniteMetricSpace,
    radii: &[f64],
    sample_size: usize,
    seed: u64,
) -> Result<DoublingProfile> {
    if space.is_empty() {
        return Err(invalid("doubling profile of an empty space"));
    }
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("doubling radii must be positive"));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() <= TOL);
    let centers = sample_centers(space, sample_size, seed, "doubling");

    let best_cover = |big: f64, small: f64| -> (usize, CoverWitness) {
        centers
            .par_iter()
            .map(|&x| {
                let mut ball = space.ball(x, big);
                ball.sort_by(|&a, &b| space.dist(x, a).total_cmp(&space.dist(x, b)).then(a.cmp(&b)));
                let cover = greedy_cover(space, &ball, small);
                debug_assert!(covers(space, &ball, &cover, small));
                (cover.len(), x, cover)
            })
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
            .map(|(k, x, cover)| {
                (
                    k,
                    CoverWitness {
                        center: x,
                        radius: big,
                        cover_radius: small,
                        cover_centers: cover,
                    },
                )
            })
            .expect("at least one centre")
    };

    let mut raw = Vec::new();
    let mut witnesses = Vec::new();
    for &r in &radii {
        let (k, w) = best_cover(r, r / 2.0);
        let ball = space.ball(w.center, r);
        if !covers(space, &ball, &w.cover_centers, r / 2.0) {
            return Err(crate::Error::Assertion(format!(
                "greedy cover of B({}, {r}) does not cover",
                w.center
            )));
        }
        raw.push(k);
        witnesses.push(w);
    }
    let mut doubling = raw.clone();
    for i in 1..doubling.len() {
        doubling[i] = doubling[i].max(doubling[i - 1]);
    }
    let mut covering = Vec::new();
    for (i, &big) in radii.iter().enumerate() {
        for &small in &radii[..i] {
            let (count, _) = best_cover(big, small);
            covering.push(CoveringEntry { big, small, count });
        }
    }
    Ok(DoublingProfile {
        radii,
        raw,
        doubling,
        witnesses,
        covering,
        centers,
    })
}

/// Empirical measure bounds f̂(r) <= μ(B(x, r)) <= ĝ(r) over all centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureProfile {
    pub radii: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl MeasureProfile {
    pub fn at(&self, r: f64) -> Option<(f64, f64)> {
        self.radii
            .iter()
            .position(|&g| (g - r).abs() <= TOL)
            .map(|i| (self.lower[i], self.upper[i]))
    }

    /// ĝ(r) / f̂(r).
    pub fn ratio(&self, r: f64) -> Option<f64> {
        self.at(r).map(|(f, g)| g / f)
    }
}

pub fn measure_profile(space: &FiniteMetricSpace, radii: &[f64]) -> Result<MeasureProfile> {
    measure_profile_over(space, radii, &(0..space.len()).collect::<Vec<_>>())
}

/// Measure bounds restricted to the given centres.
pub fn measure_profile_over(space: &FiniteMetricSpace, radii: &[f64], centers: &[PointId]) -> Result<MeasureProfile> {
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("measure radii must be positive"));
    }
    if centers.is_empty() {
        return Err(invalid("measure profile needs at least one centre"));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for &r in &radii {
        let (lo, hi) = centers
            .par_iter()
            .map(|&x| {
                let w = space.ball_weight(x, r);
                (w, w)
            })
            .reduce(
                || (f64::INFINITY, f64::NEG_INFINITY),
                |a, b| (a.0.min(b.0), a.1.max(b.1)),
            );
        lower.push(lo);
        upper.push(hi);
    }
    Ok(MeasureProfile { radii, lower, upper })
}
