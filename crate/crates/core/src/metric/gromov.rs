use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FiniteMetricSpace, PointId};
use crate::error::{invalid, Result};

/// (x|y)_w = (d(x,w) + d(y,w) - d(x,y)) / 2.
pub fn gromov_product(space: &FiniteMetricSpace, x: PointId, y: PointId, w: PointId) -> f64 {
    0.5 * (space.dist(x, w) + space.dist(y, w) - space.dist(x, y))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaOptions {
    /// Number of sampled (x, z, w) triples; each is paired with every y.
    pub triples: usize,
    /// Enumerate every quadruple when the working set has at most this many
    /// points.
    pub exhaustive_threshold: usize,
    /// Restrict to a random subsample of this many points (basepoint always
    /// included).
    pub subsample: Option<usize>,
    pub seed: u64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            triples: 2000,
            exhaustive_threshold: 40,
            subsample: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// Quadruple (x, y, z, w) attaining the maximal defect.
    pub witness: Option<[PointId; 4]>,
    pub quadruples: u64,
    pub exhaustive: bool,
    pub working_set: usize,
}

/// Four-point defect (x|y)_w ∧ (y|z)_w - (x|z)_w, unclamped.
pub fn four_point_defect(space: &FiniteMetricSpace, q: [PointId; 4]) -> f64 {
    let [x, y, z, w] = q;
    gromov_product(space, x, y, w).min(gromov_product(space, y, z, w)) - gromov_product(space, x, z, w)
}

fn better(a: (f64, [PointId; 4]), b: (f64, [PointId; 4])) -> (f64, [PointId; 4]) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Lower estimate of the hyperbolicity constant: the largest four-point
/// defect over the examined quadruples, clamped at zero.
pub fn estimate_delta(space: &FiniteMetricSpace, opts: &DeltaOptions) -> Result<DeltaEstimate> {
    if space.len() < 4 {
        return Err(invalid("delta estimation needs at least four points"));
    }
    let pts: Vec<PointId> = match opts.subsample {
        Some(k) => super::profile::sample_centers(space, k.max(4), opts.seed, "delta-subsample"),
        None => (0..space.len()).collect(),
    };
    let m = pts.len();
    let floor = (0.0, [pts[0]; 4]);
    let (best, quadruples, exhaustive) = if m <= opts.exhaustive_threshold {
        let best = pts
            .par_iter()
            .map(|&x| {
                let mut best = floor;
                for &y in &pts {
                    for &z in &pts {
                        for &w in &pts {
                            let q = [x, y, z, w];
                            best = better(best, (four_point_defect(space, q), q));
                        }
                    }
                }
                best
            })
            .reduce(|| floor, better);
        (best, (m as u64).pow(4), true)
    } else {
        let mut rng = crate::rng::stream(opts.seed, "delta");
        let triples: Vec<[PointId; 3]> = (0..opts.triples)
            .map(|_| {
                [
                    pts[rng.gen_range(0..m)],
                    pts[rng.gen_range(0..m)],
                    pts[rng.gen_range(0..m)],
                ]
            })
            .collect();
        let best = triples
            .par_iter()
            .map(|&[x, z, w]| {
                let xz = gromov_product(space, x, z, w);
                let mut best = floor;
                for &y in &pts {
                    let d = gromov_product(space, x, y, w).min(gromov_product(space, y, z, w)) - xz;
                    best = better(best, (d, [x, y, z, w]));
                }
                best
            })
            .reduce(|| floor, better);
        (best, (opts.triples * m) as u64, false)
    };
    Ok(DeltaEstimate {
        delta: best.0.max(0.0),
        witness: (best.0 > 0.0).then_some(best.1),
        quadruples,
        exhaustive,
        working_set: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{generate_space, SpaceSpec};

    #[test]
    fn product_edge_cases() {
        let s = generate_space(&SpaceSpec::Zn { dims: 2, radius: 4 }).unwrap();
        for (x, y, w) in [(3, 7, 11), (0, 5, 9), (12, 2, 30)] {
            assert_eq!(gromov_product(&s, x, x, w), s.dist(x, w));
            assert_eq!(gromov_product(&s, x, y, x), 0.0);
            assert_eq!(gromov_product(&s, x, y, w), gromov_product(&s, y, x, w));
            let p = gromov_product(&s, x, y, w);
            assert!(0.0 <= p && p <= s.dist(x, w).min(s.dist(y, w)));
        }
    }

    #[test]
    fn degenerate_quadruple_contributes_nothing() {
        let s = generate_space(&SpaceSpec::Zn { dims: 2, radius: 3 }).unwrap();
        assert!(four_point_defect(&s, [4, 9, 4, 0]) <= 0.0);
    }

    #[test]
    fn trees_are_zero_hyperbolic() {
        let s = generate_space(&SpaceSpec::FreeGroup { rank: 2, radius: 6 }).unwrap();
        let e = estimate_delta(
            &s,
            &DeltaOptions {
                subsample: Some(30),
                seed: 5,
                ..DeltaOptions::default()
            },
        )
        .unwrap();
        assert!(e.exhaustive);
        assert_eq!(e.delta, 0.0);
    }

    #[test]
    fn more_samples_never_lower_the_estimate() {
        let s = generate_space(&SpaceSpec::Zn { dims: 2, radius: 6 }).unwrap();
        let mut last = 0.0;
        for triples in [10, 50, 200, 800] {
            let e = estimate_delta(
                &s,
                &DeltaOptions {
                    triples,
                    exhaustive_threshold: 0,
                    subsample: None,
                    seed: 9,
                },
            )
            .unwrap();
            assert!(e.delta >= last);
            last = e.delta;
        }
        assert!(last > 0.0);
    }
}
