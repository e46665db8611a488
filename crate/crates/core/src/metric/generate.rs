use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;
use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{heisenberg_mul, FiniteMetricSpace, Metric};
use crate::error::{invalid, Error, Result};

/// Descriptor of a generated space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceSpec {
    /// Word-metric ball of Z^dims with the standard generators.
    Zn { dims: usize, radius: u32 },
    /// Word-metric ball of the free group on `rank` generators.
    FreeGroup { rank: usize, radius: u32 },
    /// Ball in the `valency`-regular tree, realised as the Cayley graph of
    /// the free product of `valency` copies of Z/2.
    Tree { valency: usize, radius: u32 },
    /// Word-metric ball of the integer Heisenberg group, generators x, y.
    HeisenbergZ { radius: u32 },
    /// Uniform cloud in the box [-half_width, half_width]^3 of the real
    /// Heisenberg group with the gauge metric, plus the identity.
    HeisenbergRCloud { count: usize, half_width: f64, seed: u64 },
    /// Uniform-in-area sample of the hyperbolic disk of the given radius,
    /// plus the centre.
    HyperbolicDisk { count: usize, max_radius: f64, seed: u64 },
    /// Segments from the origin to (1, 0) and to (1, 1/k) for k = 1..=arms,
    /// each sampled at `points_per_arm` equally spaced points.
    Fan { arms: usize, points_per_arm: usize },
    /// Boundaries of the ever-widening squares, sampled on the grid of step
    /// 1/subdivisions.
    Ladder { rungs: usize, subdivisions: usize },
    /// Shortest-path metric of an undirected connected graph on
    /// `0..vertices`.
    Graph {
        vertices: usize,
        edges: Vec<(usize, usize)>,
        #[serde(default)]
        basepoint: usize,
    },
    /// A space document on disk.
    File { path: PathBuf },
}

impl SpaceSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SpaceSpec::Zn { .. } => "zn",
            SpaceSpec::FreeGroup { .. } => "free-group",
            SpaceSpec::Tree { .. } => "tree",
            SpaceSpec::HeisenbergZ { .. } => "heisenberg-z",
            SpaceSpec::HeisenbergRCloud { .. } => "heisenberg-r-cloud",
            SpaceSpec::HyperbolicDisk { .. } => "hyperbolic-disk",
            SpaceSpec::Fan { .. } => "fan",
            SpaceSpec::Ladder { .. } => "ladder",
            SpaceSpec::Graph { .. } => "graph",
            SpaceSpec::File { .. } => "file",
        }
    }

    /// True for the word-metric (Cayley graph) kinds.
    pub fn is_cayley(&self) -> bool {
        matches!(
            self,
            SpaceSpec::Zn { .. } | SpaceSpec::FreeGroup { .. } | SpaceSpec::Tree { .. } | SpaceSpec::HeisenbergZ { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(invalid(format!("{}: {what} must be positive", self.kind())))
            }
        };
        match *self {
            SpaceSpec::Zn { dims, radius } => {
                positive(dims > 0, "dims")?;
                positive(radius > 0, "radius")
            }
            SpaceSpec::FreeGroup { rank, radius } => {
                positive(rank > 0, "rank")?;
                positive(radius > 0, "radius")
            }
            SpaceSpec::Tree { valency, radius } => {
                if valency < 2 {
                    return Err(invalid("tree: valency must be at least 2"));
                }
                positive(radius > 0, "radius")
            }
            SpaceSpec::HeisenbergZ { radius } => positive(radius > 0, "radius"),
            SpaceSpec::HeisenbergRCloud { count, half_width, .. } => {
                positive(count > 0, "count")?;
                positive(half_width > 0.0, "half_width")
            }
            SpaceSpec::HyperbolicDisk { count, max_radius, .. } => {
                positive(count > 0, "count")?;
                positive(max_radius > 0.0, "max_radius")
            }
            SpaceSpec::Fan { arms, points_per_arm } => {
                positive(arms > 0, "arms")?;
                positive(points_per_arm > 0, "points_per_arm")
            }
            SpaceSpec::Ladder { rungs, subdivisions } => {
                positive(rungs > 0, "rungs")?;
                positive(subdivisions > 0, "subdivisions")?;
                if rungs > 40 {
                    return Err(invalid("ladder: at most 40 rungs"));
                }
                Ok(())
            }
            SpaceSpec::Graph {
                vertices,
                ref edges,
                basepoint,
            } => {
                positive(vertices > 0, "vertices")?;
                if basepoint >= vertices {
                    return Err(invalid("graph: basepoint is not a vertex"));
                }
                match edges.iter().find(|&&(a, b)| a >= vertices || b >= vertices || a == b) {
                    Some(e) => Err(invalid(format!("graph: bad edge {e:?}"))),
                    None => Ok(()),
                }
            }
            SpaceSpec::File { .. } => Ok(()),
        }
    }

    /// Closed-form point count where one is known.
    pub fn point_count_estimate(&self) -> Option<u128> {
        match *self {
            SpaceSpec::Zn { dims, radius } => Some(lattice_ball_size(dims, radius)),
            SpaceSpec::FreeGroup { rank, radius } => Some(tree_ball_size(2 * rank, radius)),
            SpaceSpec::Tree { valency, radius } => Some(tree_ball_size(valency, radius)),
            // The ball of radius R grows like R^4; the constant is fitted
            // from exact counts at small radius.
            SpaceSpec::HeisenbergZ { radius } => {
                let r = f64::from(radius);
                Some((0.55 * r.powi(4) + 2.0 * r.powi(3) + 10.0) as u128)
            }
            SpaceSpec::HeisenbergRCloud { count, .. } | SpaceSpec::HyperbolicDisk { count, .. } => {
                Some(count as u128 + 1)
            }
            SpaceSpec::Fan { arms, points_per_arm } => Some(((arms + 1) * points_per_arm + 1) as u128),
            SpaceSpec::Ladder { rungs, subdivisions } => {
                Some((0..rungs).map(|n| 4u128 << (n + 1)).sum::<u128>() * subdivisions as u128)
            }
            SpaceSpec::Graph { vertices, .. } => Some(vertices as u128),
            SpaceSpec::File { .. } => None,
        }
    }
}

/// Number of points of Z^d with L1 norm at most R: sum_k 2^k C(d,k) C(R,k).
fn lattice_ball_size(d: usize, r: u32) -> u128 {
    let r = r as u128;
    let mut total = 0u128;
    for k in 0..=d.min(r as usize) as u128 {
        total = total.saturating_add(
            (1u128 << k)
                .saturating_mul(binom(d as u128, k))
                .saturating_mul(binom(r, k)),
        );
    }
    total
}

fn binom(n: u128, k: u128) -> u128 {
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Ball of radius R in the q-regular tree.
fn tree_ball_size(q: usize, r: u32) -> u128 {
    let q = q as u128;
    if q <= 2 {
        return 1 + q * r as u128;
    }
    let mut total = 1u128;
    let mut sphere = q;
    for _ in 0..r {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(q - 1);
    }
    total
}

/// Limits applied while generating.
#[derive(Clone, Copy, Debug)]
pub struct GenerateOptions {
    pub max_points: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { max_points: 1_000_000 }
    }
}

/// Build the finite space described by `spec` with default limits.
pub fn generate_space(spec: &SpaceSpec) -> Result<FiniteMetricSpace> {
    generate_space_with(spec, GenerateOptions::default())
}

pub fn generate_space_with(spec: &SpaceSpec, opts: GenerateOptions) -> Result<FiniteMetricSpace> {
    spec.validate()?;
    if let Some(est) = spec.point_count_estimate() {
        if est > opts.max_points as u128 {
            return Err(Error::CapExceeded {
                what: format!("{spec:?}"),
                estimate: est,
                cap: opts.max_points,
            });
        }
    }
    match *spec {
        SpaceSpec::Zn { dims, radius } => zn(spec, dims, radius, opts),
        SpaceSpec::FreeGroup { rank, radius } => {
            let gens: Vec<(u8, u8)> = (0..rank as u8)
                .flat_map(|i| [(2 * i, 2 * i + 1), (2 * i + 1, 2 * i)])
                .collect();
            word_tree(spec, &gens, radius, opts)
        }
        SpaceSpec::Tree { valency, radius } => {
            let gens: Vec<(u8, u8)> = (0..valency as u8).map(|i| (i, i)).collect();
            word_tree(spec, &gens, radius, opts)
        }
        SpaceSpec::HeisenbergZ { radius } => heisenberg_z(spec, radius, opts),
        SpaceSpec::HeisenbergRCloud {
            count,
            half_width,
            seed,
        } => {
            let mut rng = crate::rng::stream(seed, "heisenberg-r-cloud");
            let mut coords = vec![[0.0; 3]];
            for _ in 0..count {
                let p = [
                    rng.gen_range(-half_width..half_width),
                    rng.gen_range(-half_width..half_width),
                    rng.gen_range(-half_width..half_width),
                ];
                if p != [0.0; 3] {
                    coords.push(p);
                }
            }
            let out = coords.iter().map(|c| c.to_vec()).collect();
            FiniteMetricSpace::new(
                spec.clone(),
                Metric::HeisenbergGauge { coords },
                out,
                0,
                None,
                None,
                false,
            )
        }
        SpaceSpec::HyperbolicDisk {
            count,
            max_radius,
            seed,
        } => {
            let mut rng = crate::rng::stream(seed, "hyperbolic-disk");
            let mut polar = vec![[0.0, 0.0]];
            let top = max_radius.cosh() - 1.0;
            while polar.len() < count + 1 {
                // Area inside radius r is proportional to cosh r - 1.
                let u: f64 = rng.gen();
                let r = (1.0 + u * top).acosh();
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                if r > 1e-9 {
                    polar.push([r, theta]);
                }
            }
            let coords = polar
                .iter()
                .map(|&[r, t]| {
                    // Poincare disk coordinates.
                    let rho = (r / 2.0).tanh();
                    vec![rho * t.cos(), rho * t.sin()]
                })
                .collect();
            FiniteMetricSpace::new(
                spec.clone(),
                Metric::Hyperbolic { polar },
                coords,
                0,
                None,
                Some(max_radius),
                false,
            )
        }
        SpaceSpec::Fan { arms, points_per_arm } => {
            let mut coords = vec![[0.0, 0.0]];
            for k in 0..=arms {
                let tip = if k == 0 { [1.0, 0.0] } else { [1.0, 1.0 / k as f64] };
                for j in 1..=points_per_arm {
                    let s = j as f64 / points_per_arm as f64;
                    coords.push([s * tip[0], s * tip[1]]);
                }
            }
            plane(spec, coords)
        }
        SpaceSpec::Ladder { rungs, subdivisions } => ladder(spec, rungs, subdivisions),
        SpaceSpec::Graph {
            vertices,
            ref edges,
            basepoint,
        } => graph(spec, vertices, edges, basepoint),
        SpaceSpec::File { ref path } => crate::io::read_space(path),
    }
}

fn graph(spec: &SpaceSpec, n: usize, edges: &[(usize, usize)], basepoint: usize) -> Result<FiniteMetricSpace> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut table = vec![f64::INFINITY; n * n];
    for s in 0..n {
        let row = &mut table[s * n..(s + 1) * n];
        row[s] = 0.0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if row[v].is_infinite() {
                    row[v] = row[u] + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    if let Some(i) = table.iter().position(|d| d.is_infinite()) {
        return Err(invalid(format!(
            "graph: vertex {} is unreachable from {}",
            i % n,
            i / n
        )));
    }
    FiniteMetricSpace::new(
        spec.clone(),
        Metric::Dense { n, table },
        Vec::new(),
        basepoint,
        None,
        None,
        true,
    )
}

fn plane(spec: &SpaceSpec, coords: Vec<[f64; 2]>) -> Result<FiniteMetricSpace> {
    let out = coords.iter().map(|c| c.to_vec()).collect();
    FiniteMetricSpace::new(spec.clone(), Metric::Plane { coords }, out, 0, None, None, false)
}

fn ladder(spec: &SpaceSpec, rungs: usize, subdivisions: usize) -> Result<FiniteMetricSpace> {
    // Work on the integer grid of step 1/subdivisions.
    let h = subdivisions as i64;
    let mut seen = HashSet::new();
    let mut grid = vec![(0i64, 0i64)];
    seen.insert((0, 0));
    for n in 1..=rungs as u32 {
        let half = (1i64 << (n - 1)) * h;
        // centre height 3/2 * 2^n - 2
        let cy = (3 * (1i64 << n) / 2 - 2) * h;
        let (x0, x1, y0, y1) = (-half, half, cy - half, cy + half);
        let mut perimeter = Vec::new();
        for x in x0..=x1 {
            perimeter.push((x, y0));
            perimeter.push((x, y1));
        }
        for y in y0 + 1..y1 {
            perimeter.push((x0, y));
            perimeter.push((x1, y));
        }
        for p in perimeter {
            if seen.insert(p) {
                grid.push(p);
            }
        }
    }
    let step = 1.0 / subdivisions as f64;
    let coords = grid
        .into_iter()
        .map(|(x, y)| [x as f64 * step, y as f64 * step])
        .collect();
    plane(spec, coords)
}

fn zn(spec: &SpaceSpec, dims: usize, radius: u32, opts: GenerateOptions) -> Result<FiniteMetricSpace> {
    let gens: Vec<Vec<i64>> = (0..dims)
        .flat_map(|i| {
            let mut plus = vec![0; dims];
            plus[i] = 1;
            let mut minus = vec![0; dims];
            minus[i] = -1;
            [plus, minus]
        })
        .collect();
    let (elems, _) = bfs_ball(
        vec![0i64; dims],
        &gens,
        |a, g| a.iter().zip(g).map(|(x, y)| x + y).collect(),
        radius,
        opts.max_points,
        spec,
    )?;
    let coords: Vec<i64> = elems.iter().flatten().copied().collect();
    let out = elems.iter().map(|e| e.iter().map(|&c| c as f64).collect()).collect();
    FiniteMetricSpace::new(
        spec.clone(),
        Metric::Lattice { dims, coords },
        out,
        0,
        None,
        Some(f64::from(radius)),
        true,
    )
}

/// Each generator is (letter, inverse letter); words are kept reduced.
fn word_tree(spec: &SpaceSpec, gens: &[(u8, u8)], radius: u32, opts: GenerateOptions) -> Result<FiniteMetricSpace> {
    let (words, _) = bfs_ball(
        Vec::<u8>::new(),
        gens,
        |w, &(letter, inverse)| {
            let mut w = w.clone();
            if w.last() == Some(&inverse) {
                w.pop();
            } else {
                w.push(letter);
            }
            w
        },
        radius,
        opts.max_points,
        spec,
    )?;
    FiniteMetricSpace::new(
        spec.clone(),
        Metric::WordTree { words },
        Vec::new(),
        0,
        None,
        Some(f64::from(radius)),
        true,
    )
}

fn heisenberg_z(spec: &SpaceSpec, radius: u32, opts: GenerateOptions) -> Result<FiniteMetricSpace> {
    let gens = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]];
    // Distances between points of the R-ball are word lengths up to 2R.
    let table_cap = opts.max_points.saturating_mul(32);
    let (elems, lengths) = bfs_ball(
        [0i64; 3],
        &gens,
        |a, g| heisenberg_mul(*a, *g),
        2 * radius,
        table_cap,
        spec,
    )?;
    let table: HashMap<[i64; 3], u32> = elems.iter().copied().zip(lengths.iter().copied()).collect();
    let inside: Vec<[i64; 3]> = elems
        .into_iter()
        .zip(lengths)
        .filter(|&(_, l)| l <= radius)
        .map(|(e, _)| e)
        .collect();
    let out = inside.iter().map(|e| e.iter().map(|&c| c as f64).collect()).collect();
    FiniteMetricSpace::new(
        spec.clone(),
        Metric::Heisenberg {
            elems: inside,
            lengths: Arc::new(table),
        },
        out,
        0,
        None,
        Some(f64::from(radius)),
        true,
    )
}

/// Breadth-first enumeration of the word-metric ball around the identity.
/// Returns elements in discovery order together with their word lengths.
pub(crate) fn bfs_ball<E, G>(
    identity: E,
    gens: &[G],
    mul: impl Fn(&E, &G) -> E,
    radius: u32,
    cap: usize,
    spec: &SpaceSpec,
) -> Result<(Vec<E>, Vec<u32>)>
where
    E: Clone + Eq + Hash,
{
    let mut index: HashMap<E, u32> = HashMap::new();
    let mut elems = vec![identity.clone()];
    let mut lengths = vec![0u32];
    index.insert(identity, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let l = lengths[i];
        if l == radius {
            continue;
        }
        for g in gens {
            let next = mul(&elems[i], g);
            if index.contains_key(&next) {
                continue;
            }
            if elems.len() >= cap {
                // Extrapolate polynomially from the radius reached so far.
                let reached = f64::from(l.max(1));
                let est = elems.len() as f64 * (f64::from(radius) / reached).powi(4);
                return Err(Error::CapExceeded {
                    what: format!("{spec:?}"),
                    estimate: est as u128,
                    cap,
                });
            }
            index.insert(next.clone(), l + 1);
            elems.push(next);
            lengths.push(l + 1);
            queue.push_back(elems.len() - 1);
        }
    }
    Ok((elems, lengths))
}
