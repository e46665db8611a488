//! On-disk documents: spaces, nets, Rips graphs, and JSON helpers shared
//! by the other document types.
//!
//! Nets and graphs do not embed their space. They carry a [`SpaceRef`]
//! (the generating spec, an optional path to a space document, and a
//! fingerprint) and are re-validated against the space when loaded.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metric::{generate_space, FiniteMetricSpace, Metric, PointId, SpaceSpec};
use crate::net::PointedNet;
use crate::rips::RipsGraph;

pub const FORMAT_VERSION: u32 = 1;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::format(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::format(path, e))?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Create (or truncate) a file for writing, creating parent directories.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Serde adapter for reals that may be infinite: finite values stay JSON
/// numbers, ±∞ and NaN become the strings "inf", "-inf" and "nan".
pub mod float_or_inf {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *v {
            v if v.is_finite() => s.serialize_f64(v),
            v if v.is_nan() => s.serialize_str("nan"),
            v if v > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", found {other:?}"
                ))),
            },
        }
    }
}

fn check_version(path: &Path, version: u32) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported format version {version}, expected {FORMAT_VERSION}"),
        ));
    }
    Ok(())
}

/// Hex SHA-256 over the spec, size, basepoint, basepoint distances and
/// weights of a space.
pub fn space_fingerprint(space: &FiniteMetricSpace) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(space.spec()).expect("specs serialize"));
    h.update((space.len() as u64).to_le_bytes());
    h.update((space.basepoint() as u64).to_le_bytes());
    for r in space.norms() {
        h.update(r.to_bits().to_le_bytes());
    }
    if let Some(w) = space.weights() {
        for v in w {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    pub id: PointId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

/// A space on disk. Generated kinds are stored without distances and
/// regenerated from `spec` on load; tabulated spaces carry the lower
/// triangle of their distance matrix, row by row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub format_version: u32,
    pub spec: SpaceSpec,
    pub basepoint: PointId,
    pub points: Vec<PointEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_matrix: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
    #[serde(default)]
    pub integral: bool,
}

impl SpaceDocument {
    /// `with_distances` forces the distance matrix even for generated kinds.
    pub fn from_space(space: &FiniteMetricSpace, with_distances: bool) -> Self {
        let n = space.len();
        let tabulated = with_distances || matches!(space.metric(), Metric::Dense { .. });
        SpaceDocument {
            format_version: FORMAT_VERSION,
            spec: space.spec().clone(),
            basepoint: space.basepoint(),
            points: (0..n)
                .map(|id| PointEntry {
                    id,
                    coords: space.coords(id).map(<[f64]>::to_vec),
                })
                .collect(),
            weights: space.weights().map(<[f64]>::to_vec),
            distance_matrix: tabulated.then(|| {
                (0..n)
                    .flat_map(|i| (0..i).map(move |j| (i, j)))
                    .map(|(i, j)| space.dist(i, j))
                    .collect()
            }),
            truncation_radius: Some(space.truncation_radius()),
            integral: space.is_integral(),
        }
    }

    pub fn into_space(self, path: &Path) -> Result<FiniteMetricSpace> {
        check_version(path, self.format_version)?;
        let n = self.points.len();
        if let Some(p) = self.points.iter().enumerate().find(|(i, p)| p.id != *i) {
            return Err(Error::format(
                path,
                format!("point ids must be 0..n in order, found {} at {}", p.1.id, p.0),
            ));
        }
        let space = match self.distance_matrix {
            Some(lower) => {
                if lower.len() != n * n.saturating_sub(1) / 2 {
                    return Err(Error::format(
                        path,
                        "distance matrix is not a lower triangle of the point count",
                    ));
                }
                let mut table = vec![0.0; n * n];
                let mut k = 0;
                for i in 0..n {
                    for j in 0..i {
                        let d = lower[k];
                        k += 1;
                        if !(d > 0.0) || !d.is_finite() {
                            return Err(Error::format(path, format!("distance between {i} and {j} is {d}")));
                        }
                        table[i * n + j] = d;
                        table[j * n + i] = d;
                    }
                }
                let coords = if self.points.iter().all(|p| p.coords.is_some()) {
                    self.points.into_iter().map(|p| p.coords.unwrap_or_default()).collect()
                } else {
                    Vec::new()
                };
                FiniteMetricSpace::new(
                    self.spec,
                    Metric::Dense { n, table },
                    coords,
                    self.basepoint,
                    None,
                    self.truncation_radius,
                    self.integral,
                )
                .map_err(|e| Error::format(path, e))?
            }
            None => {
                if matches!(self.spec, SpaceSpec::File { .. }) {
                    return Err(Error::format(path, "a file-kind spec needs a distance matrix"));
                }
                let space = generate_space(&self.spec)?;
                if space.len() != n {
                    return Err(Error::format(
                        path,
                        format!("spec regenerates {} points, document lists {n}", space.len()),
                    ));
                }
                let space = if space.basepoint() == self.basepoint {
                    space
                } else {
                    space
                        .with_basepoint(self.basepoint)
                        .map_err(|e| Error::format(path, e))?
                };
                let drift = self
                    .points
                    .iter()
                    .find(|p| p.coords.is_some() && p.coords.as_deref() != space.coords(p.id));
                if let Some(p) = drift {
                    return Err(Error::format(
                        path,
                        format!("coordinates of point {} differ from the spec", p.id),
                    ));
                }
                space
            }
        };
        match self.weights {
            Some(w) => space.with_weights(w).map_err(|e| Error::format(path, e)),
            None => Ok(space),
        }
    }
}

pub fn read_space(path: &Path) -> Result<FiniteMetricSpace> {
    read_json::<SpaceDocument>(path)?.into_space(path)
}

pub fn write_space(space: &FiniteMetricSpace, path: &Path, with_distances: bool) -> Result<()> {
    write_json(path, &SpaceDocument::from_space(space, with_distances))
}

/// How a net or graph document finds its space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceRef {
    pub spec: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub hash: String,
}

impl SpaceRef {
    pub fn new(space: &FiniteMetricSpace, file: Option<&Path>) -> Self {
        SpaceRef {
            spec: space.spec().clone(),
            file: file.map(Path::to_path_buf),
            hash: space_fingerprint(space),
        }
    }

    /// Load the referenced space: from `file` (relative paths resolve
    /// against `base`) when present, else by regenerating `spec`. The
    /// fingerprint must match.
    pub fn load(&self, base: &Path) -> Result<Arc<FiniteMetricSpace>> {
        let space = match &self.file {
            Some(f) => {
                let f = if f.is_relative() { base.join(f) } else { f.clone() };
                read_space(&f)?
            }
            None => generate_space(&self.spec)?,
        };
        self.check(&space, base)?;
        Ok(Arc::new(space))
    }

    pub fn check(&self, space: &FiniteMetricSpace, doc: &Path) -> Result<()> {
        let hash = space_fingerprint(space);
        if hash != self.hash {
            return Err(Error::format(
                doc,
                format!("space fingerprint {hash} does not match the recorded {}", self.hash),
            ));
        }
        Ok(())
    }
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetDocument {
    pub format_version: u32,
    pub space: SpaceRef,
    pub eps: f64,
    /// Member ids in insertion order, basepoint first.
    pub members: Vec<PointId>,
}

pub fn write_net(net: &PointedNet, space_file: Option<&Path>, path: &Path) -> Result<()> {
    write_json(
        path,
        &NetDocument {
            format_version: FORMAT_VERSION,
            space: SpaceRef::new(net.space(), space_file),
            eps: net.eps(),
            members: net.members().to_vec(),
        },
    )
}

/// Load a net document, resolving its space, and check the net axioms.
pub fn read_net(path: &Path) -> Result<PointedNet> {
    let doc: NetDocument = read_json(path)?;
    check_version(path, doc.format_version)?;
    let space = doc.space.load(base_dir(path))?;
    net_from_doc(&space, doc, path)
}

/// Load a net document against an already loaded space.
pub fn read_net_for(space: &Arc<FiniteMetricSpace>, path: &Path) -> Result<PointedNet> {
    let doc: NetDocument = read_json(path)?;
    check_version(path, doc.format_version)?;
    doc.space.check(space, path)?;
    net_from_doc(space, doc, path)
}

fn net_from_doc(space: &Arc<FiniteMetricSpace>, doc: NetDocument, path: &Path) -> Result<PointedNet> {
    let net = PointedNet::from_members(space, doc.eps, doc.members).map_err(|e| Error::format(path, e))?;
    let check = net.verify();
    if !check.passed() {
        return Err(Error::format(path, format!("stored net fails verification: {check:?}")));
    }
    Ok(net)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub format_version: u32,
    pub space: SpaceRef,
    pub eps: f64,
    /// Space point ids of the vertices, in net insertion order.
    pub vertices: Vec<PointId>,
    /// Neighbours of each vertex as space point ids, ascending.
    pub adjacency: Vec<Vec<PointId>>,
    pub edge_count: usize,
    pub max_valency: usize,
    /// `valency_histogram[k]` vertices have valency k.
    pub valency_histogram: Vec<usize>,
}

impl GraphDocument {
    pub fn from_graph(graph: &RipsGraph, space_file: Option<&Path>) -> Self {
        let adjacency = (0..graph.len())
            .map(|i| {
                let mut n: Vec<PointId> = graph.neighbors(i).iter().map(|&j| graph.point(j as usize)).collect();
                n.sort_unstable();
                n
            })
            .collect();
        GraphDocument {
            format_version: FORMAT_VERSION,
            space: SpaceRef::new(graph.space(), space_file),
            eps: graph.eps(),
            vertices: graph.members().to_vec(),
            adjacency,
            edge_count: graph.edge_count(),
            max_valency: graph.max_valency(),
            valency_histogram: graph.valency_histogram(),
        }
    }
}

pub fn write_graph(graph: &RipsGraph, space_file: Option<&Path>, path: &Path) -> Result<()> {
    write_json(path, &GraphDocument::from_graph(graph, space_file))
}

/// Load a graph document. The graph is rebuilt from its vertex set and
/// scale and must reproduce the stored adjacency.
pub fn read_graph(path: &Path) -> Result<RipsGraph> {
    let doc: GraphDocument = read_json(path)?;
    check_version(path, doc.format_version)?;
    let space = doc.space.load(base_dir(path))?;
    let graph = RipsGraph::on_points(&space, doc.vertices.clone(), doc.eps).map_err(|e| Error::format(path, e))?;
    let rebuilt = GraphDocument::from_graph(&graph, doc.space.file.as_deref());
    if rebuilt.adjacency != doc.adjacency {
        let v = rebuilt
            .adjacency
            .iter()
            .zip(&doc.adjacency)
            .position(|(a, b)| a != b)
            .unwrap_or(0);
        return Err(Error::format(
            path,
            format!(
                "stored adjacency of vertex {} differs from the Rips rule",
                doc.vertices.get(v).copied().unwrap_or(0)
            ),
        ));
    }
    Ok(graph)
}

pub fn write_edge_csv(graph: &RipsGraph, path: &Path) -> Result<()> {
    let mut out = create_file(path)?;
    graph
        .write_edge_csv(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
