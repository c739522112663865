//! Triangular meshes, median-dual control volumes, region tagging and
//! periodic node pairing.

mod cv;
mod msh;
mod periodic;
mod regions;

pub use cv::{CvMesh, DualFace, SubVolume};
pub use msh::{parse_msh, read_msh};
pub use periodic::{pair_periodic, Axis, NodeConstraints, PeriodicPair};
pub use regions::{tag_regions, Morphology, Rect, Region, RegionTags};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: node {node} has nonzero z = {z}; only planar meshes are supported")]
    NonPlanar { line: usize, node: usize, z: f64 },
    #[error("line {line}: unsupported element type {code} ({name})")]
    UnsupportedElement { line: usize, code: u32, name: &'static str },
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("periodic pairing failed: {0}")]
    Pairing(String),
    #[error("bad morphology: {0}")]
    Morphology(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A boundary segment as read from the mesh file, with its physical tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedEdge {
    pub nodes: [usize; 2],
    pub tag: i32,
}

/// Planar triangulation. Triangles are stored counter-clockwise.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub triangle_tags: Vec<i32>,
    pub tagged_edges: Vec<TaggedEdge>,
}

impl Mesh {
    /// Validate and normalise a raw triangulation: clockwise triangles are
    /// reoriented, degenerate ones rejected, and nodes not used by any
    /// triangle dropped.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        triangle_tags: Vec<i32>,
        tagged_edges: Vec<TaggedEdge>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Invalid("no triangles".into()));
        }
        if triangle_tags.len() != triangles.len() {
            return Err(MeshError::Invalid("one tag per triangle required".into()));
        }
        let mut used = vec![false; nodes.len()];
        let mut tris = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nodes.len()) {
                return Err(MeshError::Invalid(format!("triangle {t} references a missing node")));
            }
            let a = signed_area(&nodes, *tri);
            let scale = bbox_size(&nodes).powi(2);
            if a.abs() <= 1e-14 * scale {
                return Err(MeshError::Invalid(format!("triangle {t} is degenerate")));
            }
            let tri = if a < 0.0 { [tri[0], tri[2], tri[1]] } else { *tri };
            for &v in &tri {
                used[v] = true;
            }
            tris.push(tri);
        }
        let mut remap = vec![usize::MAX; nodes.len()];
        let mut kept = Vec::new();
        for (i, p) in nodes.iter().enumerate() {
            if used[i] {
                remap[i] = kept.len();
                kept.push(*p);
            }
        }
        for tri in &mut tris {
            for v in tri.iter_mut() {
                *v = remap[*v];
            }
        }
        let mut edges = Vec::with_capacity(tagged_edges.len());
        for e in tagged_edges {
            let [a, b] = e.nodes;
            if a >= nodes.len() || b >= nodes.len() || remap[a] == usize::MAX || remap[b] == usize::MAX {
                return Err(MeshError::Invalid(format!(
                    "boundary edge ({a}, {b}) does not belong to any triangle"
                )));
            }
            edges.push(TaggedEdge { nodes: [remap[a], remap[b]], tag: e.tag });
        }
        let mesh = Self { nodes: kept, triangles: tris, triangle_tags, tagged_edges: edges };
        mesh.check_tagged_edges()?;
        Ok(mesh)
    }

    fn check_tagged_edges(&self) -> Result<(), MeshError> {
        let counts = self.edge_counts();
        for e in &self.tagged_edges {
            let key = edge_key(e.nodes[0], e.nodes[1]);
            let c = counts.get(&key).copied().unwrap_or(0);
            if c != 1 {
                return Err(MeshError::Invalid(format!(
                    "boundary edge ({}, {}) belongs to {c} triangles, expected exactly one",
                    e.nodes[0], e.nodes[1]
                )));
            }
        }
        Ok(())
    }

    fn edge_counts(&self) -> std::collections::HashMap<(usize, usize), usize> {
        let mut counts = std::collections::HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *counts.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Boundary edges oriented with the domain on their left.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let counts = self.edge_counts();
        let mut out = Vec::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if counts[&edge_key(a, b)] == 1 {
                    out.push([a, b]);
                }
            }
        }
        out
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, self.triangles[t])
    }

    pub fn barycenter(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Axis-aligned bounding box `[xmin, ymin, xmax, ymax]`.
    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for p in &self.nodes {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].min(p[1]);
            b[2] = b[2].max(p[0]);
            b[3] = b[3].max(p[1]);
        }
        b
    }

    /// Largest triangle edge length.
    pub fn max_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let p = self.nodes[tri[k]];
                let q = self.nodes[tri[(k + 1) % 3]];
                h = h.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        h
    }

    /// Linear interpolation of nodal values at a point, if the point lies in the mesh.
    pub fn interpolate(&self, values: &[f64], x: f64, y: f64) -> Option<f64> {
        let tol = 1e-12;
        for tri in &self.triangles {
            let l = barycentric(&self.nodes, *tri, x, y);
            if l.iter().all(|&v| v >= -tol) {
                return Some(l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]]);
            }
        }
        None
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(nodes: &[[f64; 2]], [a, b, c]: [usize; 3]) -> f64 {
    let (p, q, r) = (nodes[a], nodes[b], nodes[c]);
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn barycentric(nodes: &[[f64; 2]], [a, b, c]: [usize; 3], x: f64, y: f64) -> [f64; 3] {
    let (p, q, r) = (nodes[a], nodes[b], nodes[c]);
    let det = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
    let l1 = ((x - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (y - p[1])) / det;
    let l2 = ((q[0] - p[0]) * (y - p[1]) - (x - p[0]) * (q[1] - p[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

fn bbox_size(nodes: &[[f64; 2]]) -> f64 {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in nodes {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    (x1 - x0).max(y1 - y0)
}

/// Structured right-angled triangulation of `[x0,x1] x [y0,y1]` with `nx * ny` cells.
/// Handy for tests and small scenarios that do not need an external mesh.
pub fn structured_rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Mesh {
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([
                x0 + (x1 - x0) * i as f64 / nx as f64,
                y0 + (y1 - y0) * j as f64 / ny as f64,
            ]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let tags = vec![0; tris.len()];
    Mesh::new(nodes, tris, tags, Vec::new()).expect("structured mesh is valid")
}
