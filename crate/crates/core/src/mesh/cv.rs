//! Median-dual (vertex-centred) control volumes.

use super::{Mesh, MeshError};

/// Straight piece of a control-volume boundary inside one triangle.
///
/// `dx`, `dy` are the increments along the face when the owner's control
/// volume is traversed counter-clockwise, so `(dy, -dx)` is the outward
/// normal times the face length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualFace {
    pub mid: [f64; 2],
    pub dx: f64,
    pub dy: f64,
    pub owner: usize,
    pub neighbour: usize,
}

/// The part of a node's control volume lying in one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubVolume {
    pub triangle: usize,
    pub node: usize,
    pub area: f64,
    pub faces: [DualFace; 2],
}

/// Mesh plus its median-dual control volumes and linear shape gradients.
#[derive(Debug, Clone)]
pub struct CvMesh {
    pub mesh: Mesh,
    /// Control volume `ΔV_i` of every node.
    pub volumes: Vec<f64>,
    /// Three sub-volumes per triangle, triangle `t` owning `3t..3t+3`.
    pub sub_volumes: Vec<SubVolume>,
    /// Gradients of the three linear shape functions of each triangle.
    pub gradients: Vec<[[f64; 2]; 3]>,
    /// Boundary edges with the domain on their left.
    pub boundary: Vec<[usize; 2]>,
}

impl CvMesh {
    pub fn build(mesh: Mesh) -> Result<Self, MeshError> {
        let n = mesh.nodes.len();
        let mut volumes = vec![0.0; n];
        let mut subs = Vec::with_capacity(3 * mesh.triangles.len());
        let mut grads = Vec::with_capacity(mesh.triangles.len());
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let area = mesh.triangle_area(t);
            if !(area > 0.0) {
                return Err(MeshError::Invalid(format!("triangle {t} has non-positive area")));
            }
            let p = tri.map(|v| mesh.nodes[v]);
            let g = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
            let mid = |a: usize, b: usize| [0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])];
            let mut gt = [[0.0; 2]; 3];
            for k in 0..3 {
                let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                gt[k] = [(p[j][1] - p[l][1]) / (2.0 * area), (p[l][0] - p[j][0]) / (2.0 * area)];
            }
            grads.push(gt);
            for k in 0..3 {
                let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                let m_kj = mid(k, j);
                let m_lk = mid(l, k);
                let face = |a: [f64; 2], b: [f64; 2], nb: usize| DualFace {
                    mid: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
                    dx: b[0] - a[0],
                    dy: b[1] - a[1],
                    owner: tri[k],
                    neighbour: tri[nb],
                };
                subs.push(SubVolume {
                    triangle: t,
                    node: tri[k],
                    area: area / 3.0,
                    faces: [face(m_kj, g, j), face(g, m_lk, l)],
                });
                volumes[tri[k]] += area / 3.0;
            }
        }
        let boundary = mesh.boundary_edges();
        Ok(Self { mesh, volumes, sub_volumes: subs, gradients: grads, boundary })
    }

    pub fn num_nodes(&self) -> usize {
        self.mesh.nodes.len()
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// Nodal values of `∮ ψ·n ds` over the outer-boundary part of each control
    /// volume, evaluating `ψ` at the midpoint of each half-edge.
    /// `include` selects which boundary edges carry the flux.
    pub fn boundary_flux(
        &self,
        psi: impl Fn(f64, f64) -> [f64; 2],
        include: impl Fn([f64; 2], [f64; 2]) -> bool,
    ) -> Vec<f64> {
        let mut out = vec![0.0; self.num_nodes()];
        for &[a, b] in &self.boundary {
            let (pa, pb) = (self.mesh.nodes[a], self.mesh.nodes[b]);
            if !include(pa, pb) {
                continue;
            }
            let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            for (node, s, e) in [(a, pa, m), (b, m, pb)] {
                let q = psi(0.5 * (s[0] + e[0]), 0.5 * (s[1] + e[1]));
                out[node] += q[0] * (e[1] - s[1]) - q[1] * (e[0] - s[0]);
            }
        }
        out
    }

    /// Nodes touching the outer boundary.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut flag = vec![false; self.num_nodes()];
        for &[a, b] in &self.boundary {
            flag[a] = true;
            flag[b] = true;
        }
        (0..flag.len()).filter(|&i| flag[i]).collect()
    }
}
