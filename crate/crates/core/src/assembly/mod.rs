//! Control-volume assembly for binary media.
//!
//! Each phase contributes an affine flux operator `u -> K_r u + b_r`; the
//! time-stepper applies the phase's own fractional operator to it. Periodic
//! boundaries are eliminated by expressing slave nodes through their masters,
//! which moves any jump into the load `b_r`.

mod medium;

pub use medium::{Conductivity, InterfaceMode, MediumSpec, Phase};

use thiserror::Error;

use crate::linalg::CsrMatrix;
use crate::mesh::{pair_periodic, Axis, CvMesh, MeshError, NodeConstraints, Region, RegionTags};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("invalid medium: {0}")]
    Medium(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Outer boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Flux prescribed through a separate forcing vector (zero by default).
    Flux,
    /// Opposite sides identified, with `u(right) = u(left) + jump[0]` and
    /// `u(top) = u(bottom) + jump[1]`.
    Periodic { jump: [f64; 2] },
}

/// Affine flux `K u + b` of the rows sharing one fractional order.
#[derive(Debug, Clone)]
pub struct FluxPart {
    /// Time order `gamma` of the phase (1 is classical diffusion).
    pub order: f64,
    pub matrix: CsrMatrix,
    pub load: Vec<f64>,
}

/// Reduced semi-discrete system `M du/dt = sum_p RD^{1-gamma_p} [K_p u + b_p]`.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub constraints: NodeConstraints,
    /// Unknown carrying each node's root value.
    pub unknown_of_node: Vec<usize>,
    /// Mesh node represented by each unknown.
    pub node_of_unknown: Vec<usize>,
    /// Lumped, capacity-weighted mass per unknown.
    pub mass: Vec<f64>,
    /// Lumped mass per mesh node before merging.
    pub node_mass: Vec<f64>,
    pub parts: Vec<FluxPart>,
}

impl SparseSystem {
    pub fn num_unknowns(&self) -> usize {
        self.node_of_unknown.len()
    }

    /// Nodal values (slaves include their offsets).
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        (0..self.unknown_of_node.len())
            .map(|i| u[self.unknown_of_node[i]] + self.constraints.offset[i])
            .collect()
    }

    /// Unknown values from nodal values (root nodes only).
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        self.node_of_unknown.iter().map(|&i| nodal[i]).collect()
    }

    /// Unknown values from nodal data that may violate the constraints:
    /// each unknown takes the mass-weighted mean of its nodes' root values,
    /// so `total_mass` of the result equals the nodal mass of `nodal` minus
    /// the constant offset mass.
    pub fn conserving_restrict(&self, nodal: &[f64]) -> Vec<f64> {
        let nu = self.num_unknowns();
        let mut acc = vec![0.0; nu];
        let mut weight = vec![0.0; nu];
        for (i, &u) in self.unknown_of_node.iter().enumerate() {
            acc[u] += self.node_mass[i] * (nodal[i] - self.constraints.offset[i]);
            weight[u] += self.node_mass[i];
        }
        acc.iter()
            .zip(&weight)
            .zip(&self.node_of_unknown)
            .map(|((a, w), &i)| if *w > 0.0 { a / w } else { nodal[i] })
            .collect()
    }

    /// Sum of all flux parts, `sum_p (K_p u + b_p)`.
    pub fn total_flux(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_unknowns()];
        for p in &self.parts {
            p.matrix.mul_vec_add(1.0, u, &mut out);
            for (o, b) in out.iter_mut().zip(&p.load) {
                *o += b;
            }
        }
        out
    }

    /// Conserved discrete quantity `sum_i M_i u_i`.
    pub fn total_mass(&self, u: &[f64]) -> f64 {
        self.mass.iter().zip(u).map(|(m, v)| m * v).sum()
    }
}

/// Stiffness contribution of the triangles in `region` (all triangles if `None`),
/// on the full node set.
pub fn stiffness(cv: &CvMesh, tags: &RegionTags, medium: &MediumSpec, region: Option<Region>) -> CsrMatrix {
    let n = cv.num_nodes();
    let mut trip = Vec::with_capacity(cv.sub_volumes.len() * 6);
    for sv in &cv.sub_volumes {
        let t = sv.triangle;
        let r = tags.triangle_region[t];
        if region.is_some_and(|want| want != r) {
            continue;
        }
        let cond = &medium.phase(r).conductivity;
        let tri = cv.mesh.triangles[t];
        let g = &cv.gradients[t];
        for f in &sv.faces {
            let [q1, q2] = cond.at(f.mid[0], f.mid[1]);
            for k in 0..3 {
                let v = q1 * g[k][0] * f.dy - q2 * g[k][1] * f.dx;
                trip.push((f.owner, tri[k], v));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

/// Capacity-weighted lumped mass of every node.
pub fn lumped_mass(cv: &CvMesh, tags: &RegionTags, medium: &MediumSpec) -> Vec<f64> {
    let mut m = vec![0.0; cv.num_nodes()];
    for sv in &cv.sub_volumes {
        let r = tags.triangle_region[sv.triangle];
        m[sv.node] += medium.phase(r).capacity * sv.area;
    }
    m
}

/// Periodic constraints of a rectangular cell with the given jumps.
pub fn periodic_constraints(cv: &CvMesh, jump: [f64; 2]) -> Result<NodeConstraints, MeshError> {
    let b = cv.mesh.bbox();
    let tol = 1e-9 * (b[2] - b[0]).max(b[3] - b[1]);
    let px = pair_periodic(&cv.mesh, Axis::X, jump[0], tol)?;
    let py = pair_periodic(&cv.mesh, Axis::Y, jump[1], tol)?;
    NodeConstraints::from_pairs(cv.num_nodes(), &[&px, &py], 1e-12 * (1.0 + jump[0].abs() + jump[1].abs()))
}

/// Assemble the reduced system for a binary medium.
pub fn assemble_binary(
    cv: &CvMesh,
    tags: &RegionTags,
    medium: &MediumSpec,
    boundary: Boundary,
) -> Result<SparseSystem, AssemblyError> {
    medium.validate()?;
    let n = cv.num_nodes();
    if tags.triangle_region.len() != cv.mesh.triangles.len() {
        return Err(AssemblyError::Medium("region tags do not match the mesh".into()));
    }
    let constraints = match boundary {
        Boundary::Flux => NodeConstraints::identity(n),
        Boundary::Periodic { jump } => periodic_constraints(cv, jump)?,
    };
    let node_of_unknown: Vec<usize> = (0..n).filter(|&i| constraints.is_free(i)).collect();
    let mut unknown_of_root = vec![usize::MAX; n];
    for (u, &i) in node_of_unknown.iter().enumerate() {
        unknown_of_root[i] = u;
    }
    let unknown_of_node: Vec<usize> = (0..n).map(|i| unknown_of_root[constraints.root[i]]).collect();
    let nu = node_of_unknown.len();

    let full_mass = lumped_mass(cv, tags, medium);
    let mut mass = vec![0.0; nu];
    for i in 0..n {
        mass[unknown_of_node[i]] += full_mass[i];
    }

    let reduce = |k: &CsrMatrix| -> (CsrMatrix, Vec<f64>) {
        let mut load = vec![0.0; nu];
        let trip: Vec<_> = k
            .triplets()
            .map(|(i, j, v)| {
                load[unknown_of_node[i]] += v * constraints.offset[j];
                (unknown_of_node[i], unknown_of_node[j], v)
            })
            .collect();
        (CsrMatrix::from_triplets(nu, nu, &trip), load)
    };

    let mut region_parts = Vec::new();
    for region in [Region::Inclusion, Region::Matrix] {
        if !tags.triangle_region.contains(&region) {
            continue;
        }
        let (k, b) = reduce(&stiffness(cv, tags, medium, Some(region)));
        region_parts.push((medium.phase(region).order, k, b));
    }

    let mut parts: Vec<FluxPart> = Vec::new();
    match medium.interface {
        InterfaceMode::FractionalFlux => {
            for (order, matrix, load) in region_parts {
                parts.push(FluxPart { order, matrix, load });
            }
        }
        InterfaceMode::ClassicalFlux => {
            let mut touched = vec![0u8; nu];
            for (_, k, _) in &region_parts {
                for r in k.row_support() {
                    touched[r] += 1;
                }
            }
            let shared: Vec<bool> = touched.iter().map(|&c| c > 1).collect();
            let mut interface_trip = Vec::new();
            let mut interface_load = vec![0.0; nu];
            for (order, k, b) in region_parts {
                let mut trip = Vec::new();
                let mut load = vec![0.0; nu];
                for (i, j, v) in k.triplets() {
                    if shared[i] {
                        interface_trip.push((i, j, v));
                    } else {
                        trip.push((i, j, v));
                    }
                }
                for i in 0..nu {
                    if shared[i] {
                        interface_load[i] += b[i];
                    } else {
                        load[i] = b[i];
                    }
                }
                parts.push(FluxPart { order, matrix: CsrMatrix::from_triplets(nu, nu, &trip), load });
            }
            if shared.iter().any(|&s| s) {
                parts.push(FluxPart {
                    order: 1.0,
                    matrix: CsrMatrix::from_triplets(nu, nu, &interface_trip),
                    load: interface_load,
                });
            }
        }
    }
    let parts = merge_equal_orders(parts);
    Ok(SparseSystem { constraints, unknown_of_node, node_of_unknown, mass, node_mass: full_mass, parts })
}

fn merge_equal_orders(parts: Vec<FluxPart>) -> Vec<FluxPart> {
    let mut out: Vec<FluxPart> = Vec::new();
    for p in parts {
        if p.matrix.nnz() == 0 && p.load.iter().all(|&v| v == 0.0) {
            continue;
        }
        if let Some(q) = out.iter_mut().find(|q| q.order == p.order) {
            q.matrix = CsrMatrix::linear_combination(&[(1.0, &q.matrix), (1.0, &p.matrix)]);
            for (a, b) in q.load.iter_mut().zip(&p.load) {
                *a += b;
            }
        } else {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests;
