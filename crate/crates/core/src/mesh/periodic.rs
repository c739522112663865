use super::{Mesh, MeshError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// `u(slave) = u(master) + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicPair {
    pub master: usize,
    pub slave: usize,
    pub offset: f64,
}

/// Pair nodes on the low side of `axis` (masters) with nodes on the high
/// side (slaves) whose other coordinate agrees within `tol`.
pub fn pair_periodic(mesh: &Mesh, axis: Axis, offset: f64, tol: f64) -> Result<Vec<PeriodicPair>, MeshError> {
    let b = mesh.bbox();
    let (lo, hi, along, across) = match axis {
        Axis::X => (b[0], b[2], 0, 1),
        Axis::Y => (b[1], b[3], 1, 0),
    };
    let mut low: Vec<usize> = Vec::new();
    let mut high: Vec<usize> = Vec::new();
    for (i, p) in mesh.nodes.iter().enumerate() {
        if (p[along] - lo).abs() <= tol {
            low.push(i);
        } else if (p[along] - hi).abs() <= tol {
            high.push(i);
        }
    }
    if low.len() != high.len() {
        return Err(MeshError::Pairing(format!(
            "{:?}: {} nodes on the low side but {} on the high side",
            axis,
            low.len(),
            high.len()
        )));
    }
    let key = |i: &usize| mesh.nodes[*i][across];
    low.sort_by(|a, b| key(a).total_cmp(&key(b)));
    high.sort_by(|a, b| key(a).total_cmp(&key(b)));
    let mut pairs = Vec::with_capacity(low.len());
    for (&m, &s) in low.iter().zip(&high) {
        let (pm, ps) = (mesh.nodes[m], mesh.nodes[s]);
        if (pm[across] - ps[across]).abs() > tol {
            return Err(MeshError::Pairing(format!(
                "{axis:?}: node at {pm:?} has no partner (closest candidate {ps:?})"
            )));
        }
        pairs.push(PeriodicPair { master: m, slave: s, offset });
    }
    Ok(pairs)
}

/// Resolution of periodic constraints: every node's value equals the value
/// of its root node plus an offset.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeConstraints {
    pub root: Vec<usize>,
    pub offset: Vec<f64>,
}

impl NodeConstraints {
    pub fn identity(n: usize) -> Self {
        Self { root: (0..n).collect(), offset: vec![0.0; n] }
    }

    /// Combine pair sets (in order). A node constrained twice, such as a
    /// corner, keeps the first link and the second is checked for consistency.
    pub fn from_pairs(n: usize, sets: &[&[PeriodicPair]], tol: f64) -> Result<Self, MeshError> {
        let mut parent: Vec<Option<(usize, f64)>> = vec![None; n];
        let mut deferred = Vec::new();
        for set in sets {
            for p in set.iter() {
                if p.master >= n || p.slave >= n || p.master == p.slave {
                    return Err(MeshError::Pairing(format!("invalid pair {p:?}")));
                }
                if parent[p.slave].is_none() {
                    parent[p.slave] = Some((p.master, p.offset));
                } else {
                    deferred.push(*p);
                }
            }
        }
        let mut root = vec![usize::MAX; n];
        let mut offset = vec![0.0; n];
        for start in 0..n {
            if root[start] != usize::MAX {
                continue;
            }
            let mut chain = vec![start];
            let mut cur = start;
            let (r, mut off) = loop {
                if root[cur] != usize::MAX {
                    break (root[cur], offset[cur]);
                }
                match parent[cur] {
                    None => break (cur, 0.0),
                    Some((m, _)) => {
                        if chain.contains(&m) {
                            return Err(MeshError::Pairing(format!("cyclic constraint through node {m}")));
                        }
                        chain.push(m);
                        cur = m;
                    }
                }
            };
            // walk back down the chain accumulating offsets
            for &node in chain.iter().rev() {
                if root[node] != usize::MAX {
                    off = offset[node];
                    continue;
                }
                if let Some((_, o)) = parent[node] {
                    off += o;
                } else {
                    off = 0.0;
                }
                root[node] = r;
                offset[node] = off;
            }
        }
        for p in deferred {
            let lhs = (root[p.slave], offset[p.slave]);
            let rhs = (root[p.master], offset[p.master] + p.offset);
            if lhs.0 != rhs.0 || (lhs.1 - rhs.1).abs() > tol {
                return Err(MeshError::Pairing(format!(
                    "inconsistent constraints at node {}: {:?} vs {:?}",
                    p.slave, lhs, rhs
                )));
            }
        }
        Ok(Self { root, offset })
    }

    pub fn len(&self) -> usize {
        self.root.len()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_empty()
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.root[i] == i
    }
}
