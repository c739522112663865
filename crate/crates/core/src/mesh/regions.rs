use super::{Mesh, MeshError};

/// Phase of a triangle in a binary medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Inclusion,
    Matrix,
}

impl Region {
    pub fn index(self) -> usize {
        match self {
            Region::Inclusion => 0,
            Region::Matrix => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x0 && x < self.x1 && y > self.y0 && y < self.y1
    }
}

/// How triangles are assigned to the inclusion phase.
#[derive(Debug, Clone, PartialEq)]
pub enum Morphology {
    /// Homogeneous medium: everything is matrix.
    Uniform,
    Rectangle(Rect),
    Circle { center: [f64; 2], radius: f64 },
    /// Union of rectangles (L-shapes and the like).
    Union(Vec<Rect>),
    /// Use the mesh's physical surface tags.
    Tagged { inclusion_tag: i32 },
}

impl Morphology {
    /// Vertical strip `3/8 < x < 5/8`, volume fraction 1/4.
    pub fn strip() -> Self {
        Morphology::Rectangle(Rect { x0: 0.375, x1: 0.625, y0: 0.0, y1: 1.0 })
    }

    /// Centred disc of area 1/4.
    pub fn disc() -> Self {
        Morphology::Circle {
            center: [0.5, 0.5],
            radius: (0.25 / std::f64::consts::PI).sqrt(),
        }
    }

    /// L-shaped inclusion of area 1/4.
    pub fn l_shape() -> Self {
        Morphology::Union(vec![
            Rect { x0: 0.5, x1: 0.75, y0: 0.0, y1: 0.5 },
            Rect { x0: 0.25, x1: 0.75, y0: 0.5, y1: 0.75 },
        ])
    }

    fn validate(&self, bbox: [f64; 4]) -> Result<(), MeshError> {
        let tol = 1e-12 * (bbox[2] - bbox[0]).max(bbox[3] - bbox[1]);
        let inside = |r: &Rect| {
            r.x0 < r.x1
                && r.y0 < r.y1
                && r.x0 >= bbox[0] - tol
                && r.x1 <= bbox[2] + tol
                && r.y0 >= bbox[1] - tol
                && r.y1 <= bbox[3] + tol
        };
        let ok = match self {
            Morphology::Uniform | Morphology::Tagged { .. } => true,
            Morphology::Rectangle(r) => inside(r),
            Morphology::Union(rs) => !rs.is_empty() && rs.iter().all(inside),
            Morphology::Circle { center, radius } => {
                *radius > 0.0
                    && center[0] - radius >= bbox[0] - tol
                    && center[0] + radius <= bbox[2] + tol
                    && center[1] - radius >= bbox[1] - tol
                    && center[1] + radius <= bbox[3] + tol
            }
        };
        if ok {
            Ok(())
        } else {
            Err(MeshError::Morphology(format!("{self:?} does not fit in the cell {bbox:?}")))
        }
    }

    fn classify(&self, x: f64, y: f64, tag: i32) -> Region {
        let inc = match self {
            Morphology::Uniform => false,
            Morphology::Rectangle(r) => r.contains(x, y),
            Morphology::Union(rs) => rs.iter().any(|r| r.contains(x, y)),
            Morphology::Circle { center, radius } => {
                (x - center[0]).powi(2) + (y - center[1]).powi(2) < radius * radius
            }
            Morphology::Tagged { inclusion_tag } => tag == *inclusion_tag,
        };
        if inc {
            Region::Inclusion
        } else {
            Region::Matrix
        }
    }
}

/// Region assignment of every triangle.
#[derive(Debug, Clone)]
pub struct RegionTags {
    pub triangle_region: Vec<Region>,
    /// Nodes shared by triangles of both regions.
    pub interface_nodes: Vec<usize>,
    /// Area fraction of the inclusion.
    pub volume_fraction: f64,
}

impl RegionTags {
    pub fn uniform(mesh: &Mesh) -> Self {
        tag_regions(mesh, &Morphology::Uniform).expect("uniform morphology always fits")
    }
}

/// Assign each triangle to a region by testing its barycentre (or its tag).
pub fn tag_regions(mesh: &Mesh, morphology: &Morphology) -> Result<RegionTags, MeshError> {
    morphology.validate(mesh.bbox())?;
    let mut region = Vec::with_capacity(mesh.triangles.len());
    let mut touch = vec![[false; 2]; mesh.nodes.len()];
    let (mut a_inc, mut a_tot) = (0.0, 0.0);
    for t in 0..mesh.triangles.len() {
        let [x, y] = mesh.barycenter(t);
        let r = morphology.classify(x, y, mesh.triangle_tags[t]);
        let area = mesh.triangle_area(t);
        a_tot += area;
        if r == Region::Inclusion {
            a_inc += area;
        }
        for &v in &mesh.triangles[t] {
            touch[v][r.index()] = true;
        }
        region.push(r);
    }
    if let Morphology::Tagged { inclusion_tag } = morphology {
        if a_inc == 0.0 {
            return Err(MeshError::Morphology(format!(
                "no triangle carries the inclusion tag {inclusion_tag}"
            )));
        }
        if a_inc == a_tot {
            return Err(MeshError::Morphology(format!(
                "every triangle carries the inclusion tag {inclusion_tag}; no matrix left"
            )));
        }
    }
    let interface_nodes = (0..mesh.nodes.len()).filter(|&i| touch[i][0] && touch[i][1]).collect();
    Ok(RegionTags { triangle_region: region, interface_nodes, volume_fraction: a_inc / a_tot })
}
