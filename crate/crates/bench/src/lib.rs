//! Fixtures shared by the benchmarks in `benches/`.

use subdiff_core::assembly::{assemble_binary, Boundary, MediumSpec, Phase, SparseSystem};
use subdiff_core::mesh::{structured_rectangle, tag_regions, CvMesh, Morphology, RegionTags};

/// Strip cell on an `n` by `n` structured grid with its region tags.
pub fn strip_cell(n: usize) -> (CvMesh, RegionTags) {
    let mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, n, n);
    let tags = tag_regions(&mesh, &Morphology::strip()).expect("strip fits the unit cell");
    (CvMesh::build(mesh).expect("structured mesh is valid"), tags)
}

/// Two-phase medium with a memory inclusion of order `gamma` in a classical matrix.
pub fn memory_inclusion(gamma: f64) -> MediumSpec {
    MediumSpec::binary(Phase::new(10.0, gamma), Phase::new(1.0, 1.0))
}

/// Periodic system with a unit jump in `x`.
pub fn strip_system(n: usize, gamma: f64) -> SparseSystem {
    let (cv, tags) = strip_cell(n);
    assemble_binary(&cv, &tags, &memory_inclusion(gamma), Boundary::Periodic { jump: [1.0, 0.0] })
        .expect("strip system assembles")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let sys = strip_system(8, 0.5);
        assert!(sys.num_unknowns() < 81);
    }
}
