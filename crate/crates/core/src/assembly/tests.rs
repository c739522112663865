use super::*;
use crate::mesh::{structured_rectangle, tag_regions, CvMesh, Mesh, Morphology};

fn skewed_mesh() -> Mesh {
    // structured grid with interior nodes jiggled deterministically
    let mut m = structured_rectangle(0.0, 1.0, 0.0, 1.0, 6, 5);
    for p in &mut m.nodes {
        let (x, y) = (p[0], p[1]);
        if x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 {
            p[0] += 0.04 * (7.0 * y + 3.0 * x).sin();
            p[1] += 0.03 * (5.0 * x - 2.0 * y).cos();
        }
    }
    Mesh::new(m.nodes, m.triangles, m.triangle_tags, Vec::new()).unwrap()
}

fn fem_stiffness(mesh: &Mesh, d: f64) -> Vec<Vec<f64>> {
    // -int D grad N_i . grad N_j, computed from vertex coordinates directly
    let n = mesh.nodes.len();
    let mut k = vec![vec![0.0; n]; n];
    for tri in &mesh.triangles {
        let p = tri.map(|v| mesh.nodes[v]);
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
        let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
        for i in 0..3 {
            for j in 0..3 {
                k[tri[i]][tri[j]] -= d * (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            }
        }
    }
    k
}

#[test]
fn control_volume_stiffness_equals_linear_fem() {
    let mesh = skewed_mesh();
    let cv = CvMesh::build(mesh.clone()).unwrap();
    let tags = RegionTags::uniform(&mesh);
    let k = stiffness(&cv, &tags, &MediumSpec::uniform(0.7, 1.0), None).to_dense();
    let f = fem_stiffness(&mesh, 0.7);
    for i in 0..k.len() {
        for j in 0..k.len() {
            assert!((k[i][j] - f[i][j]).abs() < 1e-12, "({i},{j}) {} vs {}", k[i][j], f[i][j]);
        }
    }
}

#[test]
fn row_sums_vanish_and_linear_fields_pass_patch_test() {
    let mesh = skewed_mesh();
    let cv = CvMesh::build(mesh.clone()).unwrap();
    let tags = tag_regions(&mesh, &Morphology::strip()).unwrap();
    let medium = MediumSpec::binary(Phase::new(10.0, 0.5), Phase::new(1.0, 0.8));
    for region in [Some(Region::Inclusion), Some(Region::Matrix), None] {
        let k = stiffness(&cv, &tags, &medium, region);
        assert!(k.row_sums().iter().all(|s| s.abs() < 1e-12));
        assert!(k.asymmetry() < 1e-12);
    }
    let k = stiffness(&cv, &tags, &MediumSpec::uniform(2.0, 1.0), None);
    let u: Vec<f64> = mesh.nodes.iter().map(|p| 0.3 + 1.7 * p[0] - 0.4 * p[1]).collect();
    let mut ku = vec![0.0; u.len()];
    k.mul_vec(&u, &mut ku);
    let boundary = cv.boundary_nodes();
    for (i, v) in ku.iter().enumerate() {
        if !boundary.contains(&i) {
            assert!(v.abs() < 1e-12, "node {i}: {v}");
        }
    }
}

#[test]
fn periodic_linear_field_is_steady() {
    let mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, 5, 4);
    let cv = CvMesh::build(mesh.clone()).unwrap();
    let tags = RegionTags::uniform(&mesh);
    let sys = assemble_binary(&cv, &tags, &MediumSpec::uniform(1.3, 1.0), Boundary::Periodic { jump: [1.0, 0.0] })
        .unwrap();
    assert_eq!(sys.num_unknowns(), 20);
    let nodal: Vec<f64> = mesh.nodes.iter().map(|p| p[0] + 2.0).collect();
    let u = sys.restrict(&nodal);
    assert!(sys.total_flux(&u).iter().all(|v| v.abs() < 1e-12));
    let back = sys.expand(&u);
    for (a, b) in back.iter().zip(&nodal) {
        assert!((a - b).abs() < 1e-14);
    }
    assert!((sys.mass.iter().sum::<f64>() - 1.0).abs() < 1e-14);
}

#[test]
fn every_part_conserves_mass() {
    let mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, 8, 6);
    let cv = CvMesh::build(mesh.clone()).unwrap();
    let tags = tag_regions(&mesh, &Morphology::strip()).unwrap();
    let medium = MediumSpec::binary(Phase::new(10.0, 0.5), Phase::new(1.0, 0.8));
    let sys = assemble_binary(&cv, &tags, &medium, Boundary::Periodic { jump: [1.0, 0.0] }).unwrap();
    assert_eq!(sys.parts.len(), 2);
    for p in &sys.parts {
        assert!(p.matrix.col_sums().iter().all(|s| s.abs() < 1e-12));
        assert!(p.load.iter().sum::<f64>().abs() < 1e-12);
    }
}

#[test]
fn classical_interface_mode_moves_shared_rows_to_integer_order() {
    let mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, 8, 4);
    let cv = CvMesh::build(mesh.clone()).unwrap();
    let tags = tag_regions(&mesh, &Morphology::strip()).unwrap();
    let medium =
        MediumSpec::binary(Phase::new(10.0, 0.5), Phase::new(1.0, 1.0)).with_interface(InterfaceMode::ClassicalFlux);
    let sys = assemble_binary(&cv, &tags, &medium, Boundary::Periodic { jump: [1.0, 0.0] }).unwrap();
    // interface rows merge with the classical matrix part
    assert_eq!(sys.parts.len(), 2);
    let frac = sys.parts.iter().find(|p| p.order == 0.5).unwrap();
    let rows = frac.matrix.row_support();
    // inclusion interior: one column of 4 distinct unknowns (x = 1/2)
    assert_eq!(rows.len(), 4);
    let total = CsrMatrix::linear_combination(&sys.parts.iter().map(|p| (1.0, &p.matrix)).collect::<Vec<_>>());
    let plain = assemble_binary(&cv, &tags, &medium.clone().with_interface(InterfaceMode::FractionalFlux), Boundary::Periodic { jump: [1.0, 0.0] }).unwrap();
    let total_plain =
        CsrMatrix::linear_combination(&plain.parts.iter().map(|p| (1.0, &p.matrix)).collect::<Vec<_>>());
    for (i, j, v) in total.triplets() {
        assert!((v - total_plain.get(i, j)).abs() < 1e-12);
    }
}

#[test]
fn bad_medium_is_rejected() {
    let mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2);
    let cv = CvMesh::build(mesh.clone()).unwrap();
    let tags = RegionTags::uniform(&mesh);
    let medium = MediumSpec::uniform(1.0, 1.5);
    assert!(matches!(assemble_binary(&cv, &tags, &medium, Boundary::Flux), Err(AssemblyError::Medium(_))));
    let medium = MediumSpec::uniform(-1.0, 1.0);
    assert!(assemble_binary(&cv, &tags, &medium, Boundary::Flux).is_err());
}
