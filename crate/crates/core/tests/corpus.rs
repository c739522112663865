//! Discretisation invariants on every mesh shipped in `meshes/`.

use std::path::PathBuf;

use subdiff_core::assembly::{assemble_binary, stiffness, Boundary, MediumSpec, Phase};
use subdiff_core::fracops::CorrectionSet;
use subdiff_core::mesh::{read_msh, tag_regions, CvMesh, Mesh, Morphology, RegionTags};
use subdiff_core::stepper::{StopRule, Stepper};

fn corpus() -> Vec<(String, Mesh)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../meshes");
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .expect("mesh corpus")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "msh").then_some(p)
        })
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, read_msh(&p).expect("readable mesh"))
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    assert!(out.len() >= 10, "corpus has {} meshes", out.len());
    out
}

fn morphology_of(name: &str) -> Option<Morphology> {
    let family = name.split('_').next()?;
    match family {
        "rect" => Some(Morphology::strip()),
        "circle" => Some(Morphology::disc()),
        "lshape" => Some(Morphology::l_shape()),
        "lumen" => Some(Morphology::Tagged { inclusion_tag: 1 }),
        _ => None,
    }
}

#[test]
fn cell_meshes_carry_both_phase_tags() {
    for (name, mesh) in corpus() {
        let Some(morphology) = morphology_of(&name) else { continue };
        let tags = tag_regions(&mesh, &Morphology::Tagged { inclusion_tag: 1 }).unwrap();
        let geometric = tag_regions(&mesh, &morphology).unwrap();
        assert!((tags.volume_fraction - geometric.volume_fraction).abs() < 1e-12, "{name}");
        assert!(tags.volume_fraction > 0.0 && tags.volume_fraction < 1.0, "{name}");
    }
}

#[test]
fn dual_volumes_and_basis_gradients_partition_unity() {
    for (name, mesh) in corpus() {
        let cv = CvMesh::build(mesh.clone()).unwrap();
        let b = mesh.bbox();
        let area = (b[2] - b[0]) * (b[3] - b[1]);
        assert!((cv.total_volume() - area).abs() < 1e-12 * area, "{name}");
        let tri_area: f64 = (0..mesh.triangles.len()).map(|t| mesh.triangle_area(t)).sum();
        assert!((tri_area - area).abs() < 1e-12 * area, "{name}");
        for g in &cv.gradients {
            let sx: f64 = g.iter().map(|v| v[0]).sum();
            let sy: f64 = g.iter().map(|v| v[1]).sum();
            assert!(sx.abs() < 1e-9 && sy.abs() < 1e-9, "{name}");
        }
    }
}

#[test]
fn stiffness_rows_sum_to_zero_and_pass_patch_test() {
    for (name, mesh) in corpus() {
        let cv = CvMesh::build(mesh.clone()).unwrap();
        let tags = match morphology_of(&name) {
            Some(m) => tag_regions(&mesh, &m).unwrap(),
            None => RegionTags::uniform(&mesh),
        };
        let medium = MediumSpec::binary(Phase::new(10.0, 0.5), Phase::new(1.0, 1.0));
        let k = stiffness(&cv, &tags, &medium, None);
        let scale = k.max_abs();
        assert!(k.row_sums().iter().all(|s| s.abs() < 1e-12 * scale), "{name}");
        assert!(k.asymmetry() < 1e-12 * scale, "{name}");

        let uniform = stiffness(&cv, &tags, &MediumSpec::uniform(1.0, 1.0), None);
        let u: Vec<f64> = mesh.nodes.iter().map(|p| 0.7 - 1.3 * p[0] + 2.1 * p[1]).collect();
        let mut ku = vec![0.0; u.len()];
        uniform.mul_vec(&u, &mut ku);
        let boundary = cv.boundary_nodes();
        let mut on_boundary = vec![false; u.len()];
        for i in boundary {
            on_boundary[i] = true;
        }
        for (i, v) in ku.iter().enumerate() {
            if !on_boundary[i] {
                assert!(v.abs() < 1e-10, "{name} node {i}: {v}");
            }
        }
    }
}

#[test]
fn periodic_runs_conserve_mass() {
    for (name, mesh) in corpus() {
        let Some(morphology) = morphology_of(&name) else { continue };
        let cv = CvMesh::build(mesh.clone()).unwrap();
        let tags = tag_regions(&mesh, &morphology).unwrap();
        let medium = MediumSpec::binary(Phase::new(10.0, 0.3), Phase::new(1.0, 0.7));
        let sys = assemble_binary(&cv, &tags, &medium, Boundary::Periodic { jump: [1.0, 0.0] }).unwrap();
        let nodal: Vec<f64> = mesh.nodes.iter().map(|p| 1.0 + p[0] + 0.5 * (6.0 * p[1]).sin()).collect();
        let u0 = sys.conserving_restrict(&nodal);
        let mass = sys.total_mass(&u0);
        let mut st = Stepper::new(&sys, 0.01, CorrectionSet::none(), u0).unwrap();
        let run = st.run_until(&StopRule::until(0.2), |_| vec![0.0]).unwrap();
        assert!(run.mass_drift <= 1e-9 * mass.abs(), "{name}: {}", run.mass_drift);
    }
}
