use super::*;
use crate::assembly::{assemble_binary, Boundary, FluxPart, MediumSpec, Phase};
use crate::fracops::mittag_leffler;
use crate::mesh::{structured_rectangle, tag_regions, CvMesh, Morphology, NodeConstraints, RegionTags};

/// `u' = RD^{1-gamma}[-lambda u]`, solved by `E_gamma(-lambda t^gamma)`.
fn relaxation(lambda: f64, order: f64) -> SparseSystem {
    SparseSystem {
        constraints: NodeConstraints::identity(1),
        unknown_of_node: vec![0],
        node_of_unknown: vec![0],
        mass: vec![1.0],
        node_mass: vec![1.0],
        parts: vec![FluxPart {
            order,
            matrix: CsrMatrix::from_triplets(1, 1, &[(0, 0, -lambda)]),
            load: vec![0.0],
        }],
    }
}

fn error_at_one(order: f64, corrections: CorrectionSet, steps: usize) -> f64 {
    let sys = relaxation(1.0, order);
    let mut st = Stepper::new(&sys, 1.0 / steps as f64, corrections, vec![1.0]).unwrap();
    st.run_until(&StopRule::until(1.0), |_| Vec::new()).unwrap();
    let exact = mittag_leffler(order, 1.0, -1.0).unwrap();
    (st.current()[0] - exact).abs()
}

#[test]
fn corrected_scheme_is_second_order_on_scalar_relaxation() {
    for order in [0.5, 0.8] {
        let c = CorrectionSet::for_order(order).unwrap();
        let e1 = error_at_one(order, c.clone(), 64);
        let e2 = error_at_one(order, c, 128);
        let rate = (e1 / e2).log2();
        assert!(rate > 1.8, "order {order}: rate {rate} ({e1:e}, {e2:e})");
    }
}

#[test]
fn uncorrected_scheme_loses_order() {
    let e1 = error_at_one(0.5, CorrectionSet::none(), 64);
    let e2 = error_at_one(0.5, CorrectionSet::none(), 128);
    let rate = (e1 / e2).log2();
    assert!(rate < 1.5, "rate {rate}");
}

#[test]
fn integer_order_is_crank_nicolson() {
    let lambda = 3.0;
    let tau = 0.1;
    let sys = relaxation(lambda, 1.0);
    let mut st = Stepper::new(&sys, tau, CorrectionSet::none(), vec![1.0]).unwrap();
    let r = (1.0 - 0.5 * lambda * tau) / (1.0 + 0.5 * lambda * tau);
    for n in 1..=10 {
        st.step().unwrap();
        assert!((st.current()[0] - r.powi(n)).abs() < 1e-14);
    }
}

fn strip_system(gi: f64, gm: f64) -> (CvMesh, SparseSystem) {
    let mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, 8, 3);
    let cv = CvMesh::build(mesh.clone()).unwrap();
    let tags = tag_regions(&mesh, &Morphology::strip()).unwrap();
    let medium = MediumSpec::binary(Phase::new(10.0, gi), Phase::new(1.0, gm));
    let sys = assemble_binary(&cv, &tags, &medium, Boundary::Periodic { jump: [1.0, 0.0] }).unwrap();
    (cv, sys)
}

#[test]
fn stored_history_matches_recomputation_from_full_states() {
    let (_, sys) = strip_system(0.5, 0.8);
    let u0 = vec![1.0; sys.num_unknowns()];
    let mut st = Stepper::new(&sys, 0.01, CorrectionSet::none(), u0.clone()).unwrap();
    let mut states = vec![u0.clone()];
    for _ in 0..25 {
        st.step().unwrap();
        states.push(st.current().to_vec());
    }
    for p in 0..sys.parts.len() {
        let alpha = 1.0 - sys.parts[p].order;
        let n = 26;
        let d = crate::fracops::averaged_weights(alpha, n).unwrap();
        let support = st.part_support(p).to_vec();
        let stored = st.history_sum(p);
        for (idx, &j) in support.iter().enumerate() {
            let brute: f64 = (1..n).map(|k| d[n - k] * (states[k][j] - u0[j])).sum();
            assert!((brute - stored[idx]).abs() < 1e-13);
        }
    }
}

#[test]
fn periodic_run_conserves_mass() {
    let (_, sys) = strip_system(0.5, 0.8);
    let mut u0 = vec![1.0; sys.num_unknowns()];
    u0[3] = 2.0;
    let c = CorrectionSet::truncated(0.5, 2).unwrap();
    let mut st = Stepper::new(&sys, 0.01, c, u0).unwrap();
    let s = st.run_until(&StopRule::until(0.5), |_| Vec::new()).unwrap();
    assert_eq!(s.steps, 50);
    assert!(s.mass_drift < 1e-12, "{}", s.mass_drift);
}

#[test]
fn classical_periodic_run_reaches_linear_steady_state() {
    let mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, 6, 2);
    let cv = CvMesh::build(mesh.clone()).unwrap();
    let tags = RegionTags::uniform(&mesh);
    let sys = assemble_binary(&cv, &tags, &MediumSpec::uniform(1.0, 1.0), Boundary::Periodic { jump: [1.0, 0.0] })
        .unwrap();
    let u0 = vec![0.0; sys.num_unknowns()];
    let mut st = Stepper::new(&sys, 0.05, CorrectionSet::none(), u0).unwrap();
    let s = st.run_until(&StopRule::steady(SteadyRule::default(), 100_000), |_| Vec::new()).unwrap();
    assert!(s.steady);
    let flux = sys.total_flux(st.current());
    assert!(flux.iter().all(|v| v.abs() < 1e-6));
}

#[test]
fn bad_setup_is_rejected() {
    let sys = relaxation(1.0, 0.5);
    assert!(Stepper::new(&sys, 0.0, CorrectionSet::none(), vec![1.0]).is_err());
    assert!(Stepper::new(&sys, 0.1, CorrectionSet::none(), vec![1.0, 2.0]).is_err());
}

#[test]
fn coarse_steps_keep_mass_to_rounding() {
    let (_, sys) = strip_system(0.3, 1.0);
    let nodal: Vec<f64> = (0..sys.constraints.len()).map(|i| 1.0 + 0.1 * i as f64).collect();
    let u0 = sys.conserving_restrict(&nodal);
    let mut st = Stepper::new(&sys, 50.0, CorrectionSet::none(), u0).unwrap();
    let s = st.run_until(&StopRule::until(50.0 * 400.0), |_| Vec::new()).unwrap();
    assert!(s.mass_drift < 1e-13, "{:e}", s.mass_drift);
}

#[test]
fn many_corrections_keep_mass() {
    let (_, sys) = strip_system(0.2, 0.2);
    let u0 = sys.conserving_restrict(&vec![1.0; sys.constraints.len()]);
    let set = CorrectionSet::for_order(0.2).unwrap();
    assert!(set.len() >= 9);
    let mass = sys.total_mass(&u0);
    let mut st = Stepper::new(&sys, 1e-3, set, u0).unwrap();
    let s = st.run_until(&StopRule::until(0.05), |_| Vec::new()).unwrap();
    assert!(s.mass_drift < 1e-12 * mass, "{:e}", s.mass_drift);
}
