//! Scenario drivers shared by the command-line tool and the test suites.

use thiserror::Error;

use crate::assembly::{assemble_binary, AssemblyError, Boundary, InterfaceMode, MediumSpec, Phase};
use crate::fracops::{mittag_leffler, CorrectionSet, FracError};
use crate::layered::{LayeredOracle, LayeredSpec, OracleError};
use crate::mesh::{tag_regions, CvMesh, Mesh, MeshError, Morphology, RegionTags};
use crate::stepper::{RunSummary, StepError, Stepper, StopRule};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Setup(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub nodes: usize,
    pub error: f64,
    /// `log(e_prev / e) / log(h_prev / h)`.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub order: f64,
    pub corrections: usize,
    pub tau: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Least-squares slope of `log e` against `log h`.
    pub fn fitted_order(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.h.ln(), r.error.ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }
}

/// Subdiffusion test problem on the unit square with `Q = I/2`:
/// `u(x, y, t) = E_gamma(-t^gamma) sin x sin y`, driven through the boundary
/// flux `RD^{1-gamma}[Q grad u] = t^{gamma-1} E_{gamma,gamma}(-t^gamma) (cos x sin y, sin x cos y) / 2`.
pub fn manufactured_error(
    mesh: &Mesh,
    order: f64,
    corrections: &CorrectionSet,
    tau: f64,
    t_final: f64,
) -> Result<f64, StudyError> {
    let cv = CvMesh::build(mesh.clone())?;
    let tags = RegionTags::uniform(mesh);
    let sys = assemble_binary(&cv, &tags, &MediumSpec::uniform(0.5, order), Boundary::Flux)?;
    let shape = cv.boundary_flux(|x, y| [0.5 * x.cos() * y.sin(), 0.5 * x.sin() * y.cos()], |_, _| true);
    let u0: Vec<f64> = mesh.nodes.iter().map(|p| p[0].sin() * p[1].sin()).collect();
    let amplitude = move |t: f64| -> f64 {
        t.powf(order - 1.0) * mittag_leffler(order, order, -t.powf(order)).expect("argument in range")
    };
    let mut st = Stepper::new(&sys, tau, corrections.clone(), u0)?
        .with_forcing(|t| shape.iter().map(|v| v * amplitude(t)).collect());
    st.run_until(&StopRule::until(t_final), |_| vec![0.0])?;
    let decay = mittag_leffler(order, 1.0, -t_final.powf(order))?;
    let err = mesh
        .nodes
        .iter()
        .zip(st.current())
        .map(|(p, u)| (u - decay * p[0].sin() * p[1].sin()).abs())
        .fold(0.0, f64::max);
    Ok(err)
}

/// Error table over a mesh sequence (coarse to fine).
pub fn convergence_study(
    meshes: &[Mesh],
    order: f64,
    corrections: &CorrectionSet,
    tau: f64,
    t_final: f64,
) -> Result<ConvergenceStudy, StudyError> {
    if meshes.is_empty() {
        return Err(StudyError::Setup("no meshes given".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for mesh in meshes {
        let h = mesh.max_edge();
        let error = manufactured_error(mesh, order, corrections, tau, t_final)?;
        let order = rows.last().map(|p| (p.error / error).ln() / (p.h / h).ln());
        rows.push(ConvergenceRow { h, nodes: mesh.nodes.len(), error, order });
    }
    Ok(ConvergenceStudy { order, corrections: corrections.len(), tau, rows })
}

/// Two-phase strip cell with a unit-cell jump in `x`, compared along a
/// horizontal probe line.
#[derive(Debug, Clone, PartialEq)]
pub struct StripCase {
    /// Inclusion diffusivity and order.
    pub inclusion: (f64, f64),
    /// Matrix diffusivity and order.
    pub matrix: (f64, f64),
    pub jump: f64,
    pub u0: f64,
    pub tau: f64,
    pub t_final: f64,
    pub interface: InterfaceMode,
    pub corrections: CorrectionSet,
    pub probe_y: f64,
}

impl StripCase {
    /// Strip with `D = 10` in the inclusion and `D = 1` in the matrix, unit jump,
    /// `u0 = 1`, `tau = 1e-3`, `t = 1`. Starting corrections
    /// follow the matrix order, the phase carrying the periodic jump.
    pub fn reference(gamma_inclusion: f64, gamma_matrix: f64) -> Self {
        let corrections = CorrectionSet::for_orders(&[gamma_matrix]).unwrap_or_else(|_| CorrectionSet::none());
        Self {
            inclusion: (10.0, gamma_inclusion),
            matrix: (1.0, gamma_matrix),
            jump: 1.0,
            u0: 1.0,
            tau: 1e-3,
            t_final: 1.0,
            interface: InterfaceMode::FractionalFlux,
            corrections,
            probe_y: 0.5,
        }
    }

    pub fn layered_spec(&self) -> LayeredSpec {
        LayeredSpec::strip(self.inclusion, self.matrix, self.jump, self.u0)
    }
}

/// Solution along the probe line.
#[derive(Debug, Clone, PartialEq)]
pub struct StripProfile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// Volume-weighted nodal mean at the final time.
    pub mean: f64,
    pub run: RunSummary,
}

/// Nodes on the line `y = probe`, ordered by `x`.
pub fn probe_nodes(mesh: &Mesh, probe: f64) -> Vec<usize> {
    let b = mesh.bbox();
    let tol = 1e-9 * (b[3] - b[1]);
    let mut idx: Vec<usize> = (0..mesh.nodes.len()).filter(|&i| (mesh.nodes[i][1] - probe).abs() <= tol).collect();
    idx.sort_by(|&a, &b| mesh.nodes[a][0].total_cmp(&mesh.nodes[b][0]));
    idx
}

/// Runs the strip cell with the finite-volume solver.
pub fn strip_profile(mesh: &Mesh, case: &StripCase) -> Result<StripProfile, StudyError> {
    let mut all = strip_profiles(mesh, case, &[case.t_final])?;
    Ok(all.pop().expect("one snapshot"))
}

/// Probe-line snapshots at increasing `times` (the case's `t_final` is ignored).
pub fn strip_profiles(mesh: &Mesh, case: &StripCase, times: &[f64]) -> Result<Vec<StripProfile>, StudyError> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] <= 0.0 {
        return Err(StudyError::Setup(format!("output times must be positive and increasing: {times:?}")));
    }
    let line = probe_nodes(mesh, case.probe_y);
    if line.len() < 2 {
        return Err(StudyError::Setup(format!("mesh has no nodes on the probe line y = {}", case.probe_y)));
    }
    let cv = CvMesh::build(mesh.clone())?;
    let tags = tag_regions(mesh, &Morphology::strip())?;
    let medium = MediumSpec::binary(
        Phase::new(case.inclusion.0, case.inclusion.1),
        Phase::new(case.matrix.0, case.matrix.1),
    )
    .with_interface(case.interface);
    let sys = assemble_binary(&cv, &tags, &medium, Boundary::Periodic { jump: [case.jump, 0.0] })?;
    let u0 = sys.conserving_restrict(&vec![case.u0; mesh.nodes.len()]);
    let mut st = Stepper::new(&sys, case.tau, case.corrections.clone(), u0)?;
    let x: Vec<f64> = line.iter().map(|&i| mesh.nodes[i][0]).collect();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let run = st.run_until(&StopRule::until(t), |_| vec![0.0])?;
        let nodal = sys.expand(st.current());
        out.push(StripProfile {
            x: x.clone(),
            values: line.iter().map(|&i| nodal[i]).collect(),
            mean: nodal_mean(&sys.node_mass, &nodal),
            run,
        });
    }
    Ok(out)
}

fn nodal_mean(mass: &[f64], nodal: &[f64]) -> f64 {
    mass.iter().zip(nodal).map(|(m, v)| m * v).sum::<f64>() / mass.iter().sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StripComparison {
    pub profile: StripProfile,
    pub reference: Vec<f64>,
    pub max_gap: f64,
}

/// Finite-volume strip run against the semi-analytical layered solution.
pub fn strip_vs_oracle(mesh: &Mesh, case: &StripCase) -> Result<StripComparison, StudyError> {
    if case.interface != InterfaceMode::FractionalFlux {
        return Err(StudyError::Setup("the layered oracle covers the fractional-flux interface only".into()));
    }
    let profile = strip_profile(mesh, case)?;
    let oracle = LayeredOracle::new(case.layered_spec())?;
    let reference = oracle.profile(&profile.x, profile.run.time)?;
    let max_gap = profile.values.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(StripComparison { profile, reference, max_gap })
}

/// Largest relative difference between two profiles on the same nodes.
pub fn profile_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Classical-flux interface run against the all-classical steady profile.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceModeComparison {
    pub classical_flux: StripProfile,
    pub classical: StripProfile,
    /// Relative max gap between the two probe profiles.
    pub gap: f64,
}

/// Runs the strip with a fractional inclusion of order `gamma_inclusion`,
/// classical matrix and classical-flux interface, and compares it with the
/// steady `gamma = 1` profile.
pub fn interface_mode_comparison(
    mesh: &Mesh,
    gamma_inclusion: f64,
    tau: f64,
    t_final: f64,
) -> Result<InterfaceModeComparison, StudyError> {
    let classical = strip_profile(mesh, &StripCase { tau: 1e-2, t_final: 50.0, ..StripCase::reference(1.0, 1.0) })?;
    let case = StripCase {
        tau,
        t_final,
        interface: InterfaceMode::ClassicalFlux,
        ..StripCase::reference(gamma_inclusion, 1.0)
    };
    let classical_flux = strip_profile(mesh, &case)?;
    let gap = profile_gap(&classical_flux.values, &classical.values);
    Ok(InterfaceModeComparison { classical_flux, classical, gap })
}
