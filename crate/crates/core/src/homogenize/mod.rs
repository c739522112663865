//! Unit-cell problems with quasi-periodic forcing and the effective
//! diffusivity tensor extracted from them.

mod wood;

pub use wood::{wood_cell_run, WoodConstants, WoodScenario};

use thiserror::Error;

use crate::assembly::{assemble_binary, AssemblyError, Boundary, InterfaceMode, MediumSpec, SparseSystem};
use crate::fracops::{CorrectionSet, FracError};
use crate::mesh::{tag_regions, CvMesh, Mesh, MeshError, Morphology, RegionTags};
use crate::stepper::{StepError, Stepper, SteadyRule};

#[derive(Debug, Error)]
pub enum HomogenizeError {
    #[error("{0}")]
    Domain(String),
    #[error("incomplete input: {0}")]
    Incomplete(String),
    #[error("configuration error: missing or invalid {0}")]
    Config(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Frac(#[from] FracError),
}

/// `[[D_bx, D_bxy], [D_byx, D_by]]`; column `j` comes from the `j`-forced cell problem.
pub type Tensor = [[f64; 2]; 2];

/// Harmonic (series) and arithmetic (parallel) averages `(K1, K2)`.
pub fn bounds(eps1: f64, d1: f64, d2: f64) -> Result<(f64, f64), HomogenizeError> {
    if !(0.0..=1.0).contains(&eps1) {
        return Err(HomogenizeError::Domain(format!("volume fraction {eps1} outside [0, 1]")));
    }
    if !(d1 > 0.0 && d2 > 0.0 && d1.is_finite() && d2.is_finite()) {
        return Err(HomogenizeError::Domain(format!("diffusivities must be positive, got {d1} and {d2}")));
    }
    let eps2 = 1.0 - eps1;
    Ok((1.0 / (eps1 / d1 + eps2 / d2), eps1 * d1 + eps2 * d2))
}

/// Which cell problems to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directions {
    X,
    Y,
    Both,
}

impl Directions {
    pub fn includes(self, axis: usize) -> bool {
        matches!((self, axis), (Directions::Both, _) | (Directions::X, 0) | (Directions::Y, 1))
    }
}

/// Area average of `D grad(phi)` over the cell, with `phi` given per node.
/// Gradients are constant on each triangle.
pub fn flux_average(cv: &CvMesh, tags: &RegionTags, medium: &MediumSpec, phi: &[f64]) -> [f64; 2] {
    let mesh = &cv.mesh;
    let mut acc = [0.0; 2];
    let mut area = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.triangle_area(t);
        let g = &cv.gradients[t];
        let mut grad = [0.0; 2];
        for (k, &node) in tri.iter().enumerate() {
            grad[0] += g[k][0] * phi[node];
            grad[1] += g[k][1] * phi[node];
        }
        let c = mesh.barycenter(t);
        let d = medium.phase(tags.triangle_region[t]).conductivity.at(c[0], c[1]);
        acc[0] += a * d[0] * grad[0];
        acc[1] += a * d[1] * grad[1];
        area += a;
    }
    [acc[0] / area, acc[1] / area]
}

/// Tensor from the x- and y-forced nodal fields. Columns of directions not
/// requested are NaN.
pub fn effective_tensor(
    cv: &CvMesh,
    tags: &RegionTags,
    medium: &MediumSpec,
    fields: [Option<&[f64]>; 2],
    directions: Directions,
) -> Result<Tensor, HomogenizeError> {
    let mut tensor = [[f64::NAN; 2]; 2];
    for (j, field) in fields.iter().enumerate() {
        if !directions.includes(j) {
            continue;
        }
        let phi = field.ok_or_else(|| {
            HomogenizeError::Incomplete(format!("no {}-forced cell solution", ["x", "y"][j]))
        })?;
        if phi.len() != cv.num_nodes() {
            return Err(HomogenizeError::Incomplete(format!(
                "cell solution has {} values for {} nodes",
                phi.len(),
                cv.num_nodes()
            )));
        }
        let col = flux_average(cv, tags, medium, phi);
        tensor[0][j] = col[0];
        tensor[1][j] = col[1];
    }
    Ok(tensor)
}

/// When to stop a cell run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStop {
    /// Steady when the relative tensor change per step stays below `tol`
    /// for `window` steps.
    pub steady: Option<SteadyRule>,
    pub t_final: Option<f64>,
    pub max_steps: usize,
}

impl CellStop {
    pub fn steady(max_steps: usize) -> Self {
        Self { steady: Some(SteadyRule::default()), t_final: None, max_steps }
    }

    pub fn until(t_final: f64) -> Self {
        Self { steady: None, t_final: Some(t_final), max_steps: usize::MAX }
    }
}

#[derive(Debug, Clone)]
pub struct CellProblemSpec {
    pub morphology: Morphology,
    pub medium: MediumSpec,
    pub directions: Directions,
    /// Constant added to the linear initial field `y_j`.
    pub initial: f64,
    /// Macroscopic gradient imposed in each direction (cell offsets).
    pub gradient: [f64; 2],
    pub tau: f64,
    pub corrections: CorrectionSet,
    pub stop: CellStop,
    /// Records per decade of time in the output series.
    pub outputs_per_decade: usize,
}

impl CellProblemSpec {
    /// Unit gradients, `u0 = 1`, no starting corrections, run to steady state.
    pub fn new(morphology: Morphology, medium: MediumSpec, tau: f64) -> Self {
        Self {
            morphology,
            medium,
            directions: Directions::Both,
            initial: 1.0,
            gradient: [1.0, 1.0],
            tau,
            corrections: CorrectionSet::none(),
            stop: CellStop::steady(1_000_000),
            outputs_per_decade: 10,
        }
    }

    fn validate(&self) -> Result<(), HomogenizeError> {
        if self.medium.interface != InterfaceMode::FractionalFlux {
            return Err(HomogenizeError::Domain("cell problems use the fractional-flux interface".into()));
        }
        for j in 0..2 {
            if self.directions.includes(j) && !(self.gradient[j] != 0.0 && self.gradient[j].is_finite()) {
                return Err(HomogenizeError::Domain(format!("forcing gradient {} must be nonzero", self.gradient[j])));
            }
        }
        if self.stop.steady.is_none() && self.stop.t_final.is_none() && self.stop.max_steps == usize::MAX {
            return Err(HomogenizeError::Domain("cell run has no stopping criterion".into()));
        }
        Ok(())
    }
}

/// Time history of the effective tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTensorSeries {
    pub times: Vec<f64>,
    pub tensors: Vec<Tensor>,
    /// Harmonic and arithmetic averages of the diagonal conductivities.
    pub bounds: (f64, f64),
    pub inclusion_fraction: f64,
    pub steady: bool,
    pub steps: usize,
    pub final_tensor: Tensor,
    /// Largest relative mass drift over the forced runs.
    pub mass_drift: f64,
    /// Nodal cell solutions at the final time, per direction.
    pub fields: [Option<Vec<f64>>; 2],
}

struct CellRun<'a> {
    sys: &'a SparseSystem,
    stepper: Stepper<'a>,
    mass_scale: f64,
}

impl CellRun<'_> {
    /// Nodal field at the last half step, `(u^n + u^{n-1}) / 2`.
    fn midpoint(&self, scale: f64) -> Vec<f64> {
        let a = self.sys.expand(self.stepper.current());
        let b = self.sys.expand(self.stepper.previous());
        a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y) / scale).collect()
    }
}

/// Solve the requested cell problems on `mesh` until the stop rule is met.
pub fn run_cell_problem(mesh: &Mesh, spec: &CellProblemSpec) -> Result<EffectiveTensorSeries, HomogenizeError> {
    spec.validate()?;
    let cv = CvMesh::build(mesh.clone())?;
    let tags = tag_regions(mesh, &spec.morphology)?;
    let [lx, ly] = cell_lengths(mesh);
    let mut systems: [Option<SparseSystem>; 2] = [None, None];
    for (j, slot) in systems.iter_mut().enumerate() {
        if spec.directions.includes(j) {
            let mut jump = [0.0; 2];
            jump[j] = spec.gradient[j] * [lx, ly][j];
            *slot = Some(assemble_binary(&cv, &tags, &spec.medium, Boundary::Periodic { jump })?);
        }
    }
    let origin = mesh.bbox();
    let mut runs: Vec<(usize, CellRun)> = Vec::new();
    for (j, sys) in systems.iter().enumerate() {
        let Some(sys) = sys else { continue };
        let nodal: Vec<f64> = mesh
            .nodes
            .iter()
            .map(|p| spec.gradient[j] * (p[j] - origin[j]) + spec.initial)
            .collect();
        let u0 = sys.conserving_restrict(&nodal);
        let mass_scale = sys.total_mass(&u0.iter().map(|v| v.abs()).collect::<Vec<_>>()).max(f64::MIN_POSITIVE);
        let stepper = Stepper::new(sys, spec.tau, spec.corrections.clone(), u0)?;
        runs.push((j, CellRun { sys, stepper, mass_scale }));
    }

    let bounds = diagonal_bounds(&tags, &spec.medium)?;
    let tensor_now = |runs: &[(usize, CellRun)]| -> Result<Tensor, HomogenizeError> {
        let mut fields: [Option<Vec<f64>>; 2] = [None, None];
        for (j, r) in runs {
            fields[*j] = Some(r.midpoint(spec.gradient[*j]));
        }
        effective_tensor(&cv, &tags, &spec.medium, [fields[0].as_deref(), fields[1].as_deref()], spec.directions)
    };

    let mut times = Vec::new();
    let mut tensors = Vec::new();
    let mut next_output = spec.tau;
    let ratio = 10f64.powf(1.0 / spec.outputs_per_decade.max(1) as f64);
    let mut last: Option<Tensor> = None;
    let mut quiet = 0usize;
    let mut steps = 0usize;
    let mut steady = false;
    let mut drift: f64 = 0.0;
    let mut current = [[f64::NAN; 2]; 2];
    loop {
        let time = runs[0].1.stepper.time();
        if let Some(tf) = spec.stop.t_final {
            if time >= tf - 1e-9 * spec.tau {
                break;
            }
        }
        if steps >= spec.stop.max_steps {
            break;
        }
        let before = runs[0].1.stepper.level();
        for (_, r) in runs.iter_mut() {
            r.stepper.step()?;
            drift = drift.max(r.stepper.mass_drift() / r.mass_scale);
        }
        steps += runs[0].1.stepper.level() - before;
        current = tensor_now(&runs)?;
        let time = runs[0].1.stepper.time();
        if time >= next_output * (1.0 - 1e-12) {
            times.push(time);
            tensors.push(current);
            while next_output <= time * (1.0 + 1e-12) {
                next_output *= ratio;
            }
        }
        if let (Some(rule), Some(prev)) = (spec.stop.steady, last) {
            if tensor_change(&prev, &current) < rule.tol {
                quiet += 1;
                if quiet >= rule.window {
                    steady = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        last = Some(current);
    }
    let final_time = runs[0].1.stepper.time();
    if times.last() != Some(&final_time) && steps > 0 {
        times.push(final_time);
        tensors.push(current);
    }
    let mut fields: [Option<Vec<f64>>; 2] = [None, None];
    for (j, r) in &runs {
        fields[*j] = Some(r.sys.expand(r.stepper.current()));
    }
    Ok(EffectiveTensorSeries {
        times,
        tensors,
        bounds,
        inclusion_fraction: tags.volume_fraction,
        steady,
        steps,
        final_tensor: current,
        mass_drift: drift,
        fields,
    })
}

fn cell_lengths(mesh: &Mesh) -> [f64; 2] {
    let b = mesh.bbox();
    [b[2] - b[0], b[3] - b[1]]
}

/// Bounds from the phases' x-conductivities at the cell centre.
fn diagonal_bounds(tags: &RegionTags, medium: &MediumSpec) -> Result<(f64, f64), HomogenizeError> {
    let d1 = medium.inclusion.conductivity.at(0.5, 0.5)[0];
    let d2 = medium.matrix.conductivity.at(0.5, 0.5)[0];
    if tags.volume_fraction == 0.0 {
        return Ok((d2, d2));
    }
    bounds(tags.volume_fraction, d1, d2)
}

/// Largest entry change relative to the largest entry, over finite entries.
pub fn tensor_change(a: &Tensor, b: &Tensor) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            if b[i][j].is_finite() && a[i][j].is_finite() {
                diff = diff.max((a[i][j] - b[i][j]).abs());
                scale = scale.max(b[i][j].abs());
            }
        }
    }
    diff / scale.max(f64::MIN_POSITIVE)
}
