//! Wood-cell scenario: lumen (vapour) and solid (bound water) phases reduced
//! to one linear diffusion problem about an operating point.

use super::{run_cell_problem, CellProblemSpec, CellStop, Directions, EffectiveTensorSeries, HomogenizeError};
use crate::assembly::{Conductivity, MediumSpec, Phase};
use crate::fracops::CorrectionSet;
use crate::mesh::{Mesh, Morphology};

/// Material constants at the operating point; [`WoodConstants::resolve`]
/// reports the missing ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WoodConstants {
    /// Dry solid density `rho_s`.
    pub solid_density: Option<f64>,
    /// Bound-water diffusivity `D_b`.
    pub bound_diffusivity: Option<f64>,
    /// Vapour diffusivity in air `D_v`.
    pub vapour_diffusivity: Option<f64>,
    /// Vapour mass fraction `omega_v` in the lumen.
    pub vapour_fraction: Option<f64>,
    /// Slope `d rho_v / dX` of the vapour density against moisture content.
    pub vapour_density_slope: Option<f64>,
}

/// Resolved per-phase coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WoodCoefficients {
    pub solid_capacity: f64,
    pub solid_conductivity: f64,
    pub lumen_capacity: f64,
    pub lumen_conductivity: f64,
    pub vapour_diffusivity: f64,
}

impl WoodConstants {
    pub fn resolve(&self) -> Result<WoodCoefficients, HomogenizeError> {
        let fields = [
            ("solid_density", self.solid_density),
            ("bound_diffusivity", self.bound_diffusivity),
            ("vapour_diffusivity", self.vapour_diffusivity),
            ("vapour_fraction", self.vapour_fraction),
            ("vapour_density_slope", self.vapour_density_slope),
        ];
        let missing: Vec<&str> = fields.iter().filter(|(_, v)| v.is_none()).map(|(n, _)| *n).collect();
        if !missing.is_empty() {
            return Err(HomogenizeError::Config(missing.join(", ")));
        }
        let [rho_s, d_b, d_v, omega, slope] = fields.map(|(_, v)| v.unwrap_or_default());
        let bad: Vec<&str> = [
            ("solid_density", rho_s > 0.0),
            ("bound_diffusivity", d_b > 0.0),
            ("vapour_diffusivity", d_v > 0.0),
            ("vapour_fraction", (0.0..1.0).contains(&omega)),
            ("vapour_density_slope", slope > 0.0),
        ]
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
        if !bad.is_empty() {
            return Err(HomogenizeError::Config(bad.join(", ")));
        }
        Ok(WoodCoefficients {
            solid_capacity: rho_s,
            solid_conductivity: rho_s * d_b,
            lumen_capacity: slope,
            lumen_conductivity: d_v / (1.0 - omega) * slope,
            vapour_diffusivity: d_v,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WoodScenario {
    pub constants: WoodConstants,
    /// Imposed moisture gradients `(dX/dx, dX/dy)`.
    pub gradient: [f64; 2],
    /// Time order of the solid phase; 1 means no memory.
    pub solid_order: f64,
    /// Surface tag of the lumen triangles.
    pub lumen_tag: i32,
    pub tau: f64,
    pub stop: CellStop,
}

impl WoodScenario {
    pub fn medium(&self) -> Result<MediumSpec, HomogenizeError> {
        let c = self.constants.resolve()?;
        let lumen = Phase { conductivity: Conductivity::Isotropic(c.lumen_conductivity), order: 1.0, capacity: c.lumen_capacity };
        let solid = Phase {
            conductivity: Conductivity::Isotropic(c.solid_conductivity),
            order: self.solid_order,
            capacity: c.solid_capacity,
        };
        Ok(MediumSpec::binary(lumen, solid))
    }
}

/// Effective tensor series of a tagged wood cell, scaled by `D_v`.
pub fn wood_cell_run(mesh: &Mesh, scenario: &WoodScenario) -> Result<EffectiveTensorSeries, HomogenizeError> {
    let coeffs = scenario.constants.resolve()?;
    let spec = CellProblemSpec {
        morphology: Morphology::Tagged { inclusion_tag: scenario.lumen_tag },
        medium: scenario.medium()?,
        directions: Directions::Both,
        initial: 0.0,
        gradient: scenario.gradient,
        tau: scenario.tau,
        corrections: CorrectionSet::none(),
        stop: scenario.stop,
        outputs_per_decade: 10,
    };
    let mut series = run_cell_problem(mesh, &spec)?;
    let scale = 1.0 / coeffs.vapour_diffusivity;
    for t in series.tensors.iter_mut().chain(std::iter::once(&mut series.final_tensor)) {
        for row in t.iter_mut() {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
    }
    series.bounds = (series.bounds.0 * scale, series.bounds.1 * scale);
    Ok(series)
}
