use std::fmt;
use std::sync::Arc;

use super::AssemblyError;
use crate::mesh::Region;

type Field = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

/// Diagonal conductivity `diag(q1, q2)`, possibly varying in space.
#[derive(Clone)]
pub enum Conductivity {
    Isotropic(f64),
    Diagonal(f64, f64),
    Field(Field),
}

impl Conductivity {
    pub fn field(f: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Conductivity::Field(Arc::new(f))
    }

    pub fn at(&self, x: f64, y: f64) -> [f64; 2] {
        match self {
            Conductivity::Isotropic(d) => [*d, *d],
            Conductivity::Diagonal(a, b) => [*a, *b],
            Conductivity::Field(f) => f(x, y),
        }
    }
}

impl fmt::Debug for Conductivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conductivity::Isotropic(d) => write!(f, "Isotropic({d})"),
            Conductivity::Diagonal(a, b) => write!(f, "Diagonal({a}, {b})"),
            Conductivity::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Material data of one phase.
#[derive(Debug, Clone)]
pub struct Phase {
    pub conductivity: Conductivity,
    /// Time order `gamma` in (0, 1]; 1 means no memory.
    pub order: f64,
    /// Storage coefficient multiplying `du/dt`.
    pub capacity: f64,
}

impl Phase {
    pub fn new(diffusivity: f64, order: f64) -> Self {
        Self { conductivity: Conductivity::Isotropic(diffusivity), order, capacity: 1.0 }
    }
}

/// Coupling condition at the phase interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceMode {
    /// Fractional fluxes `RD^{1-gamma_i}(D_i du/dn)` are continuous.
    FractionalFlux,
    /// Plain fluxes `D_i du/dn` are continuous; interface rows carry no memory.
    ClassicalFlux,
}

#[derive(Debug, Clone)]
pub struct MediumSpec {
    pub inclusion: Phase,
    pub matrix: Phase,
    pub interface: InterfaceMode,
}

impl MediumSpec {
    pub fn uniform(diffusivity: f64, order: f64) -> Self {
        Self {
            inclusion: Phase::new(diffusivity, order),
            matrix: Phase::new(diffusivity, order),
            interface: InterfaceMode::FractionalFlux,
        }
    }

    pub fn binary(inclusion: Phase, matrix: Phase) -> Self {
        Self { inclusion, matrix, interface: InterfaceMode::FractionalFlux }
    }

    pub fn with_interface(mut self, mode: InterfaceMode) -> Self {
        self.interface = mode;
        self
    }

    pub fn phase(&self, r: Region) -> &Phase {
        match r {
            Region::Inclusion => &self.inclusion,
            Region::Matrix => &self.matrix,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), AssemblyError> {
        for (name, p) in [("inclusion", &self.inclusion), ("matrix", &self.matrix)] {
            if !(p.order > 0.0 && p.order <= 1.0) {
                return Err(AssemblyError::Medium(format!("{name} order {} outside (0, 1]", p.order)));
            }
            if !(p.capacity > 0.0 && p.capacity.is_finite()) {
                return Err(AssemblyError::Medium(format!("{name} capacity must be positive")));
            }
            match &p.conductivity {
                Conductivity::Isotropic(d) if !(*d > 0.0 && d.is_finite()) => {
                    return Err(AssemblyError::Medium(format!("{name} diffusivity must be positive")))
                }
                Conductivity::Diagonal(a, b) if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) => {
                    return Err(AssemblyError::Medium(format!("{name} diffusivities must be positive")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
