//! Semi-analytical solution of the three-layer fractional problem with a
//! periodic jump, via Laplace-domain interface fluxes and CF inversion.

mod cf;

pub use num_complex::Complex64;
use thiserror::Error;

pub use cf::CfRule;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid layered spec: {0}")]
    Spec(String),
    #[error("interface system singular at s = {s}")]
    Singular { s: Complex64 },
    #[error("CF construction failed: {0}")]
    Construction(String),
}

/// Three-layer slab with a periodic jump between its two ends.
///
/// Layer 0 and 2 are the outer medium and must share diffusivity and order.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredSpec {
    pub breakpoints: [f64; 4],
    pub diffusivity: [f64; 3],
    pub order: [f64; 3],
    pub jump: f64,
    /// Uniform initial value per layer.
    pub initial: [f64; 3],
}

impl LayeredSpec {
    /// Centred inclusion of width 1/4 in the unit cell, uniform initial value.
    pub fn strip(inner: (f64, f64), outer: (f64, f64), jump: f64, u0: f64) -> Self {
        Self {
            breakpoints: [0.0, 0.375, 0.625, 1.0],
            diffusivity: [outer.0, inner.0, outer.0],
            order: [outer.1, inner.1, outer.1],
            jump,
            initial: [u0; 3],
        }
    }

    pub fn width(&self, layer: usize) -> f64 {
        self.breakpoints[layer + 1] - self.breakpoints[layer]
    }

    pub fn length(&self) -> f64 {
        self.breakpoints[3] - self.breakpoints[0]
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        for i in 0..3 {
            if !(self.width(i) > 0.0) {
                return Err(OracleError::Spec(format!("layer {i} has non-positive width")));
            }
            if !(self.diffusivity[i] > 0.0 && self.diffusivity[i].is_finite()) {
                return Err(OracleError::Spec(format!("layer {i} diffusivity must be positive")));
            }
            if !(self.order[i] > 0.0 && self.order[i] <= 1.0) {
                return Err(OracleError::Spec(format!("layer {i} order must lie in (0, 1]")));
            }
        }
        if self.diffusivity[0] != self.diffusivity[2] || self.order[0] != self.order[2] {
            return Err(OracleError::Spec("outer layers must share diffusivity and order".into()));
        }
        if !self.jump.is_finite() || self.initial.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::Spec("jump and initial values must be finite".into()));
        }
        Ok(())
    }

    /// Length-weighted initial mean.
    pub fn initial_mean(&self) -> f64 {
        (0..3).map(|i| self.width(i) * self.initial[i]).sum::<f64>() / self.length()
    }
}

/// Neumann eigenpairs of one layer.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    pub start: f64,
    pub width: f64,
    pub eigenvalues: Vec<f64>,
}

impl Eigenbasis {
    pub fn new(start: f64, width: f64, modes: usize) -> Self {
        let eigenvalues = (0..=modes).map(|m| m as f64 * std::f64::consts::PI / width).collect();
        Self { start, width, eigenvalues }
    }

    pub fn function(&self, m: usize, x: f64) -> f64 {
        if m == 0 {
            1.0 / self.width.sqrt()
        } else {
            (2.0 / self.width).sqrt() * (self.eigenvalues[m] * (x - self.start)).cos()
        }
    }
}

/// Per-layer eigenbases truncated at `modes`.
pub fn eigenbasis(spec: &LayeredSpec, modes: usize) -> [Eigenbasis; 3] {
    std::array::from_fn(|i| Eigenbasis::new(spec.breakpoints[i], spec.width(i), modes))
}

/// How the layer resolvents are summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expansion {
    /// Closed-form Neumann resolvent (infinite mode sum).
    Closed,
    /// Eigenfunction sum truncated after the given number of modes.
    Modes(usize),
}

/// Laplace-domain interface fluxes `(v12, v13, v23)`.
pub type Fluxes = [Complex64; 3];

pub struct LayeredOracle {
    spec: LayeredSpec,
    expansion: Expansion,
    bases: Option<[Eigenbasis; 3]>,
    rule: &'static CfRule,
}

impl LayeredOracle {
    pub fn new(spec: LayeredSpec) -> Result<Self, OracleError> {
        Self::with_expansion(spec, Expansion::Closed)
    }

    pub fn with_expansion(spec: LayeredSpec, expansion: Expansion) -> Result<Self, OracleError> {
        spec.validate()?;
        let bases = match expansion {
            Expansion::Closed => None,
            Expansion::Modes(0) => return Err(OracleError::Domain("mode truncation must be at least 1".into())),
            Expansion::Modes(m) => Some(eigenbasis(&spec, m)),
        };
        Ok(Self { spec, expansion, bases, rule: CfRule::standard() })
    }

    pub fn spec(&self) -> &LayeredSpec {
        &self.spec
    }

    pub fn expansion(&self) -> Expansion {
        self.expansion
    }

    /// Resolvent of layer `i` between points `x` and `y`.
    fn resolvent(&self, i: usize, x: f64, y: f64, s: Complex64) -> Complex64 {
        let d = self.spec.diffusivity[i];
        let g = self.spec.order[i];
        let lead = d * s.powf(1.0 - g);
        match &self.bases {
            None => {
                let a = self.spec.breakpoints[i];
                let b = self.spec.breakpoints[i + 1];
                let width = b - a;
                let kappa = (s.powf(g) / d).sqrt();
                let near = x.min(y) - a;
                let far = b - x.max(y);
                let decay = |len: f64| (-2.0 * kappa * len).exp();
                let num = (kappa * (near + far - width)).exp() * (1.0 + decay(near)) * (1.0 + decay(far));
                num / (2.0 * lead * kappa * (1.0 - decay(width)))
            }
            Some(bases) => {
                let basis = &bases[i];
                basis
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(m, lam)| basis.function(m, x) * basis.function(m, y) / (s + lead * lam * lam))
                    .sum()
            }
        }
    }

    /// Solves the 3×3 interface system by Cramer's rule.
    pub fn interface_fluxes(&self, s: Complex64) -> Result<Fluxes, OracleError> {
        let [l0, l1, l2, l3] = self.spec.breakpoints;
        let h: [Complex64; 3] = std::array::from_fn(|i| self.spec.initial[i] / s);
        let g = |i, x, y| self.resolvent(i, x, y, s);
        let a = [
            [g(0, l1, l1) + g(1, l1, l1), -g(0, l1, l0), -g(1, l1, l2)],
            [-g(0, l0, l1), g(2, l3, l3) + g(0, l0, l0), -g(2, l3, l2)],
            [-g(1, l2, l1), -g(2, l2, l3), g(1, l2, l2) + g(2, l2, l2)],
        ];
        let rhs = [h[1] - h[0], self.spec.jump / s - h[2] + h[0], h[2] - h[1]];
        let det3 = |m: &[[Complex64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let det = det3(&a);
        let scale = a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        if !(det.norm() > 1e-300 && det.norm() > 1e-14 * scale.powi(3)) {
            return Err(OracleError::Singular { s });
        }
        Ok(std::array::from_fn(|col| {
            let mut m = a;
            for row in 0..3 {
                m[row][col] = rhs[row];
            }
            det3(&m) / det
        }))
    }

    /// Which layer holds `x` (left layer at interior breakpoints).
    pub fn layer_of(&self, x: f64) -> Result<usize, OracleError> {
        let [l0, l1, l2, l3] = self.spec.breakpoints;
        if !(x >= l0 && x <= l3) {
            return Err(OracleError::Domain(format!("x = {x} outside [{l0}, {l3}]")));
        }
        Ok(if x <= l1 {
            0
        } else if x <= l2 {
            1
        } else {
            2
        })
    }

    fn transform_in(&self, layer: usize, x: f64, s: Complex64, v: &Fluxes) -> Complex64 {
        let b = self.spec.breakpoints;
        let [v12, v13, v23] = *v;
        let h = self.spec.initial[layer] / s;
        let g = |y| self.resolvent(layer, x, y, s);
        match layer {
            0 => h + v12 * g(b[1]) - v13 * g(b[0]),
            1 => h + v23 * g(b[2]) - v12 * g(b[1]),
            _ => h + v13 * g(b[3]) - v23 * g(b[2]),
        }
    }

    /// Laplace transform of the solution at `x` in `layer`.
    pub fn transform(&self, layer: usize, x: f64, s: Complex64) -> Result<Complex64, OracleError> {
        let v = self.interface_fluxes(s)?;
        Ok(self.transform_in(layer, x, s, &v))
    }

    /// Solution in a given layer (allows both sides of an interface).
    pub fn evaluate_in(&self, layer: usize, x: f64, t: f64) -> Result<f64, OracleError> {
        Ok(self.profile_in(&[(layer, x)], t)?[0])
    }

    /// Solution at `x`, time `t`.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64, OracleError> {
        self.profile(&[x], t).map(|v| v[0])
    }

    /// Solution at many points sharing one set of flux solves.
    pub fn profile(&self, xs: &[f64], t: f64) -> Result<Vec<f64>, OracleError> {
        let at: Vec<(usize, f64)> = xs.iter().map(|&x| self.layer_of(x).map(|l| (l, x))).collect::<Result<_, _>>()?;
        self.profile_in(&at, t)
    }

    fn profile_in(&self, at: &[(usize, f64)], t: f64) -> Result<Vec<f64>, OracleError> {
        for &(layer, x) in at {
            let b = self.spec.breakpoints;
            if layer > 2 || x < b[layer] || x > b[layer + 1] {
                return Err(OracleError::Domain(format!("x = {x} not in layer {layer}")));
            }
        }
        let nodes = self.rule.nodes(t)?;
        let fluxes: Vec<Fluxes> = nodes.iter().map(|&s| self.interface_fluxes(s)).collect::<Result<_, _>>()?;
        Ok(at
            .iter()
            .map(|&(layer, x)| {
                let samples: Vec<_> =
                    nodes.iter().zip(&fluxes).map(|(&s, v)| self.transform_in(layer, x, s, v)).collect();
                self.rule.combine(t, &samples)
            })
            .collect())
    }

    /// Interface fluxes `(v12, v13, v23)` in the time domain.
    pub fn fluxes(&self, t: f64) -> Result<[f64; 3], OracleError> {
        let nodes = self.rule.nodes(t)?;
        let fluxes: Vec<Fluxes> = nodes.iter().map(|&s| self.interface_fluxes(s)).collect::<Result<_, _>>()?;
        Ok(std::array::from_fn(|k| {
            let samples: Vec<_> = fluxes.iter().map(|v| v[k]).collect();
            self.rule.combine(t, &samples)
        }))
    }

    /// Length-weighted mean from the zeroth Fourier coefficient of each layer.
    pub fn mass_balance(&self, t: f64) -> Result<f64, OracleError> {
        if t == 0.0 {
            return Ok(self.spec.initial_mean());
        }
        let nodes = self.rule.nodes(t)?;
        let b = self.spec.breakpoints;
        let samples: Vec<Complex64> = nodes
            .iter()
            .map(|&s| {
                let [v12, v13, v23] = self.interface_fluxes(s)?;
                let flux = [v12 - v13, v23 - v12, v13 - v23];
                Ok((0..3)
                    .map(|i| {
                        let root = (b[i + 1] - b[i]).sqrt();
                        let coef = (self.spec.initial[i] * root + flux[i] / root) / s;
                        coef * root
                    })
                    .sum::<Complex64>()
                    / self.spec.length())
            })
            .collect::<Result<_, OracleError>>()?;
        Ok(self.rule.combine(t, &samples))
    }
}

#[cfg(test)]
mod tests;
