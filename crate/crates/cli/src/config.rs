//! Scenario configuration: one TOML file with a block per command, plus
//! flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub layered: LayeredConfig,
    #[serde(default)]
    pub homogenize: HomogenizeConfig,
    #[serde(default)]
    pub wood: WoodConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub gamma: f64,
    /// Number of correction terms; the smallest m with (m+1) gamma >= 2 when absent.
    pub m: Option<usize>,
    pub tau: f64,
    pub t_final: f64,
    pub meshes: Vec<PathBuf>,
    /// Also run without corrections.
    pub uncorrected: bool,
    pub expect: Option<ConvergenceExpect>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            m: None,
            tau: 1e-3,
            t_final: 1.0,
            meshes: (0..5).map(|k| PathBuf::from(format!("meshes/square_h{k}.msh"))).collect(),
            uncorrected: true,
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceExpect {
    /// Corrected error on the finest mesh.
    pub error: Option<f64>,
    /// Uncorrected error on the finest mesh.
    pub uncorrected_error: Option<f64>,
    #[serde(default = "quarter")]
    pub rel_tol: f64,
    pub order_min: Option<f64>,
    pub order_max: Option<f64>,
}

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterfaceKind {
    Rl,
    Classical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayeredConfig {
    pub mesh: PathBuf,
    pub d_inclusion: f64,
    pub d_matrix: f64,
    pub jump: f64,
    pub u0: f64,
    /// `(gamma_inclusion, gamma_matrix)` pairs.
    pub pairs: Vec<[f64; 2]>,
    pub tau: f64,
    /// Profiles are written at these times; the last one is compared.
    pub output_times: Vec<f64>,
    pub probe_y: f64,
    pub interface: InterfaceKind,
    pub expect: Option<LayeredExpect>,
}

impl Default for LayeredConfig {
    fn default() -> Self {
        Self {
            mesh: PathBuf::from("meshes/rect_coarse.msh"),
            d_inclusion: 10.0,
            d_matrix: 1.0,
            jump: 1.0,
            u0: 1.0,
            pairs: vec![[0.5, 0.5]],
            tau: 1e-3,
            output_times: vec![1.0],
            probe_y: 0.5,
            interface: InterfaceKind::Rl,
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayeredExpect {
    /// Bound on the FVM-versus-reference gap (absolute for the oracle,
    /// relative for the classical-flux comparison).
    pub max_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphologyKind {
    Rect,
    Circle,
    Lshape,
    Tagged,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomogenizeConfig {
    pub mesh: PathBuf,
    pub morphology: MorphologyKind,
    /// Surface tag of the inclusion for `tagged`.
    pub inclusion_tag: i32,
    /// `D_b1 / D_b2`.
    pub ratio: f64,
    pub d_matrix: f64,
    /// Memory orders `alpha = 1 - gamma` of inclusion and matrix.
    pub alpha1: f64,
    pub alpha2: f64,
    pub u0: f64,
    pub tau: f64,
    /// Fixed end time; when absent the run stops on tensor steadiness.
    pub t_final: Option<f64>,
    pub steady_tol: f64,
    pub steady_window: usize,
    pub max_steps: usize,
    pub outputs_per_decade: usize,
    pub vtk: bool,
    pub expect: Option<TensorExpect>,
}

impl Default for HomogenizeConfig {
    fn default() -> Self {
        Self {
            mesh: PathBuf::from("meshes/rect_default.msh"),
            morphology: MorphologyKind::Rect,
            inclusion_tag: 1,
            ratio: 10.0,
            d_matrix: 1.0,
            alpha1: 0.0,
            alpha2: 0.0,
            u0: 1.0,
            tau: 1e-3,
            t_final: None,
            steady_tol: 1e-8,
            steady_window: 10,
            max_steps: 1_000_000,
            outputs_per_decade: 10,
            vtk: false,
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorExpect {
    pub dbx: Option<f64>,
    pub dby: Option<f64>,
    pub dbxy: Option<f64>,
    #[serde(default = "percent")]
    pub rel_tol: f64,
    /// Diagonal entries must lie in `[K1 - 1e-3, K2 + 1e-3]`.
    #[serde(default)]
    pub within_bounds: bool,
    /// Diagonal entries must lie below `K1` by at least 0.1 %.
    #[serde(default)]
    pub below_series: bool,
}

fn percent() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WoodConstantsConfig {
    pub solid_density: Option<f64>,
    pub bound_diffusivity: Option<f64>,
    pub vapour_diffusivity: Option<f64>,
    pub vapour_fraction: Option<f64>,
    pub vapour_density_slope: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WoodConfig {
    pub mesh: PathBuf,
    pub lumen_tag: i32,
    /// Memory order `alpha = 1 - gamma` of the solid phase.
    pub solid_alpha: f64,
    pub gradient: [f64; 2],
    pub constants: WoodConstantsConfig,
    pub tau: f64,
    pub t_final: Option<f64>,
    pub steady_tol: f64,
    pub steady_window: usize,
    pub max_steps: usize,
    pub expect: Option<TensorExpect>,
}

impl Default for WoodConfig {
    fn default() -> Self {
        Self {
            mesh: PathBuf::from("meshes/lumen_default.msh"),
            lumen_tag: 1,
            solid_alpha: 0.0,
            gradient: [1.0, 1.0],
            constants: WoodConstantsConfig::default(),
            tau: 1e-3,
            t_final: None,
            steady_tol: 1e-8,
            steady_window: 10,
            max_steps: 1_000_000,
            expect: None,
        }
    }
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub meshes: Vec<PathBuf>,
    pub tau: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub ratio: Option<f64>,
    pub alpha1: Option<f64>,
    pub morphology: Option<MorphologyKind>,
    pub interface: Option<InterfaceKind>,
    pub steady_tol: Option<f64>,
    pub max_steps: Option<usize>,
}

impl ScenarioConfig {
    /// Reads `path`; relative mesh paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ScenarioConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.convergence.meshes.iter_mut().for_each(fix);
        fix(&mut self.layered.mesh);
        fix(&mut self.homogenize.mesh);
        fix(&mut self.wood.mesh);
    }

    pub fn apply(&mut self, o: &Overrides) {
        if !o.meshes.is_empty() {
            self.convergence.meshes = o.meshes.clone();
            self.layered.mesh = o.meshes[0].clone();
            self.homogenize.mesh = o.meshes[0].clone();
            self.wood.mesh = o.meshes[0].clone();
        }
        if let Some(t) = o.tau {
            self.convergence.tau = t;
            self.layered.tau = t;
            self.homogenize.tau = t;
            self.wood.tau = t;
        }
        if let Some(g) = o.gamma1 {
            self.convergence.gamma = g;
            self.homogenize.alpha1 = 1.0 - g;
        }
        if let Some(g) = o.gamma2 {
            self.homogenize.alpha2 = 1.0 - g;
        }
        if o.gamma1.is_some() || o.gamma2.is_some() {
            self.layered.pairs = vec![[o.gamma1.unwrap_or(1.0), o.gamma2.unwrap_or(1.0)]];
        }
        if let Some(r) = o.ratio {
            self.homogenize.ratio = r;
            self.layered.d_inclusion = r * self.layered.d_matrix;
        }
        if let Some(a) = o.alpha1 {
            self.homogenize.alpha1 = a;
            self.wood.solid_alpha = a;
        }
        if let Some(m) = o.morphology {
            self.homogenize.morphology = m;
        }
        if let Some(i) = o.interface {
            self.layered.interface = i;
        }
        if let Some(t) = o.steady_tol {
            self.homogenize.steady_tol = t;
            self.wood.steady_tol = t;
        }
        if let Some(n) = o.max_steps {
            self.homogenize.max_steps = n;
            self.wood.max_steps = n;
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn order(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must lie in (0, 1], got {v}")))
    }
}

fn memory(name: &str, v: f64) -> Result<(), CliError> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must lie in [0, 1), got {v}")))
    }
}

fn exists(p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::Io(format!("mesh file {} not found", p.display())))
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        order("convergence.gamma", self.gamma)?;
        positive("convergence.tau", self.tau)?;
        positive("convergence.t_final", self.t_final)?;
        if self.meshes.is_empty() {
            return Err(CliError::Config("convergence.meshes is empty".into()));
        }
        self.meshes.iter().try_for_each(|p| exists(p))
    }
}

impl LayeredConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("layered.d_inclusion", self.d_inclusion)?;
        positive("layered.d_matrix", self.d_matrix)?;
        positive("layered.tau", self.tau)?;
        if self.pairs.is_empty() {
            return Err(CliError::Config("layered.pairs is empty".into()));
        }
        for [g1, g2] in &self.pairs {
            order("layered gamma1", *g1)?;
            order("layered gamma2", *g2)?;
        }
        if self.output_times.is_empty() {
            return Err(CliError::Config("layered.output_times is empty".into()));
        }
        for t in &self.output_times {
            positive("layered output time", *t)?;
        }
        if self.output_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("layered.output_times must increase".into()));
        }
        if !(0.0..=1.0).contains(&self.probe_y) {
            return Err(CliError::Config(format!("layered.probe_y {} outside the cell", self.probe_y)));
        }
        exists(&self.mesh)
    }
}

impl HomogenizeConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("homogenize.ratio", self.ratio)?;
        positive("homogenize.d_matrix", self.d_matrix)?;
        positive("homogenize.tau", self.tau)?;
        positive("homogenize.steady_tol", self.steady_tol)?;
        memory("homogenize.alpha1", self.alpha1)?;
        memory("homogenize.alpha2", self.alpha2)?;
        if let Some(t) = self.t_final {
            positive("homogenize.t_final", t)?;
        }
        exists(&self.mesh)
    }
}

impl WoodConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("wood.tau", self.tau)?;
        positive("wood.steady_tol", self.steady_tol)?;
        memory("wood.solid_alpha", self.solid_alpha)?;
        if let Some(t) = self.t_final {
            positive("wood.t_final", t)?;
        }
        exists(&self.mesh)
    }
}
