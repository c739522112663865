//! Control-volume solver for time-fractional diffusion in two-phase periodic
//! media, with a semi-analytical layered reference solution and extraction of
//! effective diffusivity tensors from unit-cell problems.

pub mod assembly;
pub mod fracops;
pub mod homogenize;
pub mod layered;
pub mod linalg;
pub mod mesh;
pub mod stepper;
pub mod studies;

pub use assembly::{InterfaceMode, MediumSpec, Phase};
pub use fracops::CorrectionSet;
pub use homogenize::{EffectiveTensorSeries, Tensor};
pub use layered::{LayeredOracle, LayeredSpec};
pub use mesh::{read_msh, Mesh, Morphology};
pub use stepper::{RunSummary, Stepper, StopRule};
