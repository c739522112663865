//! Discrete fractional operators.
//!
//! Weighted-shifted Grünwald–Letnikov weights for the Riemann–Liouville
//! derivative of order `alpha = 1 - gamma`, their Crank–Nicolson averages,
//! starting-value correction weights for non-smooth solutions, and a
//! Mittag–Leffler evaluator used for closed-form reference solutions.

mod correction;
mod mittag_leffler;
mod special;
mod weights;

pub use correction::CorrectionSet;
pub use mittag_leffler::mittag_leffler;
pub use special::{gamma, rgamma};
pub use weights::{averaged_weights, gl_weights, shifted_weights, WeightTable};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("singular correction system: {0}")]
    Singular(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}
