use nalgebra::{DMatrix, DVector};

use super::{gamma, FracError};

/// Exponents of the starting-value corrections.
///
/// The solution of a subdiffusion problem with order `gamma` behaves like
/// `c_0 + c_1 t^gamma + c_2 t^{2 gamma} + ...` near `t = 0`; the correction
/// weights make the discrete operators exact on those powers.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionSet {
    exponents: Vec<f64>,
}

impl CorrectionSet {
    pub fn none() -> Self {
        Self { exponents: Vec::new() }
    }

    /// Powers `r * gamma`, `r = 1..=m`, with `m` the smallest integer such that
    /// `(m + 1) gamma >= 2`.
    pub fn for_order(gamma: f64) -> Result<Self, FracError> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(FracError::Domain(format!("order {gamma} must lie in (0, 1]")));
        }
        let mut m = 1usize;
        while ((m + 1) as f64) * gamma < 2.0 - 1e-12 {
            m += 1;
        }
        Self::from_exponents((1..=m).map(|r| r as f64 * gamma).collect())
    }

    /// Union of the [`CorrectionSet::for_order`] powers of several orders,
    /// sorted. Integer orders contribute nothing.
    pub fn for_orders(orders: &[f64]) -> Result<Self, FracError> {
        let mut all: Vec<f64> = Vec::new();
        for &g in orders {
            if g == 1.0 {
                continue;
            }
            for &s in Self::for_order(g)?.exponents() {
                if !all.iter().any(|&t| (t - s).abs() < 1e-12) {
                    all.push(s);
                }
            }
        }
        all.sort_by(f64::total_cmp);
        Self::from_exponents(all)
    }

    /// First `m` powers `r * gamma`.
    pub fn truncated(gamma: f64, m: usize) -> Result<Self, FracError> {
        Self::from_exponents((1..=m).map(|r| r as f64 * gamma).collect())
    }

    pub fn from_exponents(exponents: Vec<f64>) -> Result<Self, FracError> {
        for (i, &s) in exponents.iter().enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(FracError::Domain(format!("exponent {s} must be positive")));
            }
            if exponents[..i].iter().any(|&t| (t - s).abs() < 1e-12) {
                return Err(FracError::Singular(format!("repeated exponent {s}")));
            }
        }
        Ok(Self { exponents })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Correction weights `E_1..E_m` for the averaged fractional sum at step `n`.
    ///
    /// `d` must hold the averaged weights `D_0..=D_n` of order `alpha`.
    pub fn starting_weights(&self, alpha: f64, n: usize, d: &[f64]) -> Result<Vec<f64>, FracError> {
        if self.is_empty() {
            return Ok(Vec::new());
        }
        if d.len() <= n {
            return Err(FracError::Domain(format!("need {} weights, got {}", n + 1, d.len())));
        }
        let half = n as f64 - 0.5;
        let rhs: Vec<f64> = self
            .exponents
            .iter()
            .map(|&s| {
                let exact = gamma(s + 1.0) / gamma(s + 1.0 - alpha) * half.powf(s - alpha);
                let approx: f64 = (1..=n).map(|k| d[n - k] * (k as f64).powf(s)).sum();
                exact - approx
            })
            .collect();
        self.solve(rhs)
    }

    /// Correction weights `P_1..P_m` for the first-order time difference at step `n`.
    pub fn derivative_weights(&self, n: usize) -> Result<Vec<f64>, FracError> {
        if self.is_empty() {
            return Ok(Vec::new());
        }
        let nf = n as f64;
        let rhs: Vec<f64> = self
            .exponents
            .iter()
            .map(|&s| s * (nf - 0.5).powf(s - 1.0) - (nf.powf(s) - (nf - 1.0).powf(s)))
            .collect();
        self.solve(rhs)
    }

    fn solve(&self, rhs: Vec<f64>) -> Result<Vec<f64>, FracError> {
        let m = self.len();
        let mut a = DMatrix::from_fn(m, m, |r, k| ((k + 1) as f64).powf(self.exponents[r]));
        let mut b = DVector::from_vec(rhs);
        // row equilibration before the direct solve
        for r in 0..m {
            let scale = a.row(r).amax();
            a.row_mut(r).scale_mut(1.0 / scale);
            b[r] /= scale;
        }
        let lu = a.lu();
        let x = lu
            .solve(&b)
            .ok_or_else(|| FracError::Singular(format!("exponents {:?}", self.exponents)))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FracError::Singular(format!("exponents {:?}", self.exponents)));
        }
        Ok(x.iter().copied().collect())
    }
}
