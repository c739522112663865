use std::f64::consts::PI;

use num_complex::Complex64;

use super::special::{ln_gamma, rgamma};
use super::FracError;

const SERIES_RADIUS: f64 = 1.0;
const ASYMPTOTIC_RADIUS: f64 = 40.0;
const CONTOUR_NODES: usize = 32;

/// Two-parameter Mittag–Leffler function `E_{alpha,beta}(z)` for real `z`,
/// `0 < alpha <= 1`, `beta > 0`.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64, FracError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FracError::Domain(format!("alpha = {alpha} outside (0, 1]")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(FracError::Domain(format!("beta = {beta} must be positive")));
    }
    if !z.is_finite() {
        return Err(FracError::Domain(format!("argument {z} is not finite")));
    }
    let v = if z >= -SERIES_RADIUS {
        series(alpha, beta, z)?
    } else if z > -ASYMPTOTIC_RADIUS {
        contour(alpha, beta, z, CONTOUR_NODES)
    } else {
        asymptotic(alpha, beta, z)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FracError::Evaluation(format!("E_{{{alpha},{beta}}}({z}) overflows")))
    }
}

/// Power series `sum_k z^k / Gamma(alpha k + beta)`.
pub(crate) fn series(alpha: f64, beta: f64, z: f64) -> Result<f64, FracError> {
    if z == 0.0 {
        return Ok(rgamma(beta));
    }
    let mut sum = 0.0;
    let lz = z.abs().ln();
    let sign = z.signum();
    let mut past_peak = false;
    let mut prev = f64::INFINITY;
    for k in 0..100_000usize {
        let arg = alpha * k as f64 + beta;
        let mag = (k as f64 * lz - ln_gamma(arg)).exp();
        let term = if k % 2 == 1 && sign < 0.0 { -mag } else { mag };
        sum += term;
        if mag < prev {
            past_peak = true;
        }
        prev = mag;
        if past_peak && mag <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(FracError::Evaluation(format!("series for z = {z} did not converge")))
}

/// Inverse Laplace integral of `s^{alpha-beta} / (s^alpha - z)` at t = 1
/// along a parabolic Hankel contour (trapezoid rule).
pub(crate) fn contour(alpha: f64, beta: f64, z: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mu = PI * nf / 12.0;
    let h = 3.0 / nf;
    let mut acc = Complex64::new(0.0, 0.0);
    let k_max = n as i64;
    for k in -k_max..=k_max {
        let u = k as f64 * h;
        let s = mu * Complex64::new(1.0, u).powi(2);
        let ds = mu * 2.0 * Complex64::new(0.0, 1.0) * Complex64::new(1.0, u);
        let f = s.exp() * s.powf(alpha - beta) / (s.powf(alpha) - z);
        acc += f * ds;
    }
    (acc * h / Complex64::new(0.0, 2.0 * PI)).re
}

/// Large negative argument expansion `-sum_k z^{-k} / Gamma(beta - alpha k)`.
pub(crate) fn asymptotic(alpha: f64, beta: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zp = 1.0;
    let mut last_bound = f64::INFINITY;
    let lz = z.abs().ln();
    for k in 1..400 {
        zp /= z;
        let x = beta - alpha * k as f64;
        sum -= zp * rgamma(x);
        // |1/Gamma(x)| <= Gamma(1 - x) / pi for x < 0
        let bound = if x < 0.0 {
            (ln_gamma(1.0 - x) - k as f64 * lz).exp() / PI
        } else {
            zp.abs() * rgamma(x).abs().max(1.0)
        };
        if bound < 1e-18 * sum.abs() || bound > last_bound {
            break;
        }
        last_bound = bound;
    }
    sum
}
