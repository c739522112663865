//! Carathéodory–Fejér rational approximation of `exp` on the negative real
//! axis, used as a quadrature rule for the inverse Laplace transform.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::OracleError;

const CHEB_TERMS: usize = 75;
const FFT_POINTS: usize = 1024;
const SCALE: f64 = 9.0;

/// Poles and residues of the best type-(K,K) approximant.
///
/// Only the poles in the upper half plane are stored; the others are their
/// conjugates.
#[derive(Debug, Clone)]
pub struct CfRule {
    degree: usize,
    poles: Vec<Complex64>,
    residues: Vec<Complex64>,
}

impl CfRule {
    /// Builds the rule for an even degree `k` (2 ≤ k ≤ 20).
    pub fn new(k: usize) -> Result<Self, OracleError> {
        if k < 2 || k % 2 != 0 || k > 20 {
            return Err(OracleError::Domain(format!("CF degree must be even in [2, 20], got {k}")));
        }
        let (poles, residues) = construct(k)?;
        let mut pairs: Vec<_> = poles
            .into_iter()
            .zip(residues)
            .filter(|(z, _)| z.im > 0.0)
            .collect();
        if pairs.len() != k / 2 {
            return Err(OracleError::Construction(format!(
                "expected {} upper-half-plane poles, found {}",
                k / 2,
                pairs.len()
            )));
        }
        pairs.sort_by(|a, b| a.0.im.total_cmp(&b.0.im));
        let (poles, residues) = pairs.into_iter().unzip();
        Ok(Self { degree: k, poles, residues })
    }

    /// Shared rule of degree 14.
    pub fn standard() -> &'static CfRule {
        static RULE: OnceLock<CfRule> = OnceLock::new();
        RULE.get_or_init(|| CfRule::new(14).expect("degree-14 CF rule"))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn residues(&self) -> &[Complex64] {
        &self.residues
    }

    /// Nodes `s = z/t` at which a transform must be sampled to invert at `t`.
    pub fn nodes(&self, t: f64) -> Result<Vec<Complex64>, OracleError> {
        check_time(t)?;
        Ok(self.poles.iter().map(|z| z / t).collect())
    }

    /// Combines transform samples taken at [`CfRule::nodes`].
    pub fn combine(&self, t: f64, samples: &[Complex64]) -> f64 {
        let sum: Complex64 = self.residues.iter().zip(samples).map(|(c, f)| c * f).sum();
        -2.0 * sum.re / t
    }

    /// Inverse Laplace transform of `f` at time `t`.
    pub fn invert<F>(&self, f: F, t: f64) -> Result<f64, OracleError>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let samples: Vec<_> = self.nodes(t)?.into_iter().map(f).collect();
        Ok(self.combine(t, &samples))
    }
}

fn check_time(t: f64) -> Result<(), OracleError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(OracleError::Domain(format!("inversion time must be positive, got {t}")))
    }
}

fn polyval_ascending(c: &[f64], w: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w + a)
}

fn fft(data: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(data.len()).process(data);
}

fn construct(n: usize) -> Result<(Vec<Complex64>, Vec<Complex64>), OracleError> {
    let k = CHEB_TERMS;
    let nf = FFT_POINTS;
    let w: Vec<Complex64> = (0..nf)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / nf as f64))
        .collect();

    let mut samples: Vec<Complex64> = w
        .iter()
        .map(|wj| {
            let x = wj.re;
            Complex64::new((SCALE * (x - 1.0) / (x + 1.0 + 1e-16)).exp(), 0.0)
        })
        .collect();
    fft(&mut samples);
    let cheb: Vec<f64> = samples.iter().map(|v| v.re / nf as f64).collect();
    let analytic: Vec<Complex64> = w.iter().map(|&wj| polyval_ascending(&cheb[..=k], wj)).collect();

    let hankel = DMatrix::from_fn(k, k, |i, j| if i + j < k { cheb[i + j + 1] } else { 0.0 });
    let svd = hankel.svd(true, true);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let pick = order[n];
    let sigma = svd.singular_values[pick];
    let u_mat = svd.u.as_ref().ok_or_else(|| OracleError::Construction("SVD without U".into()))?;
    let vt_mat = svd.v_t.as_ref().ok_or_else(|| OracleError::Construction("SVD without V".into()))?;
    let u: Vec<f64> = (0..k).rev().map(|i| u_mat[(i, pick)]).collect();
    let v: Vec<f64> = (0..k).map(|i| vt_mat[(pick, i)]).collect();

    let mut fu: Vec<Complex64> = (0..nf).map(|i| Complex64::new(if i < k { u[i] } else { 0.0 }, 0.0)).collect();
    let mut fv: Vec<Complex64> = (0..nf).map(|i| Complex64::new(if i < k { v[i] } else { 0.0 }, 0.0)).collect();
    fft(&mut fu);
    fft(&mut fv);
    let extended: Vec<Complex64> = (0..nf)
        .map(|j| analytic[j] - sigma * w[j].powu(k as u32) * fu[j] / fv[j])
        .collect();

    let roots = poly_roots_descending(&v)?;
    let outer: Vec<Complex64> = roots.into_iter().filter(|r| r.norm() > 1.0).collect();
    if outer.len() != n {
        return Err(OracleError::Construction(format!(
            "expected {n} poles outside the unit disc, found {}",
            outer.len()
        )));
    }
    let denominator = |x: Complex64| outer.iter().fold(Complex64::new(1.0, 0.0), |acc, q| acc * (x - q));
    let mut numer: Vec<Complex64> = (0..nf).map(|j| extended[j] * denominator(w[j])).collect();
    fft(&mut numer);
    let numer_coef: Vec<f64> = numer[..=n].iter().map(|c| c.re / nf as f64).collect();

    let mut poles = Vec::with_capacity(n);
    let mut residues = Vec::with_capacity(n);
    for (idx, &q) in outer.iter().enumerate() {
        let others = outer
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .fold(Complex64::new(1.0, 0.0), |acc, (_, r)| acc * (q - r));
        let res_w = polyval_ascending(&numer_coef, q) / others;
        let z = SCALE * (q - 1.0).powu(2) / (q + 1.0).powu(2);
        poles.push(z);
        residues.push(4.0 * res_w * z / (q * q - 1.0));
    }
    Ok((poles, residues))
}

/// Roots of `c[0] x^{n-1} + c[1] x^{n-2} + ... + c[n-1]` by companion-matrix
/// eigenvalues. Leading zeros are stripped.
fn poly_roots_descending(c: &[f64]) -> Result<Vec<Complex64>, OracleError> {
    let start = c
        .iter()
        .position(|v| *v != 0.0)
        .ok_or_else(|| OracleError::Construction("zero polynomial".into()))?;
    let c = &c[start..];
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let mut comp = DMatrix::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    Ok(comp.complex_eigenvalues().iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{gamma, mittag_leffler};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn heaviside_and_exponential() {
        let rule = CfRule::standard();
        for t in [1e-2, 1.0, 37.0, 1e6] {
            let v = rule.invert(|s| 1.0 / s, t).unwrap();
            assert!(rel(v, 1.0) < 1e-12, "t={t}: {v}");
        }
        let v = rule.invert(|s| 1.0 / (s + 1.0), 1.0).unwrap();
        assert!(rel(v, (-1.0f64).exp()) < 1e-10, "{v}");
    }

    #[test]
    fn power_law_pair() {
        let rule = CfRule::standard();
        let g = 0.5;
        let v = rule.invert(|s| gamma(g + 1.0) / s.powf(g + 1.0), 2.0).unwrap();
        assert!(rel(v, 2f64.powf(g)) < 1e-10, "{v}");
    }

    #[test]
    fn library_pairs_over_time_range() {
        let rule = CfRule::standard();
        let g = 0.7;
        for t in [1e-2, 0.3, 1.0, 10.0, 1e3, 1e6] {
            let cases = [
                (rule.invert(|s| 1.0 / (s * s), t).unwrap(), t),
                (rule.invert(|s| gamma(1.5) / s.powf(1.5), t).unwrap(), t.sqrt()),
                (rule.invert(|s| 1.0 / (s * (s + 1.0)), t).unwrap(), 1.0 - (-t).exp()),
                (
                    rule.invert(|s| s.powf(g - 1.0) / (s.powf(g) + 1.0), t).unwrap(),
                    mittag_leffler(g, 1.0, -t.powf(g)).unwrap(),
                ),
            ];
            for (i, (got, want)) in cases.iter().enumerate() {
                assert!(rel(*got, *want) < 1e-8, "pair {i} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn poles_in_upper_half_plane_with_negative_real_parts_on_the_tail() {
        let rule = CfRule::standard();
        assert_eq!(rule.poles().len(), 7);
        assert!(rule.poles().iter().all(|z| z.im > 0.0));
    }

    #[test]
    fn rejects_bad_degree_and_time() {
        assert!(CfRule::new(7).is_err());
        assert!(CfRule::standard().invert(|s| 1.0 / s, 0.0).is_err());
    }
}
