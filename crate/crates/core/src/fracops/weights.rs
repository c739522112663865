use super::FracError;

fn check_order(alpha: f64) -> Result<(), FracError> {
    if !alpha.is_finite() || !(0.0..2.0).contains(&alpha) {
        return Err(FracError::Domain(format!(
            "derivative order {alpha} must lie in [0, 2)"
        )));
    }
    Ok(())
}

/// Grünwald–Letnikov weights `g_0..=g_n` of order `alpha`.
///
/// `g_k = (-1)^k binom(alpha, k)`, generated by the recurrence
/// `g_k = g_{k-1} (1 - (alpha + 1) / k)`.
pub fn gl_weights(alpha: f64, n: usize) -> Result<Vec<f64>, FracError> {
    check_order(alpha)?;
    let mut g = Vec::with_capacity(n + 1);
    g.push(1.0);
    for k in 1..=n {
        let prev = g[k - 1];
        g.push(prev * (1.0 - (alpha + 1.0) / k as f64));
    }
    Ok(g)
}

/// Weighted-shifted weights `omega_0..=omega_n` for shifts (p, q) = (0, -1).
pub fn shifted_weights(alpha: f64, n: usize) -> Result<Vec<f64>, FracError> {
    let g = gl_weights(alpha, n)?;
    let a = 0.5 * (2.0 + alpha);
    let b = 0.5 * alpha;
    Ok((0..=n)
        .map(|k| if k == 0 { a * g[0] } else { a * g[k] - b * g[k - 1] })
        .collect())
}

/// Crank–Nicolson averaged weights `D_0..=D_n`:
/// `D_0 = omega_0 / 2`, `D_k = (omega_k + omega_{k-1}) / 2`.
pub fn averaged_weights(alpha: f64, n: usize) -> Result<Vec<f64>, FracError> {
    let w = shifted_weights(alpha, n)?;
    Ok((0..=n)
        .map(|k| if k == 0 { 0.5 * w[0] } else { 0.5 * (w[k] + w[k - 1]) })
        .collect())
}

/// Growable cache of averaged weights for one derivative order.
#[derive(Debug, Clone)]
pub struct WeightTable {
    alpha: f64,
    d: Vec<f64>,
    support: Option<usize>,
}

impl WeightTable {
    pub fn new(alpha: f64, n: usize) -> Result<Self, FracError> {
        let d = averaged_weights(alpha, n)?;
        let mut t = Self { alpha, d, support: None };
        t.update_support();
        Ok(t)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Averaged weights `D_0..=D_n` currently held.
    pub fn averaged(&self) -> &[f64] {
        &self.d
    }

    /// Number of leading weights that can be nonzero, if the sequence
    /// terminates (integer orders); `None` for genuinely long memory.
    pub fn support(&self) -> Option<usize> {
        self.support
    }

    /// Make sure weights up to index `n` are available.
    pub fn ensure(&mut self, n: usize) {
        if n < self.d.len() {
            return;
        }
        let target = (n + 1).max(2 * self.d.len());
        // recomputing from scratch keeps the recurrence in one place
        self.d = averaged_weights(self.alpha, target).expect("order validated at construction");
        self.update_support();
    }

    fn update_support(&mut self) {
        let g = gl_weights(self.alpha, self.d.len().saturating_sub(1)).expect("validated");
        let terminates = g.iter().any(|&v| v == 0.0);
        self.support = if terminates {
            Some(self.d.iter().rposition(|&v| v != 0.0).map_or(0, |i| i + 1))
        } else {
            None
        };
    }
}
