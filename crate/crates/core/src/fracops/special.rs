use statrs::function::gamma as sg;

/// Euler gamma function.
pub fn gamma(x: f64) -> f64 {
    sg::gamma(x)
}

/// Reciprocal gamma function, exact zero at the poles `0, -1, -2, ...`.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / sg::gamma(x)
    }
}

/// Natural log of |Γ(x)| for x > 0.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    sg::ln_gamma(x)
}
