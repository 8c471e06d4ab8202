//! Log densities and mass functions used by the full model.
//!
//! Gamma is parameterized by shape and **rate** throughout (mean `a/b`),
//! the same convention as BUGS' `dgamma(a, b)`.

use std::f64::consts::PI;

use super::special::log_gamma_unchecked;
use crate::error::{Error, Result};

fn positive(op: &'static str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} must be positive and finite, got {v}")))
    }
}

/// `ln k!`
pub fn ln_factorial(k: u64) -> f64 {
    log_gamma_unchecked(k as f64 + 1.0)
}

/// Gamma(shape, rate) log density. Returns `-inf` for `x < 0`.
pub fn gamma_logpdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    positive("gamma_logpdf", "shape", shape)?;
    positive("gamma_logpdf", "rate", rate)?;
    if x.is_nan() {
        return Err(Error::domain("gamma_logpdf", "x is NaN"));
    }
    if x < 0.0 || x == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if x == 0.0 {
        return Ok(if shape == 1.0 {
            rate.ln()
        } else if shape < 1.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok(shape * rate.ln() - log_gamma_unchecked(shape) + (shape - 1.0) * x.ln() - rate * x)
}

/// Normal log density parameterized by mean and variance.
pub fn normal_logpdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    positive("normal_logpdf", "variance", variance)?;
    if !mean.is_finite() {
        return Err(Error::domain("normal_logpdf", format!("mean must be finite, got {mean}")));
    }
    if x.is_nan() {
        return Err(Error::domain("normal_logpdf", "x is NaN"));
    }
    let z = x - mean;
    Ok(-0.5 * (2.0 * PI * variance).ln() - z * z / (2.0 * variance))
}

/// Poisson log mass function.
pub fn poisson_logpmf(k: u64, mean: f64) -> Result<f64> {
    positive("poisson_logpmf", "mean", mean)?;
    Ok(k as f64 * mean.ln() - mean - ln_factorial(k))
}

/// Binomial log mass function. `k > n` has zero mass.
pub fn binomial_logpmf(k: u64, n: u64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("binomial_logpmf", format!("p must lie in [0, 1], got {p}")));
    }
    if k > n {
        return Ok(f64::NEG_INFINITY);
    }
    let ln_choose = ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    let kf = k as f64;
    let rest = (n - k) as f64;
    let success = if k == 0 { 0.0 } else { kf * p.ln() };
    let failure = if k == n { 0.0 } else { rest * (-p).ln_1p() };
    Ok(ln_choose + success + failure)
}
