//! Moments of a participant's follow-up time `min(T, C)`, where
//! `T ~ Exponential(λ)` is the potential infection time and
//! `C = D - U ~ Uniform(0, D)` is administrative censoring under uniform
//! accrual over the enrollment window `D`.
//!
//! Two variants of the second moment are provided. [`MomentMode::Corrected`]
//! is the exact value of `∫₀^D 2x e^{-λx} (D - x)/D dx`;
//! [`MomentMode::PaperCompat`] is the expression used by the original BUGS
//! program, `(2e^{-λD} + 4e^{-λD}/(λD)) / λ²`, kept so that published runs
//! can be reproduced. The latter does not tend to `2/λ²` as `λD → ∞` and goes
//! negative (as a variance) for `λD` of order 2 and above.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which second-moment expression to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MomentMode {
    #[serde(rename = "paper")]
    PaperCompat,
    #[default]
    #[serde(rename = "corrected")]
    Corrected,
}

impl std::fmt::Display for MomentMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MomentMode::PaperCompat => "paper",
            MomentMode::Corrected => "corrected",
        })
    }
}

/// Per-participant follow-up moments (years, years²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveillanceMoments {
    pub mean: f64,
    pub variance: f64,
    pub mode: MomentMode,
}

/// Normal approximation to a cohort's total surveillance time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortNormal {
    pub mean: f64,
    pub variance: f64,
}

/// Below this value of `λD` the closed forms lose digits to cancellation and
/// the power series is used instead.
pub(crate) const SERIES_SWITCH: f64 = 1.0;

/// `E[min(T,C)^k] = k D^k Σ_j (-λD)^j / (j! (k+j)(k+j+1))`.
pub(crate) fn raw_moment_series(k: u32, x: f64, d: f64) -> f64 {
    let k_f = f64::from(k);
    let mut sum = 0.0;
    let mut power = 1.0; // (-x)^j / j!
    for j in 0..60 {
        let j_f = f64::from(j);
        let term = power / ((k_f + j_f) * (k_f + j_f + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        power *= -x / (j_f + 1.0);
    }
    k_f * d.powi(k as i32) * sum
}

pub(crate) fn mean_closed_form(lambda: f64, d: f64) -> f64 {
    let x = lambda * d;
    (1.0 + (-x).exp_m1() / x) / lambda
}

pub(crate) fn corrected_second_closed_form(lambda: f64, d: f64) -> f64 {
    let x = lambda * d;
    let e = (-x).exp();
    (2.0 + 2.0 * e + 4.0 * (-x).exp_m1() / x) / (lambda * lambda)
}

fn check_duration(op: &'static str, d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("duration must be positive and finite, got {d}")))
    }
}

/// `E[min(T, C)]`; `λ = 0` gives the censoring-only limit `D/2`.
pub fn surveillance_mean(lambda: f64, d: f64) -> Result<f64> {
    check_duration("surveillance_mean", d)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain("surveillance_mean", format!("rate must be finite and >= 0, got {lambda}")));
    }
    let x = lambda * d;
    Ok(if x < SERIES_SWITCH {
        raw_moment_series(1, x, d)
    } else {
        mean_closed_form(lambda, d)
    })
}

/// `E[min(T, C)²]` in the requested mode.
pub fn surveillance_second_moment(lambda: f64, d: f64, mode: MomentMode) -> Result<f64> {
    check_duration("surveillance_second_moment", d)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(
            "surveillance_second_moment",
            format!("rate must be positive and finite, got {lambda}"),
        ));
    }
    let x = lambda * d;
    let value = match mode {
        MomentMode::Corrected if x < SERIES_SWITCH => raw_moment_series(2, x, d),
        MomentMode::Corrected => corrected_second_closed_form(lambda, d),
        MomentMode::PaperCompat => {
            let e = (-x).exp();
            (2.0 * e + 4.0 * e / x) / (lambda * lambda)
        }
    };
    if !value.is_finite() {
        return Err(Error::numerical(
            "surveillance_second_moment",
            format!("overflow at lambda={lambda}, d={d} ({mode})"),
        ));
    }
    Ok(value)
}

/// `Var[min(T, C)]`. Corrected mode always yields a positive value;
/// PaperCompat may not and is returned as computed.
pub fn surveillance_variance(lambda: f64, d: f64, mode: MomentMode) -> Result<f64> {
    let second = surveillance_second_moment(lambda, d, mode)?;
    let mean = surveillance_mean(lambda, d)?;
    let var = second - mean * mean;
    if mode == MomentMode::Corrected && !(var > 0.0) {
        return Err(Error::numerical(
            "surveillance_variance",
            format!("invariant violated: nonpositive variance {var:e} at lambda={lambda}, d={d}"),
        ));
    }
    Ok(var)
}

pub fn surveillance_moments(lambda: f64, d: f64, mode: MomentMode) -> Result<SurveillanceMoments> {
    Ok(SurveillanceMoments {
        mean: surveillance_mean(lambda, d)?,
        variance: surveillance_variance(lambda, d, mode)?,
        mode,
    })
}

/// Mean and variance of a cohort's total follow-up `S = Σ min(T_i, C_i)`
/// over `n` i.i.d. participants.
pub fn cohort_normal_params(n: u64, lambda: f64, d: f64, mode: MomentMode) -> Result<CohortNormal> {
    if n < 1 {
        return Err(Error::domain("cohort_normal_params", "cohort size must be at least 1"));
    }
    let m = surveillance_moments(lambda, d, mode)?;
    let n = n as f64;
    Ok(CohortNormal {
        mean: n * m.mean,
        variance: n * m.variance,
    })
}
