//! Trial data and the algebra linking infection rates, vaccine efficacy and
//! the binomial split probability θ.
//!
//! VE is always a fraction here (0.95, not 95). Negative values are legal: a
//! posterior can put mass on a harmful vaccine, and the transforms must be
//! total on that support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed statistics of one two-arm trial.
///
/// Surveillance times are in person-years, `d` is the enrollment duration in
/// years. Constructed only through [`TrialData::new`] (JSON goes through the
/// same validation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrialData")]
pub struct TrialData {
    pub n_v: u64,
    pub n_c: u64,
    pub s_v: f64,
    pub s_c: f64,
    pub x_v: u64,
    pub x_c: u64,
    pub d: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrialData {
    n_v: u64,
    n_c: u64,
    s_v: f64,
    s_c: f64,
    x_v: u64,
    x_c: u64,
    d: f64,
}

impl TryFrom<RawTrialData> for TrialData {
    type Error = Error;

    fn try_from(r: RawTrialData) -> Result<Self> {
        TrialData::new(r.n_v, r.n_c, r.s_v, r.s_c, r.x_v, r.x_c, r.d)
    }
}

impl TrialData {
    #[allow(clippy::too_many_arguments)]
    pub fn new(n_v: u64, n_c: u64, s_v: f64, s_c: f64, x_v: u64, x_c: u64, d: f64) -> Result<Self> {
        if n_v < 1 {
            return Err(Error::invalid("n_v", "vaccine arm needs at least one participant"));
        }
        if n_c < 1 {
            return Err(Error::invalid("n_c", "control arm needs at least one participant"));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::invalid("d", format!("duration must be positive and finite, got {d}")));
        }
        for (field, s, n) in [("s_v", s_v, n_v), ("s_c", s_c, n_c)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(field, format!("surveillance time must be positive and finite, got {s}")));
            }
            let cap = n as f64 * d;
            if s > cap {
                return Err(Error::invalid(
                    field,
                    format!("surveillance time {s} exceeds participants x duration = {cap}"),
                ));
            }
        }
        if x_v > n_v {
            return Err(Error::invalid("x_v", format!("{x_v} cases exceed {n_v} participants")));
        }
        if x_c > n_c {
            return Err(Error::invalid("x_c", format!("{x_c} cases exceed {n_c} participants")));
        }
        Ok(Self {
            n_v,
            n_c,
            s_v,
            s_c,
            x_v,
            x_c,
            d,
        })
    }

    pub fn total_cases(&self) -> u64 {
        self.x_v + self.x_c
    }
}

/// Infection intensities in cases per person-year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub lambda_v: f64,
    pub lambda_c: f64,
}

impl RatePair {
    pub fn new(lambda_v: f64, lambda_c: f64) -> Result<Self> {
        if !(lambda_v >= 0.0 && lambda_v.is_finite()) {
            return Err(Error::invalid("lambda_v", format!("must be finite and >= 0, got {lambda_v}")));
        }
        if !(lambda_c > 0.0 && lambda_c.is_finite()) {
            return Err(Error::invalid("lambda_c", format!("must be finite and > 0, got {lambda_c}")));
        }
        Ok(Self { lambda_v, lambda_c })
    }
}

/// Vaccine efficacy as a fraction in (-inf, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Efficacy(f64);

impl Efficacy {
    pub fn new(ve: f64) -> Result<Self> {
        if ve.is_nan() || ve > 1.0 {
            return Err(Error::domain("Efficacy::new", format!("VE must be <= 1, got {ve}")));
        }
        Ok(Self(ve))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Incidence rate ratio, `1 - VE`.
    pub fn irr(self) -> f64 {
        1.0 - self.0
    }

    pub fn percent(self) -> f64 {
        100.0 * self.0
    }
}

impl std::fmt::Display for Efficacy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.1}%", self.percent())
    }
}

fn check_times(op: &'static str, s_v: f64, s_c: f64) -> Result<()> {
    if !(s_v > 0.0 && s_v.is_finite()) {
        return Err(Error::domain(op, format!("s_v must be positive, got {s_v}")));
    }
    if !(s_c > 0.0 && s_c.is_finite()) {
        return Err(Error::domain(op, format!("s_c must be positive, got {s_c}")));
    }
    Ok(())
}

/// `VE = 1 - λ_v / λ_c`.
pub fn ve_from_rates(rates: RatePair) -> Result<Efficacy> {
    if !(rates.lambda_c > 0.0) {
        return Err(Error::domain("ve_from_rates", "lambda_c = 0 leaves the rate ratio undefined"));
    }
    Efficacy::new(1.0 - rates.lambda_v / rates.lambda_c)
}

/// Binomial success probability θ = s_v(1-VE) / (s_v(1-VE) + s_c).
pub fn theta_from_ve(ve: Efficacy, s_v: f64, s_c: f64) -> Result<f64> {
    check_times("theta_from_ve", s_v, s_c)?;
    let irr = ve.irr();
    if irr == 0.0 {
        return Ok(0.0);
    }
    // Ratio form saturates to 0 or 1 instead of producing inf/inf.
    Ok(1.0 / (1.0 + (s_c / s_v) / irr))
}

/// Inverse of [`theta_from_ve`]: VE = 1 - (s_c/s_v) θ/(1-θ).
pub fn ve_from_theta(theta: f64, s_v: f64, s_c: f64) -> Result<Efficacy> {
    check_times("ve_from_theta", s_v, s_c)?;
    if theta.is_nan() || !(0.0..1.0).contains(&theta) {
        let msg = if theta == 1.0 {
            "theta = 1 sends VE to -infinity".to_string()
        } else {
            format!("theta must lie in [0, 1), got {theta}")
        };
        return Err(Error::domain("ve_from_theta", msg));
    }
    Ok(Efficacy(1.0 - (s_c / s_v) * theta / (1.0 - theta)))
}
