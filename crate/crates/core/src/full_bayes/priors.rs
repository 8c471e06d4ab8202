use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Efficacy;

/// Independent Gamma(shape, rate) priors on λ_v and λ_c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGammaPriors")]
pub struct GammaPriorPair {
    pub a_v: f64,
    pub b_v: f64,
    pub a_c: f64,
    pub b_c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGammaPriors {
    a_v: f64,
    b_v: f64,
    a_c: f64,
    b_c: f64,
}

impl TryFrom<RawGammaPriors> for GammaPriorPair {
    type Error = Error;
    fn try_from(r: RawGammaPriors) -> Result<Self> {
        GammaPriorPair::new(r.a_v, r.b_v, r.a_c, r.b_c)
    }
}

impl GammaPriorPair {
    pub fn new(a_v: f64, b_v: f64, a_c: f64, b_c: f64) -> Result<Self> {
        for (field, v) in [("a_v", a_v), ("b_v", b_v), ("a_c", a_c), ("b_c", b_c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self { a_v, b_v, a_c, b_c })
    }
}

/// Default prior from a guess of VE and of the control infection rate:
/// `a_v = 1`, `a_c = (2 - VÊ)/(1 - VÊ)`, `b_v = b_c = 1/λ̂_c`.
///
/// With these choices the prior mean of VE equals `ve_hat`.
pub fn elicit_priors(ve_hat: f64, lambda_c_hat: f64) -> Result<GammaPriorPair> {
    if !(0.0..1.0).contains(&ve_hat) {
        return Err(Error::domain("elicit_priors", format!("ve_hat must lie in [0, 1), got {ve_hat}")));
    }
    if !(lambda_c_hat > 0.0 && lambda_c_hat.is_finite()) {
        return Err(Error::domain(
            "elicit_priors",
            format!("lambda_c_hat must be positive and finite, got {lambda_c_hat}"),
        ));
    }
    let rate = 1.0 / lambda_c_hat;
    GammaPriorPair::new(1.0, rate, (2.0 - ve_hat) / (1.0 - ve_hat), rate)
}

/// Prior mean of VE, `1 - (a_v/b_v) · b_c/(a_c - 1)`; needs `a_c > 1`.
pub fn prior_mean_ve(priors: &GammaPriorPair) -> Result<Efficacy> {
    if !(priors.a_c > 1.0) {
        return Err(Error::domain(
            "prior_mean_ve",
            format!("prior mean of VE does not exist for a_c = {} <= 1", priors.a_c),
        ));
    }
    Efficacy::new(1.0 - (priors.a_v / priors.b_v) * (priors.b_c / (priors.a_c - 1.0)))
}
