//! The conditional ("exact") method: condition on the total number of cases
//! and the surveillance times, put a Beta prior on the split probability θ,
//! update conjugately, and push summaries back to the VE scale through the
//! decreasing map θ ↦ VE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{theta_from_ve, ve_from_theta, Efficacy, TrialData};
use crate::numerics::{inv_reg_inc_beta, reg_inc_beta, QuantileSolverConfig};

/// Shape pair of a Beta distribution on θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBeta")]
pub struct BetaDistributionParams {
    pub a: f64,
    pub b: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeta {
    a: f64,
    b: f64,
}

impl TryFrom<RawBeta> for BetaDistributionParams {
    type Error = Error;
    fn try_from(r: RawBeta) -> Result<Self> {
        BetaDistributionParams::new(r.a, r.b)
    }
}

impl BetaDistributionParams {
    /// Beta(0.700102, 1), the prior of the BNT162b2 efficacy analysis.
    pub const PFIZER: BetaDistributionParams = BetaDistributionParams { a: 0.700102, b: 1.0 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", format!("Beta shape must be positive and finite, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid("b", format!("Beta shape must be positive and finite, got {b}")));
        }
        Ok(Self { a, b })
    }
}

impl Default for BetaDistributionParams {
    fn default() -> Self {
        Self::PFIZER
    }
}

/// Equal-tail credible interval on the VE scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub level: f64,
    pub lo: Efficacy,
    pub hi: Efficacy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProbability {
    pub threshold: f64,
    pub probability: f64,
}

/// Conjugate update: Beta(a + x_v, b + x_c).
pub fn posterior_theta(prior: BetaDistributionParams, x_v: u64, x_c: u64) -> BetaDistributionParams {
    BetaDistributionParams {
        a: prior.a + x_v as f64,
        b: prior.b + x_c as f64,
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("credible interval", format!("level must lie in (0, 1), got {level}")))
    }
}

/// Equal-tail VE interval. The upper θ quantile maps to the lower VE bound.
pub fn ve_credible_interval(
    posterior: BetaDistributionParams,
    s_v: f64,
    s_c: f64,
    level: f64,
) -> Result<CredibleInterval> {
    check_level(level)?;
    let cfg = QuantileSolverConfig::default();
    let tail = 0.5 * (1.0 - level);
    let theta_lo = inv_reg_inc_beta(tail, posterior.a, posterior.b, &cfg)?;
    let theta_hi = inv_reg_inc_beta(1.0 - tail, posterior.a, posterior.b, &cfg)?;
    Ok(CredibleInterval {
        level,
        lo: ve_from_theta(theta_hi, s_v, s_c)?,
        hi: ve_from_theta(theta_lo, s_v, s_c)?,
    })
}

/// VE at the posterior median of θ.
pub fn posterior_median_ve(posterior: BetaDistributionParams, s_v: f64, s_c: f64) -> Result<Efficacy> {
    let theta = inv_reg_inc_beta(0.5, posterior.a, posterior.b, &QuantileSolverConfig::default())?;
    ve_from_theta(theta, s_v, s_c)
}

/// Exact posterior mean of VE, using E[θ/(1-θ)] = a/(b-1).
pub fn posterior_mean_ve(posterior: BetaDistributionParams, s_v: f64, s_c: f64) -> Result<Efficacy> {
    if !(posterior.b > 1.0) {
        return Err(Error::domain(
            "posterior_mean_ve",
            format!("posterior mean of VE undefined for b = {} <= 1", posterior.b),
        ));
    }
    if !(s_v > 0.0 && s_c > 0.0) {
        return Err(Error::domain("posterior_mean_ve", "surveillance times must be positive"));
    }
    Efficacy::new(1.0 - (s_c / s_v) * posterior.a / (posterior.b - 1.0))
}

/// P(VE > threshold) = I_{θ*}(a, b) with θ* = θ(threshold).
pub fn posterior_prob_ve_above(
    threshold: Efficacy,
    posterior: BetaDistributionParams,
    s_v: f64,
    s_c: f64,
) -> Result<f64> {
    if !(threshold.value() < 1.0) {
        return Err(Error::domain("posterior_prob_ve_above", "threshold must be below 1"));
    }
    let theta = theta_from_ve(threshold, s_v, s_c)?;
    reg_inc_beta(theta, posterior.a, posterior.b)
}

/// Plug-in estimate 1 - (x_v/s_v)/(x_c/s_c).
pub fn irr_point_estimate(data: &TrialData) -> Result<Efficacy> {
    if data.x_c == 0 {
        return Err(Error::domain("irr_point_estimate", "no control-arm cases (x_c = 0)"));
    }
    let rate_v = data.x_v as f64 / data.s_v;
    let rate_c = data.x_c as f64 / data.s_c;
    Efficacy::new(1.0 - rate_v / rate_c)
}

/// Everything the conditional method reports for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalSummary {
    pub prior: BetaDistributionParams,
    pub posterior: BetaDistributionParams,
    /// `None` when the posterior `b <= 1`.
    pub mean_ve: Option<Efficacy>,
    pub median_ve: Efficacy,
    pub ci: CredibleInterval,
    pub prob_ve_above: Vec<ThresholdProbability>,
    /// `None` when `x_c = 0`.
    pub irr_point_estimate: Option<Efficacy>,
}

pub fn summarize_conditional(
    data: &TrialData,
    prior: BetaDistributionParams,
    level: f64,
    thresholds: &[f64],
) -> Result<ConditionalSummary> {
    let posterior = posterior_theta(prior, data.x_v, data.x_c);
    let (s_v, s_c) = (data.s_v, data.s_c);
    let prob_ve_above = thresholds
        .iter()
        .map(|&t| {
            Ok(ThresholdProbability {
                threshold: t,
                probability: posterior_prob_ve_above(Efficacy::new(t)?, posterior, s_v, s_c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalSummary {
        prior,
        posterior,
        mean_ve: posterior_mean_ve(posterior, s_v, s_c).ok(),
        median_ve: posterior_median_ve(posterior, s_v, s_c)?,
        ci: ve_credible_interval(posterior, s_v, s_c, level)?,
        prob_ve_above,
        irr_point_estimate: irr_point_estimate(data).ok(),
    })
}
