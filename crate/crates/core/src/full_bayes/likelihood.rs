//! Log-posterior of the full model over (λ_v, λ_c):
//!
//! ```text
//! λ_v ~ Gamma(a_v, b_v)            λ_c ~ Gamma(a_c, b_c)
//! s_v | λ_v ~ Normal(n_v E_v, n Var_v)   s_c | λ_c ~ Normal(n_c E_c, n Var_c)
//! x_v + x_c | s, λ ~ Poisson(s_v λ_v + s_c λ_c)
//! x_v | x_v + x_c, s, λ ~ Binomial(x_v + x_c, s_v λ_v / (s_v λ_v + s_c λ_c))
//! ```
//!
//! where `E`, `Var` are the follow-up moments from [`crate::moments`] and the
//! `n` multiplying the variance depends on [`VarianceNSource`].

use serde::{Deserialize, Serialize};

use super::priors::GammaPriorPair;
use crate::error::{Error, Result};
use crate::model::TrialData;
use crate::moments::{surveillance_mean, surveillance_variance, MomentMode};
use crate::numerics::{binomial_logpmf, gamma_logpdf, normal_logpdf, poisson_logpmf};

/// Which cohort size scales each cohort's surveillance variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum VarianceNSource {
    /// Each cohort uses its own size.
    #[default]
    #[serde(rename = "per-cohort")]
    PerCohort,
    /// Both cohorts use `n_v`, as the original BUGS program does
    /// (`tausc <- 1/(nv*varsc)`).
    #[serde(rename = "appendix-nv")]
    AppendixNv,
}

impl std::fmt::Display for VarianceNSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VarianceNSource::PerCohort => "per-cohort",
            VarianceNSource::AppendixNv => "appendix-nv",
        })
    }
}

/// Switches for the likelihood factors. Priors are always included, so
/// turning everything off samples the prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LikelihoodTerms {
    pub surveillance: bool,
    pub total_cases: bool,
    pub split: bool,
}

impl Default for LikelihoodTerms {
    fn default() -> Self {
        Self {
            surveillance: true,
            total_cases: true,
            split: true,
        }
    }
}

impl LikelihoodTerms {
    pub const PRIOR_ONLY: LikelihoodTerms = LikelihoodTerms {
        surveillance: false,
        total_cases: false,
        split: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LikelihoodConfig {
    pub moment_mode: MomentMode,
    pub variance_n_source: VarianceNSource,
    pub terms: LikelihoodTerms,
}

impl LikelihoodConfig {
    /// Settings that match the published BUGS program.
    pub const PAPER_COMPAT: LikelihoodConfig = LikelihoodConfig {
        moment_mode: MomentMode::PaperCompat,
        variance_n_source: VarianceNSource::AppendixNv,
        terms: LikelihoodTerms {
            surveillance: true,
            total_cases: true,
            split: true,
        },
    };
}

/// The six additive pieces of the log-posterior. Disabled terms are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogPosteriorTerms {
    pub prior_v: f64,
    pub prior_c: f64,
    pub surveillance_v: f64,
    pub surveillance_c: f64,
    pub total_cases: f64,
    pub split: f64,
}

impl LogPosteriorTerms {
    pub fn total(&self) -> f64 {
        self.prior_v + self.prior_c + self.surveillance_v + self.surveillance_c + self.total_cases + self.split
    }
}

fn finite(term: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::numerical("log_posterior", format!("{term} term is not finite ({v})")))
    }
}

fn term_error(term: &'static str, e: Error) -> Error {
    Error::numerical("log_posterior", format!("{term} term: {e}"))
}

pub fn log_prior_term(lambda: f64, shape: f64, rate: f64) -> Result<f64> {
    gamma_logpdf(lambda, shape, rate)
}

/// Normal log density of a cohort's surveillance total.
///
/// `n_mean` scales the per-participant mean, `n_var` the variance.
pub fn log_surveillance_term(
    s: f64,
    n_mean: u64,
    n_var: u64,
    lambda: f64,
    d: f64,
    mode: MomentMode,
) -> Result<f64> {
    let mean = surveillance_mean(lambda, d)?;
    let var = surveillance_variance(lambda, d, mode)?;
    let total_var = n_var as f64 * var;
    if !(total_var > 0.0) {
        return Err(Error::numerical(
            "log_surveillance_term",
            format!("nonpositive surveillance variance {total_var:e} at lambda={lambda} ({mode} mode)"),
        ));
    }
    normal_logpdf(s, n_mean as f64 * mean, total_var)
}

/// Poisson log mass of the total case count given mean `s_v λ_v + s_c λ_c`.
pub fn log_total_cases_term(data: &TrialData, lambda_v: f64, lambda_c: f64) -> Result<f64> {
    poisson_logpmf(data.total_cases(), data.s_v * lambda_v + data.s_c * lambda_c)
}

/// Binomial log mass of the vaccine-arm share of cases.
pub fn log_split_term(data: &TrialData, lambda_v: f64, lambda_c: f64) -> Result<f64> {
    let weighted_v = data.s_v * lambda_v;
    let theta = weighted_v / (weighted_v + data.s_c * lambda_c);
    binomial_logpmf(data.x_v, data.total_cases(), theta)
}

pub fn log_posterior_terms(
    lambda_v: f64,
    lambda_c: f64,
    data: &TrialData,
    priors: &GammaPriorPair,
    cfg: &LikelihoodConfig,
) -> Result<LogPosteriorTerms> {
    if !(lambda_v > 0.0 && lambda_v.is_finite()) || !(lambda_c > 0.0 && lambda_c.is_finite()) {
        return Err(Error::domain(
            "log_posterior",
            format!("rates must be positive and finite, got ({lambda_v}, {lambda_c})"),
        ));
    }
    let prior_v = finite("prior_v", log_prior_term(lambda_v, priors.a_v, priors.b_v)?)?;
    let prior_c = finite("prior_c", log_prior_term(lambda_c, priors.a_c, priors.b_c)?)?;

    let (surveillance_v, surveillance_c) = if cfg.terms.surveillance {
        let n_var_c = match cfg.variance_n_source {
            VarianceNSource::PerCohort => data.n_c,
            VarianceNSource::AppendixNv => data.n_v,
        };
        let v = log_surveillance_term(data.s_v, data.n_v, data.n_v, lambda_v, data.d, cfg.moment_mode)
            .map_err(|e| term_error("surveillance_v", e))?;
        let c = log_surveillance_term(data.s_c, data.n_c, n_var_c, lambda_c, data.d, cfg.moment_mode)
            .map_err(|e| term_error("surveillance_c", e))?;
        (finite("surveillance_v", v)?, finite("surveillance_c", c)?)
    } else {
        (0.0, 0.0)
    };

    let total_cases = if cfg.terms.total_cases {
        finite("total_cases", log_total_cases_term(data, lambda_v, lambda_c)?)?
    } else {
        0.0
    };
    let split = if cfg.terms.split {
        finite("split", log_split_term(data, lambda_v, lambda_c)?)?
    } else {
        0.0
    };

    Ok(LogPosteriorTerms {
        prior_v,
        prior_c,
        surveillance_v,
        surveillance_c,
        total_cases,
        split,
    })
}

/// Unnormalized log-posterior density of (λ_v, λ_c).
pub fn log_posterior(
    lambda_v: f64,
    lambda_c: f64,
    data: &TrialData,
    priors: &GammaPriorPair,
    cfg: &LikelihoodConfig,
) -> Result<f64> {
    Ok(log_posterior_terms(lambda_v, lambda_c, data, priors, cfg)?.total())
}
