//! Analysis requests and reports: the JSON surface shared by the CLI and the
//! C API.
//!
//! A request names the data (inline or a built-in dataset), the method(s) and
//! their settings; anything omitted is filled with defaults. The report
//! echoes the fully resolved request, so feeding `report.request` back in
//! reproduces the same numbers.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::conditional::{summarize_conditional, BetaDistributionParams, ConditionalSummary};
use crate::datasets;
use crate::error::{Error, Result};
use crate::full_bayes::{
    prior_mean_ve, sample_posterior, summarize_chain, GammaPriorPair, LikelihoodConfig, McmcConfig, PosteriorChain,
    PosteriorSummary, DEFAULT_SEED,
};
use crate::model::{Efficacy, TrialData};
use crate::full_bayes::VarianceNSource;
use crate::moments::MomentMode;

pub const SEED_ENV_VAR: &str = "VE_INFER_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Conditional,
    Full,
    #[default]
    Both,
}

impl Method {
    pub fn includes_conditional(self) -> bool {
        matches!(self, Method::Conditional | Method::Both)
    }

    pub fn includes_full(self) -> bool {
        matches!(self, Method::Full | Method::Both)
    }
}

/// Partial MCMC settings; unset fields take [`McmcConfig::default`] values
/// (the seed falls back to `VE_INFER_SEED`, then the built-in default).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcOverrides {
    pub chains: Option<usize>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub seed: Option<u64>,
    pub target_acceptance: Option<f64>,
    pub initial_step: Option<f64>,
}

impl McmcOverrides {
    /// Field-wise `self` if set, else `other`.
    pub fn or(self, other: McmcOverrides) -> McmcOverrides {
        McmcOverrides {
            chains: self.chains.or(other.chains),
            iterations: self.iterations.or(other.iterations),
            burn_in: self.burn_in.or(other.burn_in),
            seed: self.seed.or(other.seed),
            target_acceptance: self.target_acceptance.or(other.target_acceptance),
            initial_step: self.initial_step.or(other.initial_step),
        }
    }

    pub fn resolve(self, env_seed: Option<u64>) -> McmcConfig {
        let d = McmcConfig::default();
        McmcConfig {
            chains: self.chains.unwrap_or(d.chains),
            iterations: self.iterations.unwrap_or(d.iterations),
            burn_in: self.burn_in.unwrap_or(d.burn_in),
            seed: self.seed.or(env_seed).unwrap_or(DEFAULT_SEED),
            target_acceptance: self.target_acceptance.unwrap_or(d.target_acceptance),
            initial_step: self.initial_step.unwrap_or(d.initial_step),
        }
    }
}

fn default_level() -> f64 {
    0.95
}

fn default_thresholds() -> Vec<f64> {
    vec![0.3]
}

/// Incoming request, as written by a user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<TrialData>,
    #[serde(default)]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_prior: Option<BetaDistributionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_prior: Option<GammaPriorPair>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default)]
    pub mcmc: McmcOverrides,
    #[serde(default)]
    pub likelihood: LikelihoodConfig,
}

/// A request with every default filled in. Serializes to a valid
/// [`AnalysisRequest`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRequest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    pub data: TrialData,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_prior: Option<BetaDistributionParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_prior: Option<GammaPriorPair>,
    pub level: f64,
    pub thresholds: Vec<f64>,
    pub mcmc: McmcConfig,
    pub likelihood: LikelihoodConfig,
}

/// Parses a request, reporting the JSON path and position of any problem.
pub fn parse_request(text: &str) -> Result<AnalysisRequest> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "?" || path == "." {
            Error::invalid("request", inner.to_string())
        } else {
            Error::invalid("request", format!("at `{path}`: {inner}"))
        }
    })
}

pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Error::invalid("VE_INFER_SEED", format!("not an unsigned integer: {v:?}"))),
        Err(_) => Ok(None),
    }
}

impl AnalysisRequest {
    pub fn resolve(&self, env_seed: Option<u64>) -> Result<ResolvedRequest> {
        let named = match &self.dataset {
            Some(name) => Some(datasets::builtin(name).ok_or_else(|| {
                Error::invalid(
                    "dataset",
                    format!("unknown dataset {name:?}; built-ins: {}", datasets::builtin_names().join(", ")),
                )
            })?),
            None => None,
        };
        // Both may be present (as in a report echo) as long as they agree.
        let data = match (self.data, named) {
            (Some(d), Some(b)) if d != b => {
                return Err(Error::invalid("data", "inline data differs from the named dataset"));
            }
            (Some(d), _) | (None, Some(d)) => d,
            (None, None) => return Err(Error::invalid("data", "request needs `data` or `dataset`")),
        };
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid("level", format!("must lie in (0, 1), got {}", self.level)));
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(t.is_finite() && **t < 1.0)) {
            return Err(Error::invalid("thresholds", format!("each threshold must be finite and < 1, got {t}")));
        }
        let gamma_prior = if self.method.includes_full() {
            Some(self.gamma_prior.ok_or_else(|| {
                Error::invalid("gamma_prior", "required when method is `full` or `both`")
            })?)
        } else {
            None
        };
        let beta_prior = self
            .method
            .includes_conditional()
            .then(|| self.beta_prior.unwrap_or_default());
        let mcmc = self.mcmc.resolve(env_seed);
        if self.method.includes_full() {
            mcmc.validate()?;
        }
        Ok(ResolvedRequest {
            dataset: self.dataset.clone(),
            data,
            method: self.method,
            beta_prior,
            gamma_prior,
            level: self.level,
            thresholds: self.thresholds.clone(),
            mcmc,
            likelihood: self.likelihood,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullModelSummary {
    /// Prior mean of VE, when it exists (`a_c > 1`).
    pub prior_mean_ve: Option<Efficacy>,
    #[serde(flatten)]
    pub posterior: PosteriorSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub moment_mode: MomentMode,
    pub variance_n_source: VarianceNSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub request: ResolvedRequest,
    pub conditional: Option<ConditionalSummary>,
    pub full: Option<FullModelSummary>,
    pub provenance: Provenance,
    pub duration_seconds: f64,
}

/// Runs the requested analyses. The chain is returned when the full model ran.
pub fn run_analysis(req: &ResolvedRequest) -> Result<(AnalysisReport, Option<PosteriorChain>)> {
    let started = Instant::now();
    let conditional = match req.beta_prior {
        Some(prior) => Some(summarize_conditional(&req.data, prior, req.level, &req.thresholds)?),
        None => None,
    };
    let (full, chain) = match req.gamma_prior {
        Some(priors) => {
            let chain = sample_posterior(&req.data, &priors, &req.mcmc, &req.likelihood)?;
            let posterior = summarize_chain(&chain, req.level, &req.thresholds)?;
            let summary = FullModelSummary {
                prior_mean_ve: prior_mean_ve(&priors).ok(),
                posterior,
            };
            (Some(summary), Some(chain))
        }
        None => (None, None),
    };
    let report = AnalysisReport {
        request: req.clone(),
        conditional,
        full,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: req.mcmc.seed,
            moment_mode: req.likelihood.moment_mode,
            variance_n_source: req.likelihood.variance_n_source,
        },
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    Ok((report, chain))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_conditional_request() {
        let req = parse_request(r#"{"dataset": "pfizer-c4591001-interim", "method": "conditional"}"#).unwrap();
        let resolved = req.resolve(None).unwrap();
        assert_eq!(resolved.beta_prior, Some(BetaDistributionParams::PFIZER));
        assert!(resolved.gamma_prior.is_none());
        assert_eq!(resolved.mcmc.seed, DEFAULT_SEED);
        let (report, chain) = run_analysis(&resolved).unwrap();
        assert!(chain.is_none() && report.full.is_none());
        let ci = report.conditional.unwrap().ci;
        assert!((ci.lo.value() - 0.903).abs() < 0.002);
    }

    #[test]
    fn full_requires_gamma_prior() {
        let req = parse_request(r#"{"dataset": "pfizer-c4591001-interim"}"#).unwrap();
        match req.resolve(None) {
            Err(Error::InvalidInput { field, .. }) => assert_eq!(field, "gamma_prior"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse_request("{\n  \"data\": {\"n_v\": \"many\"}\n}").unwrap_err().to_string();
        assert!(err.contains("data.n_v"), "{err}");
        assert!(err.contains("line 2"), "{err}");
        let err = parse_request("{bad").unwrap_err().to_string();
        assert!(err.contains("line 1 column 2"), "{err}");
        assert!(parse_request(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn seed_precedence() {
        let set = McmcOverrides {
            seed: Some(5),
            ..Default::default()
        };
        assert_eq!(set.resolve(Some(9)).seed, 5);
        assert_eq!(McmcOverrides::default().resolve(Some(9)).seed, 9);
        assert_eq!(McmcOverrides::default().resolve(None).seed, DEFAULT_SEED);
        let flag = McmcOverrides {
            seed: Some(1),
            ..Default::default()
        };
        assert_eq!(flag.or(set).resolve(None).seed, 1);
    }

    #[test]
    fn resolved_request_round_trips_as_request() {
        let req = parse_request(
            r#"{"dataset": "pfizer-c4591001-interim", "gamma_prior": {"a_v":0.7,"b_v":2214,"a_c":1,"b_c":2222},
                "mcmc": {"iterations": 3000, "burn_in": 1000}}"#,
        )
        .unwrap();
        let resolved = req.resolve(Some(77)).unwrap();
        let echoed = serde_json::to_string(&resolved).unwrap();
        let r2 = parse_request(&echoed).unwrap().resolve(None).unwrap();
        assert_eq!(r2, resolved);
        let mut conflicting = parse_request(&echoed).unwrap();
        conflicting.data.as_mut().unwrap().x_v = 9;
        assert!(conflicting.resolve(None).is_err());
    }

    #[test]
    fn rejects_bad_level_and_thresholds() {
        let mut req = parse_request(r#"{"dataset": "pfizer-c4591001-interim", "method": "conditional"}"#).unwrap();
        req.level = 1.0;
        assert!(req.resolve(None).is_err());
        req.level = 0.9;
        req.thresholds = vec![1.0];
        assert!(req.resolve(None).is_err());
    }
}
