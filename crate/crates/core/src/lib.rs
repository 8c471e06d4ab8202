//! Vaccine-efficacy estimation from case counts and surveillance time.
//!
//! Two estimators are provided:
//!
//! * the conditional method, which conditions on the total number of cases
//!   and puts a Beta prior on the vaccine-arm share `θ` ([`conditional`]);
//! * a full Bayesian model over both infection rates with Gamma priors,
//!   Normal surveillance-time terms, and a Poisson/Binomial case likelihood,
//!   sampled by adaptive random-walk Metropolis ([`full_bayes`]).
//!
//! [`simulate`] and [`validation`] hold the trial simulator and the Monte
//! Carlo and quadrature oracles used to check the closed-form moments.
//! All numerics (log-gamma, incomplete beta and its inverse, quadrature)
//! are self-contained in [`numerics`].
//!
//! ```
//! use ve_infer::conditional::{posterior_theta, ve_credible_interval, BetaDistributionParams};
//!
//! let post = posterior_theta(BetaDistributionParams::PFIZER, 8, 162);
//! let ci = ve_credible_interval(post, 2214.0, 2222.0, 0.95).unwrap();
//! assert_eq!(format!("{}", ci.lo), "90.3%");
//! assert_eq!(format!("{}", ci.hi), "97.6%");
//! ```

pub mod analysis;
pub mod conditional;
pub mod datasets;
pub mod error;
pub mod full_bayes;
pub mod model;
pub mod moments;
pub mod numerics;
pub mod reproduce;
pub mod rng;
pub mod simulate;
pub mod validation;

pub use analysis::{parse_request, run_analysis, AnalysisReport, AnalysisRequest, Method};
pub use conditional::{BetaDistributionParams, ConditionalSummary, CredibleInterval};
pub use error::{Error, Result};
pub use full_bayes::{GammaPriorPair, LikelihoodConfig, McmcConfig, PosteriorChain, PosteriorSummary};
pub use model::{Efficacy, RatePair, TrialData};
pub use moments::MomentMode;
