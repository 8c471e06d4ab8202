//! The full Bayesian model over the two infection rates: priors and their
//! elicitation, the log-posterior, an adaptive Metropolis sampler, and
//! posterior summaries with convergence diagnostics.

pub mod diagnostics;
pub mod likelihood;
pub mod priors;
pub mod sampler;
pub mod summary;

pub use likelihood::{
    log_posterior, log_posterior_terms, LikelihoodConfig, LikelihoodTerms, LogPosteriorTerms, VarianceNSource,
};
pub use priors::{elicit_priors, prior_mean_ve, GammaPriorPair};
pub use sampler::{sample_log_density, sample_posterior, Draw, McmcConfig, PosteriorChain, DEFAULT_SEED};
pub use summary::{summarize_chain, PosteriorSummary};
