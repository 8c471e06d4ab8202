//! Frequentist coverage of the full-model credible interval on data simulated
//! from the model itself.

use rayon::prelude::*;
use ve_infer::full_bayes::{elicit_priors, sample_posterior, summarize_chain, LikelihoodConfig, McmcConfig};
use ve_infer::model::RatePair;
use ve_infer::rng::child_seed;
use ve_infer::simulate::simulate_trial;

#[test]
fn credible_interval_covers_true_efficacy() {
    const REPLICATIONS: u64 = 200;
    let lambda_c = 162.0 / 2222.0;
    let rates = RatePair::new(0.05 * lambda_c, lambda_c).unwrap();
    let priors = elicit_priors(0.3, 52.1428).unwrap();
    let covered: u64 = (0..REPLICATIONS)
        .into_par_iter()
        .map(|i| {
            let seed = child_seed(2024, i);
            let data = simulate_trial(17411, 17511, rates, 0.29, seed).unwrap();
            let cfg = McmcConfig {
                iterations: 6_000,
                burn_in: 2_000,
                seed,
                ..Default::default()
            };
            let chain = sample_posterior(&data, &priors, &cfg, &LikelihoodConfig::default()).unwrap();
            let s = summarize_chain(&chain, 0.95, &[]).unwrap();
            u64::from(s.ci.lo.value() <= 0.95 && 0.95 <= s.ci.hi.value())
        })
        .sum();
    let coverage = covered as f64 / REPLICATIONS as f64;
    // Binomial sd at 95% over 200 replications is about 0.015.
    assert!((0.90..=0.99).contains(&coverage), "coverage {coverage}");
}
