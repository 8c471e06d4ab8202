use serde::{Deserialize, Serialize};

use super::diagnostics::{effective_sample_size, split_rhat};
use super::sampler::PosteriorChain;
use crate::conditional::{CredibleInterval, ThresholdProbability};
use crate::error::{Error, Result};
use crate::model::Efficacy;

pub const MIN_RETAINED_DRAWS: usize = 1000;
const ACCEPTANCE_BAND: (f64, f64) = (0.05, 0.95);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub draws: usize,
    pub chains: usize,
    pub mean_ve: Efficacy,
    pub median_ve: Efficacy,
    pub sd_ve: f64,
    pub ci: CredibleInterval,
    pub prob_ve_above: Vec<ThresholdProbability>,
    /// `None` when every draw is identical.
    pub ess: Option<f64>,
    /// Monte Carlo standard error of `mean_ve`, from the ESS.
    pub mcse_mean: Option<f64>,
    /// Split-chain R-hat; reported as 1 with `r_hat_defined = false` when it
    /// cannot be computed.
    pub r_hat: f64,
    pub r_hat_defined: bool,
    pub acceptance_rates: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_chain(chain: &PosteriorChain, level: f64, thresholds: &[f64]) -> Result<PosteriorSummary> {
    if chain.is_empty() {
        return Err(Error::invalid("chain", "no retained draws"));
    }
    if chain.len() < MIN_RETAINED_DRAWS {
        return Err(Error::invalid(
            "chain",
            format!("{} retained draws; at least {MIN_RETAINED_DRAWS} are required", chain.len()),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain("summarize_chain", format!("level must lie in (0, 1), got {level}")));
    }

    let mut ve: Vec<f64> = chain.draws.iter().map(|d| d.ve).collect();
    let n = ve.len() as f64;
    let mean = ve.iter().sum::<f64>() / n;
    let sd = (ve.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    ve.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);

    let by_chain = chain.ve_by_chain();
    let ess = effective_sample_size(&by_chain);
    let rhat = if by_chain.len() >= 2 { split_rhat(&by_chain) } else { None };

    let mut warnings = Vec::new();
    for (i, &rate) in chain.acceptance_rates.iter().enumerate() {
        if !(ACCEPTANCE_BAND.0..=ACCEPTANCE_BAND.1).contains(&rate) {
            warnings.push(format!("chain {i}: acceptance rate {rate:.3} outside [0.05, 0.95]"));
        }
    }
    if rhat.is_none() {
        warnings.push("R-hat undefined (single chain or zero within-chain variance)".to_string());
    }

    let prob_ve_above = thresholds
        .iter()
        .map(|&t| ThresholdProbability {
            threshold: t,
            probability: ve.iter().filter(|&&v| v > t).count() as f64 / n,
        })
        .collect();

    Ok(PosteriorSummary {
        draws: ve.len(),
        chains: by_chain.len(),
        mean_ve: Efficacy::new(mean)?,
        median_ve: Efficacy::new(quantile_sorted(&ve, 0.5))?,
        sd_ve: sd,
        ci: CredibleInterval {
            level,
            lo: Efficacy::new(quantile_sorted(&ve, tail))?,
            hi: Efficacy::new(quantile_sorted(&ve, 1.0 - tail))?,
        },
        prob_ve_above,
        ess,
        mcse_mean: ess.map(|e| sd / e.sqrt()),
        r_hat: rhat.unwrap_or(1.0),
        r_hat_defined: rhat.is_some(),
        acceptance_rates: chain.acceptance_rates.clone(),
        warnings,
    })
}
