//! Adaptive random-walk Metropolis on (ln λ_v, ln λ_c).
//!
//! Each chain runs on its own RNG stream. During burn-in the proposal is a
//! diagonal Gaussian whose overall scale follows a Robbins–Monro recursion
//! toward the target acceptance rate; halfway through burn-in the per-axis
//! scales are reset from the empirical spread of the second burn-in quarter.
//! After burn-in the proposal is frozen, so retained draws come from a fixed
//! Metropolis kernel.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::likelihood::{log_posterior, LikelihoodConfig};
use super::priors::GammaPriorPair;
use crate::error::{Error, Result};
use crate::model::TrialData;
use crate::rng::{stream, StreamDomain};

pub const DEFAULT_SEED: u64 = 20_201_118;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub chains: usize,
    /// Iterations per chain, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub target_acceptance: f64,
    /// Initial proposal standard deviation on the log-rate scale.
    pub initial_step: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            iterations: 50_000,
            burn_in: 10_000,
            seed: DEFAULT_SEED,
            target_acceptance: 0.35,
            initial_step: 0.1,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::invalid("chains", format!("need at least 2 chains for R-hat, got {}", self.chains)));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::invalid(
                "burn_in",
                format!("burn-in ({}) must be smaller than iterations ({})", self.burn_in, self.iterations),
            ));
        }
        if !(self.target_acceptance > 0.1 && self.target_acceptance < 0.6) {
            return Err(Error::invalid(
                "target_acceptance",
                format!("must lie in (0.1, 0.6), got {}", self.target_acceptance),
            ));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::invalid("initial_step", format!("must be positive, got {}", self.initial_step)));
        }
        Ok(())
    }

    pub fn retained_per_chain(&self) -> usize {
        self.iterations - self.burn_in
    }
}

/// One retained draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub chain: u32,
    pub iteration: u64,
    pub lambda_v: f64,
    pub lambda_c: f64,
    /// Always exactly `1 - lambda_v / lambda_c`.
    pub ve: f64,
    pub log_posterior: f64,
}

impl Draw {
    pub fn new(chain: u32, iteration: u64, lambda_v: f64, lambda_c: f64, log_posterior: f64) -> Result<Self> {
        if !(lambda_v > 0.0 && lambda_c > 0.0) {
            return Err(Error::invalid("draw", format!("rates must be positive, got ({lambda_v}, {lambda_c})")));
        }
        Ok(Self {
            chain,
            iteration,
            lambda_v,
            lambda_c,
            ve: 1.0 - lambda_v / lambda_c,
            log_posterior,
        })
    }
}

/// Retained draws of all chains, ordered by chain then iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub draws: Vec<Draw>,
    /// Post-burn-in acceptance rate of each chain, indexed by chain id.
    pub acceptance_rates: Vec<f64>,
}

pub const CHAIN_CSV_HEADER: &str = "chain,iter,lambda_v,lambda_c,ve,log_post";

impl PosteriorChain {
    pub fn new(draws: Vec<Draw>, acceptance_rates: Vec<f64>) -> Self {
        Self {
            draws,
            acceptance_rates,
        }
    }

    pub fn num_chains(&self) -> usize {
        self.draws.iter().map(|d| d.chain as usize + 1).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// VE draws grouped by chain id.
    pub fn ve_by_chain(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); self.num_chains()];
        for d in &self.draws {
            out[d.chain as usize].push(d.ve);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CHAIN_CSV_HEADER}")?;
        for d in &self.draws {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                d.chain, d.iteration, d.lambda_v, d.lambda_c, d.ve, d.log_posterior
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Welford {
    count: f64,
    mean: [f64; 2],
    m2: [f64; 2],
}

impl Welford {
    fn push(&mut self, x: [f64; 2]) {
        self.count += 1.0;
        for i in 0..2 {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta / self.count;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    fn std_dev(&self) -> [f64; 2] {
        [0, 1].map(|i| (self.m2[i] / (self.count - 1.0)).sqrt())
    }
}

struct ChainOutput {
    draws: Vec<Draw>,
    acceptance: f64,
}

fn run_chain<F>(target: &F, init: [f64; 2], chain: u32, cfg: &McmcConfig) -> Result<ChainOutput>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let mut rng = stream(cfg.seed, StreamDomain::Chain, u64::from(chain));
    // Log-density on the log scale picks up the Jacobian ln λ_v + ln λ_c.
    let eval = |x: [f64; 2]| -> Option<(f64, f64)> {
        let (lv, lc) = (x[0].exp(), x[1].exp());
        match target(lv, lc) {
            Ok(lp) if lp.is_finite() => Some((lp, lp + x[0] + x[1])),
            _ => None,
        }
    };

    let mut state = [init[0].ln(), init[1].ln()];
    let (mut lp, mut lp_log) = eval(state).ok_or_else(|| {
        Error::numerical(
            "sample_posterior",
            format!("log-posterior is not finite at the initial state ({}, {})", init[0], init[1]),
        )
    })?;

    let mut scales = [cfg.initial_step; 2];
    let mut log_mult = 0.0_f64;
    let mut rm_step = 0_u64;
    let mut spread = Welford::default();
    let window = (cfg.burn_in / 4, cfg.burn_in / 2);

    let retained = cfg.retained_per_chain();
    let mut draws = Vec::with_capacity(retained);
    let mut accepted = 0_usize;

    for it in 0..cfg.iterations {
        let mult = log_mult.exp();
        let proposal = [0, 1].map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            state[i] + mult * scales[i] * z
        });
        let u: f64 = rng.gen();
        let (accept, alpha) = match eval(proposal) {
            Some((p_lp, p_lp_log)) => {
                let log_ratio = p_lp_log - lp_log;
                let alpha = log_ratio.min(0.0).exp();
                if u < alpha {
                    state = proposal;
                    lp = p_lp;
                    lp_log = p_lp_log;
                    (true, alpha)
                } else {
                    (false, alpha)
                }
            }
            None => (false, 0.0),
        };

        if it < cfg.burn_in {
            rm_step += 1;
            log_mult += (rm_step as f64).powf(-0.6) * (alpha - cfg.target_acceptance);
            log_mult = log_mult.clamp(-30.0, 30.0);
            if it >= window.0 && it < window.1 {
                spread.push(state);
            }
            if it + 1 == window.1 && spread.count >= 100.0 {
                let sd = spread.std_dev();
                if sd.iter().all(|s| s.is_finite() && *s > 0.0) {
                    scales = sd;
                    log_mult = (2.38 / std::f64::consts::SQRT_2).ln();
                    rm_step = 0;
                }
            }
        } else {
            if accept {
                accepted += 1;
            }
            draws.push(Draw::new(chain, it as u64, state[0].exp(), state[1].exp(), lp)?);
        }
    }

    Ok(ChainOutput {
        draws,
        acceptance: accepted as f64 / retained as f64,
    })
}

/// Runs all chains on an arbitrary log-density over (λ_v, λ_c).
pub fn sample_log_density<F>(target: F, init: (f64, f64), cfg: &McmcConfig) -> Result<PosteriorChain>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if !(init.0 > 0.0 && init.1 > 0.0) {
        return Err(Error::invalid("init", "initial rates must be positive"));
    }
    let outputs = (0..cfg.chains as u32)
        .into_par_iter()
        .map(|c| run_chain(&target, [init.0, init.1], c, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut draws = Vec::with_capacity(cfg.chains * cfg.retained_per_chain());
    let mut acceptance_rates = Vec::with_capacity(cfg.chains);
    for out in outputs {
        draws.extend(out.draws);
        acceptance_rates.push(out.acceptance);
    }
    Ok(PosteriorChain::new(draws, acceptance_rates))
}

/// Initial state `((x_v + 0.5)/s_v, (x_c + 0.5)/s_c)`.
pub fn initial_rates(data: &TrialData) -> (f64, f64) {
    ((data.x_v as f64 + 0.5) / data.s_v, (data.x_c as f64 + 0.5) / data.s_c)
}

/// Samples the full-model posterior of (λ_v, λ_c).
pub fn sample_posterior(
    data: &TrialData,
    priors: &GammaPriorPair,
    cfg: &McmcConfig,
    lik: &LikelihoodConfig,
) -> Result<PosteriorChain> {
    sample_log_density(|lv, lc| log_posterior(lv, lc, data, priors, lik), initial_rates(data), cfg)
}
