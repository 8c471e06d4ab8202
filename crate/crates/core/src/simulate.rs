//! Participant-level trial simulator and the numerical oracles built on it.
//!
//! Participants are recruited uniformly over `[0, D]` and followed until
//! infection or study end, so the censoring time is `C = D - U`. The
//! simulator is the Monte Carlo reference for the closed-form moments, and
//! the quadrature oracle integrates the survival-function representation
//! of the same moments independently of both.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::full_bayes::GammaPriorPair;
use crate::model::{RatePair, TrialData};
use crate::numerics::{integrate, reg_inc_beta};
use crate::rng::{stream, StreamDomain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticipantOutcome {
    /// Recruitment time U in [0, D].
    pub recruit_time: f64,
    /// Potential infection time T (infinite when λ = 0).
    pub event_time: f64,
    /// min(T, D - U).
    pub followup: f64,
    pub infected: bool,
}

pub fn simulate_participant<R: Rng + ?Sized>(lambda: f64, d: f64, rng: &mut R) -> ParticipantOutcome {
    let recruit_time = rng.gen::<f64>() * d;
    let event_time = if lambda > 0.0 {
        Distribution::<f64>::sample(&Exp1, rng) / lambda
    } else {
        f64::INFINITY
    };
    let censor = d - recruit_time;
    let infected = event_time < censor;
    ParticipantOutcome {
        recruit_time,
        event_time,
        followup: if infected { event_time } else { censor },
        infected,
    }
}

/// Cohort totals: surveillance person-years and infections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortTotals {
    pub surveillance: f64,
    pub cases: u64,
}

fn check_sim_inputs(n: u64, lambda: f64, d: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n", "cohort size must be at least 1"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", format!("rate must be finite and >= 0, got {lambda}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::invalid("d", format!("duration must be positive and finite, got {d}")));
    }
    Ok(())
}

pub fn simulate_cohort<R: Rng + ?Sized>(n: u64, lambda: f64, d: f64, rng: &mut R) -> Result<CohortTotals> {
    check_sim_inputs(n, lambda, d)?;
    let mut totals = CohortTotals {
        surveillance: 0.0,
        cases: 0,
    };
    for _ in 0..n {
        let p = simulate_participant(lambda, d, rng);
        totals.surveillance += p.followup;
        totals.cases += u64::from(p.infected);
    }
    Ok(totals)
}

/// Simulates both arms on disjoint streams (cohort 0 = vaccine, 1 = control).
pub fn simulate_trial(n_v: u64, n_c: u64, rates: RatePair, d: f64, seed: u64) -> Result<TrialData> {
    let vaccine = simulate_cohort(n_v, rates.lambda_v, d, &mut stream(seed, StreamDomain::Cohort, 0))?;
    let control = simulate_cohort(n_c, rates.lambda_c, d, &mut stream(seed, StreamDomain::Cohort, 1))?;
    TrialData::new(
        n_v,
        n_c,
        vaccine.surveillance,
        control.surveillance,
        vaccine.cases,
        control.cases,
        d,
    )
}

/// Monte Carlo moments of min(T, C) with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McMoments {
    pub replicates: u64,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// Asymptotic s.e. of the sample variance, `sqrt((m4 - s^4)/n)`.
    pub se_var: f64,
}

pub const MIN_MC_REPLICATES: u64 = 10_000;
const MC_BLOCK: u64 = 1 << 16;

pub fn mc_moments(replicates: u64, lambda: f64, d: f64, seed: u64) -> Result<McMoments> {
    if replicates < MIN_MC_REPLICATES {
        return Err(Error::invalid(
            "replicates",
            format!("need at least {MIN_MC_REPLICATES} replicates, got {replicates}"),
        ));
    }
    check_sim_inputs(1, lambda, d)?;
    let blocks = replicates.div_ceil(MC_BLOCK);
    let chunks: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, StreamDomain::MomentReplicates, b);
            let len = MC_BLOCK.min(replicates - b * MC_BLOCK);
            (0..len).map(|_| simulate_participant(lambda, d, &mut rng).followup).collect()
        })
        .collect();
    let n = replicates as f64;
    let mean = chunks.iter().flatten().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in chunks.iter().flatten() {
        let c = (x - mean) * (x - mean);
        m2 += c;
        m4 += c * c;
    }
    let variance = m2 / (n - 1.0);
    let central4 = m4 / n;
    let pop_var = m2 / n;
    Ok(McMoments {
        replicates,
        mean,
        variance,
        se_mean: (variance / n).sqrt(),
        se_var: ((central4 - pop_var * pop_var).max(0.0) / n).sqrt(),
    })
}

/// `E[min(T,C)^k] = ∫₀^D k x^{k-1} e^{-λx} (D - x)/D dx` by adaptive
/// Gauss–Kronrod quadrature, for `k` in {1, 2}.
pub fn quadrature_moment_oracle(lambda: f64, d: f64, k: u32) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain("quadrature_moment_oracle", format!("rate must be positive, got {lambda}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain("quadrature_moment_oracle", format!("duration must be positive, got {d}")));
    }
    if !(k == 1 || k == 2) {
        return Err(Error::domain("quadrature_moment_oracle", format!("order must be 1 or 2, got {k}")));
    }
    let kf = f64::from(k);
    let integrand = |x: f64| kf * x.powi(k as i32 - 1) * (-lambda * x).exp() * (d - x) / d;
    Ok(integrate(integrand, 0.0, d, 1e-12, 0.0, 5000)?.value)
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> Result<f64>>(samples: &mut [f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "empty sample"));
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut worst = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x)?;
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        worst = worst.max(above).max(below);
    }
    Ok(worst)
}

/// Draws independent `λ_v ~ Gamma(a_v, b_v)`, `λ_c ~ Gamma(a_c, b_c)`, forms
/// `b_v λ_v / (b_v λ_v + b_c λ_c)` and returns its KS distance to
/// Beta(a_v, a_c).
pub fn beta_representation_check(priors: &GammaPriorPair, n_samples: u64, seed: u64) -> Result<f64> {
    let mut ratios = gamma_ratio_samples(priors, n_samples, seed)?;
    ks_statistic(&mut ratios, |x| reg_inc_beta(x, priors.a_v, priors.a_c))
}

/// The raw ratio draws behind [`beta_representation_check`].
pub fn gamma_ratio_samples(priors: &GammaPriorPair, n_samples: u64, seed: u64) -> Result<Vec<f64>> {
    if n_samples < MIN_MC_REPLICATES {
        return Err(Error::invalid(
            "n_samples",
            format!("need at least {MIN_MC_REPLICATES} samples, got {n_samples}"),
        ));
    }
    let gamma = |shape: f64, rate: f64| {
        Gamma::new(shape, 1.0 / rate).map_err(|e| Error::invalid("priors", e.to_string()))
    };
    let gv = gamma(priors.a_v, priors.b_v)?;
    let gc = gamma(priors.a_c, priors.b_c)?;
    let mut rng_v = stream(seed, StreamDomain::GammaRatio, 0);
    let mut rng_c = stream(seed, StreamDomain::GammaRatio, 1);
    Ok((0..n_samples)
        .map(|_| {
            let wv = priors.b_v * gv.sample(&mut rng_v);
            let wc = priors.b_c * gc.sample(&mut rng_c);
            wv / (wv + wc)
        })
        .collect())
}
