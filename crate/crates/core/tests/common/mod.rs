//! Shared test oracles. Everything here is written from the model formulas
//! directly and does not call the library's likelihood code.

#![allow(dead_code)]

use ve_infer::full_bayes::GammaPriorPair;
use ve_infer::model::TrialData;

#[derive(Debug, Clone, Copy)]
pub struct OracleMode {
    /// Second moment as printed (`2e^{-x} + 4e^{-x}/x`) instead of the exact one.
    pub paper_second_moment: bool,
    /// Control-arm surveillance variance scaled by `n_v`.
    pub appendix_nv: bool,
}

pub const PAPER: OracleMode = OracleMode {
    paper_second_moment: true,
    appendix_nv: true,
};

pub const CORRECTED: OracleMode = OracleMode {
    paper_second_moment: false,
    appendix_nv: false,
};

fn followup_mean(lambda: f64, d: f64) -> f64 {
    let x = lambda * d;
    (1.0 + (-x).exp_m1() / x) / lambda
}

fn followup_var(lambda: f64, d: f64, paper: bool) -> f64 {
    let x = lambda * d;
    let e = (-x).exp();
    let second = if paper {
        (2.0 * e + 4.0 * e / x) / (lambda * lambda)
    } else {
        (2.0 + 2.0 * e + 4.0 * (-x).exp_m1() / x) / (lambda * lambda)
    };
    let m = followup_mean(lambda, d);
    second - m * m
}

/// Unnormalized log-posterior of (λ_v, λ_c); `None` where the surveillance
/// variance is not positive.
pub fn log_density(lv: f64, lc: f64, data: &TrialData, p: &GammaPriorPair, mode: OracleMode) -> Option<f64> {
    let prior = (p.a_v - 1.0) * lv.ln() - p.b_v * lv + (p.a_c - 1.0) * lc.ln() - p.b_c * lc;
    let n_var_c = if mode.appendix_nv { data.n_v } else { data.n_c } as f64;
    let var_v = data.n_v as f64 * followup_var(lv, data.d, mode.paper_second_moment);
    let var_c = n_var_c * followup_var(lc, data.d, mode.paper_second_moment);
    if !(var_v > 0.0 && var_c > 0.0) {
        return None;
    }
    let mean_v = data.n_v as f64 * followup_mean(lv, data.d);
    let mean_c = data.n_c as f64 * followup_mean(lc, data.d);
    let normal = -0.5 * var_v.ln() - (data.s_v - mean_v).powi(2) / (2.0 * var_v) - 0.5 * var_c.ln()
        - (data.s_c - mean_c).powi(2) / (2.0 * var_c);
    let mu = data.s_v * lv + data.s_c * lc;
    let total = data.total_cases() as f64;
    let poisson = total * mu.ln() - mu;
    let theta = data.s_v * lv / mu;
    let binom = data.x_v as f64 * theta.ln() + data.x_c as f64 * (1.0 - theta).ln();
    Some(prior + normal + poisson + binom)
}

#[derive(Debug, Clone, Copy)]
pub struct GridPosterior {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    /// Largest density on the grid boundary relative to the maximum.
    pub edge_ratio: f64,
}

/// VE posterior by midpoint quadrature over (λ_c, r = λ_v/λ_c), with the
/// Jacobian `λ_c`; VE = 1 - r.
pub fn grid_posterior(
    data: &TrialData,
    p: &GammaPriorPair,
    mode: OracleMode,
    lc_range: (f64, f64),
    r_range: (f64, f64),
    n: (usize, usize),
    level: f64,
) -> GridPosterior {
    let (nc, nr) = n;
    let hc = (lc_range.1 - lc_range.0) / nc as f64;
    let hr = (r_range.1 - r_range.0) / nr as f64;
    let mut logd = vec![f64::NEG_INFINITY; nc * nr];
    for i in 0..nc {
        let lc = lc_range.0 + (i as f64 + 0.5) * hc;
        for j in 0..nr {
            let r = r_range.0 + (j as f64 + 0.5) * hr;
            if let Some(v) = log_density(r * lc, lc, data, p, mode) {
                logd[i * nr + j] = v + lc.ln();
            }
        }
    }
    let max = logd.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut marginal = vec![0.0; nr];
    let mut edge: f64 = 0.0;
    for i in 0..nc {
        for j in 0..nr {
            let w = (logd[i * nr + j] - max).exp();
            marginal[j] += w;
            if i == 0 || i == nc - 1 || j == 0 || j == nr - 1 {
                edge = edge.max(w);
            }
        }
    }
    let total: f64 = marginal.iter().sum();
    let r_at = |j: usize| r_range.0 + (j as f64 + 0.5) * hr;
    let mean_r: f64 = marginal.iter().enumerate().map(|(j, w)| w * r_at(j)).sum::<f64>() / total;
    // CDF at cell edges, linearly interpolated within cells.
    let quantile = |q: f64| {
        let target = q * total;
        let mut acc = 0.0;
        for (j, w) in marginal.iter().enumerate() {
            if acc + w >= target {
                return r_range.0 + (j as f64 + (target - acc) / w) * hr;
            }
            acc += w;
        }
        r_range.1
    };
    let tail = (1.0 - level) / 2.0;
    GridPosterior {
        mean: 1.0 - mean_r,
        lo: 1.0 - quantile(1.0 - tail),
        hi: 1.0 - quantile(tail),
        edge_ratio: edge,
    }
}

/// Grid settings that cover the interim-analysis posterior.
pub fn interim_grid(data: &TrialData, p: &GammaPriorPair, mode: OracleMode) -> GridPosterior {
    let lc_range = if mode.paper_second_moment { (0.01, 0.2) } else { (0.04, 0.22) };
    grid_posterior(data, p, mode, lc_range, (1e-6, 0.4), (1000, 2000), 0.95)
}

/// Two-sample-free Kolmogorov–Smirnov distance of `samples` against `cdf`.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}
