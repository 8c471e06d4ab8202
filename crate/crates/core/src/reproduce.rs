//! Reproduction of the published interim-analysis numbers on the built-in
//! dataset, with a comparison table against the reported values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{run_analysis, AnalysisReport, McmcOverrides, Method, ResolvedRequest};
use crate::conditional::BetaDistributionParams;
use crate::datasets::{default_priors, mimic_priors, pfizer_interim, PFIZER_INTERIM};
use crate::error::Result;
use crate::full_bayes::{GammaPriorPair, LikelihoodConfig};

/// Published values, in percent.
pub mod reported {
    pub const MIMIC_MEAN: f64 = 93.7;
    pub const DEFAULT_MEAN: f64 = 93.6;
    pub const FULL_CI: (f64, f64) = (89.0, 97.0);
    pub const CONDITIONAL_CI: (f64, f64) = (90.3, 97.6);
    pub const IRR: f64 = 95.0;
}

/// Tolerances, in percentage points.
pub mod tolerance {
    pub const FULL_MEAN: f64 = 0.5;
    pub const FULL_CI: f64 = 1.0;
    pub const CONDITIONAL_CI: f64 = 0.2;
    pub const IRR: f64 = 0.1;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub run: String,
    pub quantity: String,
    pub reported: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ComparisonRow {
    fn new(run: &str, quantity: &str, reported: f64, computed: f64, tolerance: f64) -> Self {
        Self {
            run: run.to_string(),
            quantity: quantity.to_string(),
            reported,
            computed,
            tolerance,
            pass: (computed - reported).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub rows: Vec<ComparisonRow>,
    pub mimic: AnalysisReport,
    pub default_prior: AnalysisReport,
    pub conditional: AnalysisReport,
}

impl ReproductionReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Human-readable table, one decimal place.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:<10} {:>9} {:>9} {:>6}  {}",
            "run", "quantity", "reported", "computed", "tol", "status"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:<10} {:>9.1} {:>9.1} {:>6.1}  {}",
                r.run,
                r.quantity,
                r.reported,
                r.computed,
                r.tolerance,
                if r.pass { "ok" } else { "FAIL" }
            );
        }
        out
    }
}

fn full_request(priors: GammaPriorPair, seed: u64) -> ResolvedRequest {
    ResolvedRequest {
        dataset: Some(PFIZER_INTERIM.to_string()),
        data: pfizer_interim(),
        method: Method::Full,
        beta_prior: None,
        gamma_prior: Some(priors),
        level: 0.95,
        thresholds: vec![0.3],
        mcmc: McmcOverrides {
            seed: Some(seed),
            ..Default::default()
        }
        .resolve(None),
        likelihood: LikelihoodConfig::PAPER_COMPAT,
    }
}

pub fn mimic_request(seed: u64) -> ResolvedRequest {
    full_request(mimic_priors(), seed)
}

pub fn default_prior_request(seed: u64) -> ResolvedRequest {
    full_request(default_priors(), seed)
}

pub fn conditional_request(seed: u64) -> ResolvedRequest {
    ResolvedRequest {
        method: Method::Conditional,
        beta_prior: Some(BetaDistributionParams::PFIZER),
        gamma_prior: None,
        ..full_request(mimic_priors(), seed)
    }
}

fn full_rows(run: &str, report: &AnalysisReport, reported_mean: f64) -> Vec<ComparisonRow> {
    let Some(full) = &report.full else { return Vec::new() };
    let p = &full.posterior;
    vec![
        ComparisonRow::new(run, "mean", reported_mean, p.mean_ve.percent(), tolerance::FULL_MEAN),
        ComparisonRow::new(run, "ci_lo", reported::FULL_CI.0, p.ci.lo.percent(), tolerance::FULL_CI),
        ComparisonRow::new(run, "ci_hi", reported::FULL_CI.1, p.ci.hi.percent(), tolerance::FULL_CI),
    ]
}

/// Runs the mimic-prior and default-prior full-model analyses and the
/// conditional analysis, and compares each against the published values.
pub fn reproduce(seed: u64) -> Result<ReproductionReport> {
    let (mimic, _) = run_analysis(&mimic_request(seed))?;
    let (default_prior, _) = run_analysis(&default_prior_request(seed))?;
    let (conditional, _) = run_analysis(&conditional_request(seed))?;

    let mut rows = full_rows("mimic", &mimic, reported::MIMIC_MEAN);
    rows.extend(full_rows("default", &default_prior, reported::DEFAULT_MEAN));
    if let Some(c) = &conditional.conditional {
        rows.push(ComparisonRow::new(
            "conditional",
            "ci_lo",
            reported::CONDITIONAL_CI.0,
            c.ci.lo.percent(),
            tolerance::CONDITIONAL_CI,
        ));
        rows.push(ComparisonRow::new(
            "conditional",
            "ci_hi",
            reported::CONDITIONAL_CI.1,
            c.ci.hi.percent(),
            tolerance::CONDITIONAL_CI,
        ));
        let irr = c.irr_point_estimate.map_or(f64::NAN, |e| e.percent());
        rows.push(ComparisonRow::new("conditional", "irr", reported::IRR, irr, tolerance::IRR));
    }
    Ok(ReproductionReport {
        rows,
        mimic,
        default_prior,
        conditional,
    })
}
