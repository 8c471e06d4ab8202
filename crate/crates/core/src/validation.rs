//! Moment-formula validation harness: closed-form follow-up moments against
//! quadrature and Monte Carlo, over a grid of `(λ, d)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{surveillance_mean, surveillance_variance, MomentMode};
use crate::rng::child_seed;
use crate::simulate::{mc_moments, quadrature_moment_oracle};

/// Relative tolerance between the closed-form mean and quadrature.
pub const QUADRATURE_REL_TOL: f64 = 1e-9;
/// Monte Carlo agreement band, in standard errors.
pub const MC_SE_BAND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda: f64,
    pub d: f64,
}

/// 50 points with `λd` log-spaced over `[1e-4, 50]`; durations cycle through
/// a few values so both scales vary.
pub fn default_moment_grid() -> Vec<GridPoint> {
    const N: usize = 50;
    const DURATIONS: [f64; 5] = [0.29, 1.0, 2.0, 0.5, 5.0];
    let (lo, hi) = (1e-4f64.ln(), 50f64.ln());
    (0..N)
        .map(|i| {
            let x = (lo + (hi - lo) * i as f64 / (N - 1) as f64).exp();
            let d = DURATIONS[i % DURATIONS.len()];
            GridPoint { lambda: x / d, d }
        })
        .collect()
}

/// Cartesian product of rate and duration lists.
pub fn product_grid(lambdas: &[f64], durations: &[f64]) -> Result<Vec<GridPoint>> {
    if lambdas.is_empty() || durations.is_empty() {
        return Err(Error::invalid("grid", "rate and duration lists must be non-empty"));
    }
    Ok(lambdas
        .iter()
        .flat_map(|&lambda| durations.iter().map(move |&d| GridPoint { lambda, d }))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub lambda: f64,
    pub d: f64,
    pub lambda_d: f64,
    pub mean_closed_form: f64,
    pub mean_quadrature: f64,
    pub mean_mc: f64,
    pub mean_mc_se: f64,
    pub var_corrected: f64,
    pub var_paper: f64,
    pub var_quadrature: f64,
    pub var_mc: f64,
    pub var_mc_se: f64,
    pub mean_quadrature_pass: bool,
    pub mean_mc_pass: bool,
    pub corrected_pass: bool,
    pub paper_pass: bool,
}

impl MomentRow {
    /// Everything the corrected formulas claim holds at this point.
    pub fn corrected_row_passes(&self) -> bool {
        self.mean_quadrature_pass && self.mean_mc_pass && self.corrected_pass
    }
}

fn within_se(value: f64, estimate: f64, se: f64) -> bool {
    value.is_finite() && (value - estimate).abs() <= MC_SE_BAND * se
}

pub fn validate_point(p: GridPoint, replicates: u64, seed: u64) -> Result<MomentRow> {
    let mean = surveillance_mean(p.lambda, p.d)?;
    let mean_q = quadrature_moment_oracle(p.lambda, p.d, 1)?;
    let second_q = quadrature_moment_oracle(p.lambda, p.d, 2)?;
    let var_corrected = surveillance_variance(p.lambda, p.d, MomentMode::Corrected)?;
    let var_paper = surveillance_variance(p.lambda, p.d, MomentMode::PaperCompat)?;
    let mc = mc_moments(replicates, p.lambda, p.d, seed)?;
    Ok(MomentRow {
        lambda: p.lambda,
        d: p.d,
        lambda_d: p.lambda * p.d,
        mean_closed_form: mean,
        mean_quadrature: mean_q,
        mean_mc: mc.mean,
        mean_mc_se: mc.se_mean,
        var_corrected,
        var_paper,
        var_quadrature: second_q - mean_q * mean_q,
        var_mc: mc.variance,
        var_mc_se: mc.se_var,
        mean_quadrature_pass: (mean - mean_q).abs() <= QUADRATURE_REL_TOL * mean_q.abs(),
        mean_mc_pass: within_se(mean, mc.mean, mc.se_mean),
        corrected_pass: within_se(var_corrected, mc.variance, mc.se_var),
        paper_pass: within_se(var_paper, mc.variance, mc.se_var),
    })
}

/// Validates every grid point; point `i` draws from `child_seed(seed, i)`.
pub fn validate_moment_grid(points: &[GridPoint], replicates: u64, seed: u64) -> Result<Vec<MomentRow>> {
    if points.is_empty() {
        return Err(Error::invalid("grid", "no grid points"));
    }
    points
        .par_iter()
        .enumerate()
        .map(|(i, &p)| validate_point(p, replicates, child_seed(seed, i as u64)))
        .collect()
}

pub const MOMENT_CSV_HEADER: &str = "lambda,d,lambda_d,mean_closed_form,mean_quadrature,mean_mc,mean_mc_se,\
var_corrected,var_paper,var_quadrature,var_mc,var_mc_se,mean_quadrature_pass,mean_mc_pass,corrected_pass,paper_pass";

pub fn write_moment_csv<W: Write>(rows: &[MomentRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MOMENT_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.lambda,
            r.d,
            r.lambda_d,
            r.mean_closed_form,
            r.mean_quadrature,
            r.mean_mc,
            r.mean_mc_se,
            r.var_corrected,
            r.var_paper,
            r.var_quadrature,
            r.var_mc,
            r.var_mc_se,
            r.mean_quadrature_pass,
            r.mean_mc_pass,
            r.corrected_pass,
            r.paper_pass
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = default_moment_grid();
        assert_eq!(g.len(), 50);
        let x: Vec<f64> = g.iter().map(|p| p.lambda * p.d).collect();
        assert!((x[0] - 1e-4).abs() < 1e-16);
        assert!((x[49] - 50.0).abs() < 1e-9);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_point_passes() {
        let rows = validate_moment_grid(&[GridPoint { lambda: 2.0, d: 0.29 }], 200_000, 3).unwrap();
        let r = rows[0];
        assert!(r.corrected_row_passes(), "{r:?}");
        assert!((r.var_quadrature - r.var_corrected).abs() < 1e-12);
    }

    #[test]
    fn empty_grid_is_input_error() {
        assert!(validate_moment_grid(&[], 10_000, 1).is_err());
        assert!(product_grid(&[], &[1.0]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = validate_moment_grid(&product_grid(&[1.0], &[0.5, 1.0]).unwrap(), 10_000, 1).unwrap();
        let mut buf = Vec::new();
        write_moment_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 16);
    }
}
