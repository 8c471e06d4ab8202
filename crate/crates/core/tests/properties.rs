use proptest::prelude::*;

use ve_infer::conditional::{posterior_prob_ve_above, posterior_theta, summarize_conditional, BetaDistributionParams};
use ve_infer::full_bayes::{elicit_priors, prior_mean_ve};
use ve_infer::model::{ve_from_rates, ve_from_theta, theta_from_ve, Efficacy, RatePair, TrialData};
use ve_infer::moments::{surveillance_mean, surveillance_variance, MomentMode};
use ve_infer::numerics::{inv_reg_inc_beta, ln_beta, log_gamma, reg_inc_beta, QuantileSolverConfig};
use ve_infer::simulate::quadrature_moment_oracle;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn surveillance() -> impl Strategy<Value = f64> {
    1e-2f64..1e6
}

proptest! {
    #[test]
    fn transform_round_trip(ve in -50.0f64..(1.0 - 1e-9), s_v in surveillance(), s_c in surveillance()) {
        let theta = theta_from_ve(Efficacy::new(ve).unwrap(), s_v, s_c).unwrap();
        let back = ve_from_theta(theta, s_v, s_c).unwrap().value();
        prop_assert!((back - ve).abs() <= 1e-10 * ve.abs().max(1e-300) || (back - ve).abs() < 1e-15,
            "ve={ve} back={back}");
    }

    #[test]
    fn theta_is_decreasing_in_ve(a in -5.0f64..0.99, gap in 1e-6f64..0.5, s_v in surveillance(), s_c in surveillance()) {
        let b = (a + gap).min(0.999_999);
        prop_assume!(b > a);
        let ta = theta_from_ve(Efficacy::new(a).unwrap(), s_v, s_c).unwrap();
        let tb = theta_from_ve(Efficacy::new(b).unwrap(), s_v, s_c).unwrap();
        prop_assert!(tb < ta);
        let va = ve_from_theta(ta, s_v, s_c).unwrap().value();
        let vb = ve_from_theta(tb, s_v, s_c).unwrap().value();
        prop_assert!(vb > va);
    }

    #[test]
    fn theta_scale_invariance(ve in -5.0f64..0.999, s_v in surveillance(), s_c in surveillance(), k in 1e-3f64..1e3) {
        let e = Efficacy::new(ve).unwrap();
        let t1 = theta_from_ve(e, s_v, s_c).unwrap();
        let t2 = theta_from_ve(e, k * s_v, k * s_c).unwrap();
        prop_assert!(rel_err(t2, t1) < 1e-12);
    }

    #[test]
    fn rate_ratio_scale_invariance(lv in 1e-6f64..10.0, lc in 1e-6f64..10.0, k in 1e-3f64..1e3) {
        let a = ve_from_rates(RatePair::new(lv, lc).unwrap()).unwrap().value();
        let b = ve_from_rates(RatePair::new(k * lv, k * lc).unwrap()).unwrap().value();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn conditional_outputs_ignore_common_scale(x_v in 0u64..30, x_c in 1u64..300, s_v in 10.0f64..1e5,
                                              s_c in 10.0f64..1e5, k in 1e-2f64..1e2) {
        let base = TrialData::new(10_000_000, 10_000_000, s_v, s_c, x_v, x_c, 1.0).unwrap();
        let scaled = TrialData::new(10_000_000, 10_000_000, k * s_v, k * s_c, x_v, x_c, 1.0).unwrap();
        let a = summarize_conditional(&base, BetaDistributionParams::PFIZER, 0.95, &[0.3]).unwrap();
        let b = summarize_conditional(&scaled, BetaDistributionParams::PFIZER, 0.95, &[0.3]).unwrap();
        for (x, y) in [(a.ci.lo, b.ci.lo), (a.ci.hi, b.ci.hi), (a.median_ve, b.median_ve)] {
            prop_assert!((x.value() - y.value()).abs() < 1e-9 * x.value().abs().max(1.0));
        }
        prop_assert!((a.prob_ve_above[0].probability - b.prob_ve_above[0].probability).abs() < 1e-9);
    }

    #[test]
    fn prob_above_decreases_in_threshold(x_v in 0u64..30, x_c in 0u64..300, t in -3.0f64..0.98, gap in 1e-3f64..0.5) {
        let post = posterior_theta(BetaDistributionParams::PFIZER, x_v, x_c);
        let hi = (t + gap).min(0.99);
        let p1 = posterior_prob_ve_above(Efficacy::new(t).unwrap(), post, 2214.0, 2222.0).unwrap();
        let p2 = posterior_prob_ve_above(Efficacy::new(hi).unwrap(), post, 2214.0, 2222.0).unwrap();
        prop_assert!(p2 <= p1 + 1e-15);
    }

    #[test]
    fn conjugacy_matches_brute_force(a in 0.2f64..5.0, b in 0.2f64..5.0, x_v in 0u64..=5, x_c in 0u64..=5) {
        let post = posterior_theta(BetaDistributionParams::new(a, b).unwrap(), x_v, x_c);
        prop_assert_eq!((post.a, post.b), (a + x_v as f64, b + x_c as f64));
        // Normalizer B(a + x_v, b + x_c) / B(a, b) by the product recursion,
        // independent of the gamma function.
        let mut ratio = 1.0;
        let (mut aa, mut bb) = (a, b);
        for _ in 0..x_v { ratio *= aa / (aa + bb); aa += 1.0; }
        for _ in 0..x_c { ratio *= bb / (aa + bb); bb += 1.0; }
        let ln_b_prior = ln_beta(a, b).unwrap();
        let ln_b_post = ln_beta(post.a, post.b).unwrap();
        for i in 0..50 {
            let th = (i as f64 + 0.5) / 50.0;
            let prior = ((a - 1.0) * th.ln() + (b - 1.0) * (1.0 - th).ln() - ln_b_prior).exp();
            let brute = prior * th.powi(x_v as i32) * (1.0 - th).powi(x_c as i32) / ratio;
            let closed = ((post.a - 1.0) * th.ln() + (post.b - 1.0) * (1.0 - th).ln() - ln_b_post).exp();
            prop_assert!(rel_err(closed, brute) < 1e-9, "θ={th} closed={closed} brute={brute}");
        }
    }

    #[test]
    fn elicitation_round_trip(ve_hat in 0.0f64..=0.99, lambda_c_hat in 1e-3f64..1e3) {
        let p = elicit_priors(ve_hat, lambda_c_hat).unwrap();
        prop_assert_eq!(p.a_v, 1.0);
        prop_assert!((p.b_v * lambda_c_hat - 1.0).abs() < 1e-15 && p.b_v == p.b_c);
        let back = prior_mean_ve(&p).unwrap().value();
        prop_assert!((back - ve_hat).abs() < 1e-12, "{ve_hat} -> {back}");
    }

    #[test]
    fn surveillance_mean_bounds(lambda in 1e-6f64..1e4, d in 1e-3f64..100.0) {
        let m = surveillance_mean(lambda, d).unwrap();
        prop_assert!(m > 0.0);
        prop_assert!(m < (1.0 / lambda).min(d / 2.0) * (1.0 + 1e-12));
    }

    #[test]
    fn corrected_variance_is_positive(lambda in 1e-6f64..1e4, d in 1e-3f64..100.0) {
        let v = surveillance_variance(lambda, d, MomentMode::Corrected).unwrap();
        prop_assert!(v > 0.0 && v.is_finite());
        let uniform = d * d / 12.0;
        let expo = 1.0 / (lambda * lambda);
        prop_assert!(v <= uniform.max(expo) * (1.0 + 1e-9));
    }

    #[test]
    fn mean_matches_quadrature(log_x in (1e-4f64).ln()..(50f64).ln(), d in 0.1f64..10.0) {
        let lambda = log_x.exp() / d;
        let closed = surveillance_mean(lambda, d).unwrap();
        let quad = quadrature_moment_oracle(lambda, d, 1).unwrap();
        prop_assert!(rel_err(closed, quad) < 1e-9);
        let var = surveillance_variance(lambda, d, MomentMode::Corrected).unwrap();
        let var_q = quadrature_moment_oracle(lambda, d, 2).unwrap() - quad * quad;
        prop_assert!(rel_err(var, var_q) < 1e-6, "var {var} vs {var_q}");
    }

    #[test]
    fn inverse_beta_identity(p in 1e-6f64..(1.0 - 1e-6), a in 0.1f64..500.0, b in 0.1f64..500.0) {
        let cfg = QuantileSolverConfig::default();
        let x = inv_reg_inc_beta(p, a, b, &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&x));
        let back = reg_inc_beta(x, a, b).unwrap();
        prop_assert!((back - p).abs() <= 1e-10 * p.max(1e-3), "p={p} back={back} x={x}");
    }

    #[test]
    fn beta_reflection(x in 0.0f64..=1.0, a in 0.05f64..1e3, b in 0.05f64..1e3) {
        let l = reg_inc_beta(x, a, b).unwrap();
        let r = reg_inc_beta(1.0 - x, b, a).unwrap();
        prop_assert!((0.0..=1.0).contains(&l));
        prop_assert!((l + r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_beta_is_identity(x in 0.0f64..=1.0) {
        prop_assert!((reg_inc_beta(x, 1.0, 1.0).unwrap() - x).abs() < 1e-15);
    }

    #[test]
    fn log_gamma_recurrence(x in 1e-3f64..1e6) {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn functions_are_total(x in prop::num::f64::ANY, a in prop::num::f64::ANY, b in prop::num::f64::ANY) {
        // Arbitrary input must produce either a finite value or an error.
        if let Ok(v) = log_gamma(x) { prop_assert!(!v.is_nan()); }
        if let Ok(v) = reg_inc_beta(x, a, b) { prop_assert!((0.0..=1.0).contains(&v)); }
        if let Ok(v) = inv_reg_inc_beta(x, a, b, &QuantileSolverConfig::default()) {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if let Ok(v) = surveillance_mean(x, a) { prop_assert!(v.is_finite()); }
        if let Ok(v) = surveillance_variance(x, a, MomentMode::Corrected) { prop_assert!(v.is_finite() && v > 0.0); }
        if let Ok(e) = Efficacy::new(x) {
            if let Ok(t) = theta_from_ve(e, a, b) { prop_assert!((0.0..=1.0).contains(&t)); }
        }
        if let Ok(p) = elicit_priors(x, a) { prop_assert!(prior_mean_ve(&p).is_ok()); }
    }
}

#[test]
fn gamma_half_is_sqrt_pi() {
    let v = log_gamma(0.5).unwrap().exp();
    assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
}
