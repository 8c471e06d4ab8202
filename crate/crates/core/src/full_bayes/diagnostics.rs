//! Convergence diagnostics: split-chain R-hat and multi-chain effective
//! sample size with Geyer's initial monotone sequence truncation.

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Chains cut to a common length; `None` if there are none or every draw is
/// identical.
fn trimmed<'a>(chains: &'a [Vec<f64>]) -> Option<Vec<&'a [f64]>> {
    let n = chains.iter().map(Vec::len).min()?;
    let first = *chains.first()?.first()?;
    if chains.iter().all(|c| c[..n].iter().all(|&x| x == first)) {
        return None;
    }
    Some(chains.iter().map(|c| &c[..n]).collect())
}

/// Split-chain potential scale reduction. `None` when undefined (fewer than
/// four draws per chain or zero within-chain variance).
pub fn split_rhat(chains: &[Vec<f64>]) -> Option<f64> {
    let chains = trimmed(chains)?;
    let n = chains[0].len() / 2;
    if n < 2 {
        return None;
    }
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..n], &c[c.len() - n..]])
        .collect();
    let within = mean(&halves.iter().map(|h| sample_variance(h)).collect::<Vec<_>>());
    if !(within > 0.0) {
        return None;
    }
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let between = n as f64 * sample_variance(&means);
    let n = n as f64;
    let var_plus = (n - 1.0) / n * within + between / n;
    Some((var_plus / within).sqrt())
}

/// Autocovariance at `lag`, normalized by the full chain length.
fn autocovariance(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    x[..n - lag]
        .iter()
        .zip(&x[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum::<f64>()
        / n as f64
}

/// Effective sample size of the pooled draws, capped at the draw count.
/// `None` when all draws are identical or chains are shorter than four.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Option<f64> {
    let chains = trimmed(chains)?;
    let m = chains.len();
    let n = chains[0].len();
    if n < 4 {
        return None;
    }
    let chain_means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let chain_vars: Vec<f64> = chains.iter().map(|c| sample_variance(c)).collect();
    let mean_var = mean(&chain_vars);
    let nf = n as f64;
    let mut var_plus = mean_var * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_variance(&chain_means);
    }
    if !(var_plus > 0.0) {
        return None;
    }

    let rho = |lag: usize| -> f64 {
        let acov_mean = chains
            .iter()
            .zip(&chain_means)
            .map(|(c, &cm)| autocovariance(c, cm, lag))
            .sum::<f64>()
            / m as f64;
        // Pooled autocorrelation (Stan's formulation).
        1.0 - (mean_var - acov_mean * nf / (nf - 1.0)) / var_plus
    };

    // Geyer: sum consecutive pairs Γ_k = ρ_{2k} + ρ_{2k+1} while positive,
    // forcing the sequence to be non-increasing.
    let mut sum_pairs = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n - 1 {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        sum_pairs += pair;
        prev_pair = pair;
        lag += 2;
    }
    let total = (m * n) as f64;
    let tau = -1.0 + 2.0 * sum_pairs;
    if !(tau > 0.0) {
        return Some(total);
    }
    Some((total / tau).min(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iid(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen::<f64>()).collect()
    }

    fn ar1(seed: u64, n: usize, phi: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = 0.0;
        (0..n)
            .map(|_| {
                x = phi * x + rng.gen::<f64>() - 0.5;
                x
            })
            .collect()
    }

    #[test]
    fn iid_chains_mix() {
        let chains: Vec<_> = (0..4).map(|s| iid(s, 5000)).collect();
        let r = split_rhat(&chains).unwrap();
        assert!((r - 1.0).abs() < 0.01, "{r}");
        let ess = effective_sample_size(&chains).unwrap();
        assert!((ess / 20_000.0 - 1.0).abs() < 0.2, "{ess}");
    }

    #[test]
    fn autocorrelated_chain_has_reduced_ess() {
        // AR(1) with φ = 0.9: integrated autocorrelation time (1+φ)/(1-φ) = 19.
        let chains: Vec<_> = (0..4).map(|s| ar1(s, 20_000, 0.9)).collect();
        let ess = effective_sample_size(&chains).unwrap();
        let expected = 80_000.0 / 19.0;
        assert!((ess / expected - 1.0).abs() < 0.25, "{ess} vs {expected}");
    }

    #[test]
    fn shifted_chain_inflates_rhat() {
        let mut chains: Vec<_> = (0..4).map(|s| iid(s, 2000)).collect();
        for x in chains[3].iter_mut() {
            *x += 1.0;
        }
        assert!(split_rhat(&chains).unwrap() > 1.3);
    }

    #[test]
    fn constant_chains_are_undefined() {
        let chains = vec![vec![0.3; 100], vec![0.3; 100]];
        assert!(split_rhat(&chains).is_none());
        assert!(effective_sample_size(&chains).is_none());
        assert!(effective_sample_size(&[vec![1.0, 2.0]]).is_none());
    }
}
