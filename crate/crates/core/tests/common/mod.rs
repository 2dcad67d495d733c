//! Naive reference implementations and a χ² helper shared by the integration
//! tests and the acceptance suite. Nothing here calls the library's own
//! selection, ranking or mutation-probability code.

#![allow(dead_code)]

use fpsel_core::SelectionMode;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Selection probabilities straight from the definitions.
pub fn naive_probs(fitness: &[f64], mode: SelectionMode) -> Vec<f64> {
    let lambda = fitness.len();
    match mode {
        SelectionMode::Proportionate => {
            let total: f64 = fitness.iter().sum();
            if total == 0.0 {
                vec![1.0 / lambda as f64; lambda]
            } else {
                fitness.iter().map(|f| f / total).collect()
            }
        }
        SelectionMode::ScaledProportionate { base } => {
            let top = fitness.iter().cloned().fold(f64::MIN, f64::max);
            let w: Vec<f64> = fitness.iter().map(|f| base.powf(f - top)).collect();
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect()
        }
        SelectionMode::Uniform => vec![1.0 / lambda as f64; lambda],
        SelectionMode::Truncation { mu } => (0..lambda)
            .map(|i| {
                let ahead = (0..lambda)
                    .filter(|&j| fitness[j] > fitness[i] || (fitness[j] == fitness[i] && j < i))
                    .count();
                if ahead < mu {
                    1.0 / mu as f64
                } else {
                    0.0
                }
            })
            .collect(),
    }
}

/// `β(γ,P)` with `γ = num/den`, rank `⌈γλ⌉` in integer arithmetic and the
/// ranked value found by counting.
pub fn naive_beta(fitness: &[f64], probs: &[f64], num: usize, den: usize) -> f64 {
    let lambda = fitness.len();
    let k = (num * lambda).div_ceil(den).max(1);
    let threshold = fitness
        .iter()
        .copied()
        .find(|&v| {
            let above = fitness.iter().filter(|&&f| f > v).count();
            let at_least = fitness.iter().filter(|&&f| f >= v).count();
            above < k && k <= at_least
        })
        .expect("some member holds rank k");
    fitness
        .iter()
        .zip(probs)
        .filter(|(f, _)| **f >= threshold)
        .map(|(_, p)| p)
        .sum()
}

/// Transition probability by enumerating which bits flip.
pub fn naive_mutation_prob(x: u64, y: u64, n: usize, rate: f64) -> f64 {
    (0..n)
        .map(|i| {
            if (x >> i) & 1 != (y >> i) & 1 {
                rate
            } else {
                1.0 - rate
            }
        })
        .product()
}

/// Pearson χ² p-value; bins with expected count below 5 are pooled.
pub fn chi2_pvalue(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e < 5.0 {
            assert!(p > 0.0 || o == 0, "observed {o} in a zero-probability bin");
            pool_o += o as f64;
            pool_e += e;
        } else {
            bins.push((o as f64, e));
        }
    }
    if pool_e > 0.0 {
        bins.push((pool_o, pool_e));
    }
    if bins.len() < 2 {
        return 1.0;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dist = ChiSquared::new((bins.len() - 1) as f64).expect("dof ≥ 1");
    1.0 - dist.cdf(stat)
}

/// Binomial(n, p) probabilities computed in log space.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let ln_choose = |k: usize| -> f64 {
        (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum::<f64>()
    };
    (0..=n)
        .map(|k| (ln_choose(k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp())
        .collect()
}
