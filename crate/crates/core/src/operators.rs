//! Selection distributions, parent sampling and bitwise mutation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{hamming, BitString};
use crate::error::{param, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionMode {
    /// `p_sel(i) = f_i / Σ_j f_j`.
    Proportionate,
    /// Proportionate on `c^{f}`, evaluated as a softmax of `f·ln c`.
    ScaledProportionate { base: f64 },
    Uniform,
    /// Uniform over the `mu` fittest (ties broken by lower index).
    Truncation { mu: usize },
}

impl SelectionMode {
    pub fn label(&self) -> String {
        match self {
            SelectionMode::Proportionate => "proportionate".into(),
            SelectionMode::ScaledProportionate { base } => format!("scaled_proportionate(c={base})"),
            SelectionMode::Uniform => "uniform".into(),
            SelectionMode::Truncation { mu } => format!("truncation(mu={mu})"),
        }
    }

    pub fn validate(&self, lambda: usize) -> Result<()> {
        match *self {
            SelectionMode::ScaledProportionate { base } if !(base.is_finite() && base > 1.0) => {
                param(format!("scaling base must be > 1, got {base}"))
            }
            SelectionMode::Truncation { mu } if mu == 0 || mu > lambda => {
                param(format!("truncation needs 1 ≤ mu ≤ lambda, got mu={mu}, lambda={lambda}"))
            }
            _ => Ok(()),
        }
    }
}

/// A selection distribution over population indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionProbabilities {
    pub probs: Vec<f64>,
    /// Set when proportionate selection met an all-zero population and fell
    /// back to uniform.
    pub fallback: bool,
}

/// Exact selection distribution for a population with the given (unscaled)
/// fitness values.
pub fn selection_probabilities(fitness: &[f64], mode: SelectionMode) -> Result<SelectionProbabilities> {
    let lambda = fitness.len();
    if lambda == 0 {
        return param("selection needs a non-empty population");
    }
    mode.validate(lambda)?;
    if let Some(f) = fitness.iter().find(|f| !f.is_finite()) {
        return param(format!("non-finite fitness value {f}"));
    }
    let uniform = || vec![1.0 / lambda as f64; lambda];
    let probs = match mode {
        SelectionMode::Proportionate => {
            if let Some(f) = fitness.iter().find(|f| **f < 0.0) {
                return param(format!("proportionate selection needs non-negative fitness, found {f}"));
            }
            let total: f64 = fitness.iter().sum();
            if total == 0.0 {
                return Ok(SelectionProbabilities {
                    probs: uniform(),
                    fallback: true,
                });
            }
            fitness.iter().map(|f| f / total).collect()
        }
        SelectionMode::ScaledProportionate { base } => {
            // Shifting by the maximum first keeps integer differences exact.
            let ln_c = base.ln();
            let top = fitness.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let logs: Vec<f64> = fitness.iter().map(|f| (f - top) * ln_c).collect();
            softmax(&logs)
        }
        SelectionMode::Uniform => uniform(),
        SelectionMode::Truncation { mu } => {
            let mut probs = vec![0.0; lambda];
            for &i in ranking(fitness).iter().take(mu) {
                probs[i] = 1.0 / mu as f64;
            }
            probs
        }
    };
    Ok(SelectionProbabilities {
        probs,
        fallback: false,
    })
}

/// `exp(g_i − g_max) / Σ_j exp(g_j − g_max)`; finite for any finite input.
pub fn softmax(logs: &[f64]) -> Vec<f64> {
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|g| (g - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Indices sorted by descending fitness, ties by ascending index.
pub fn ranking(fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));
    order
}

/// Samples indices from a fixed distribution.
///
/// Uses a cumulative table and binary search over a single uniform draw per
/// sample (a zero-probability index is never returned). The uniform
/// distribution takes a fast path with one bounded integer draw.
#[derive(Clone, Debug)]
pub enum Sampler {
    Uniform(usize),
    Cumulative { cumulative: Vec<f64>, last_positive: usize },
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return param("empty probability vector");
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return param("probabilities must be finite and non-negative");
        }
        let first = probs[0];
        if probs.iter().all(|&p| p == first) {
            return Ok(Sampler::Uniform(probs.len()));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if acc <= 0.0 {
            return param("probabilities sum to zero");
        }
        let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Ok(Sampler::Cumulative {
            cumulative,
            last_positive,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Sampler::Uniform(n) => rng.gen_range(0..*n),
            Sampler::Cumulative {
                cumulative,
                last_positive,
            } => {
                let total = cumulative[cumulative.len() - 1];
                let u = rng.gen::<f64>() * total;
                cumulative.partition_point(|&c| c <= u).min(*last_positive)
            }
        }
    }
}

/// Draws one index from `probs`.
pub fn sample_selection<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    Ok(Sampler::new(probs)?.sample(rng))
}

/// Bitwise mutation with rate `χ/n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MutationParams {
    chi: f64,
    n: usize,
    rate: f64,
    log_keep: f64,
}

impl MutationParams {
    pub fn new(chi: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return param("mutation needs n ≥ 1");
        }
        if !(chi.is_finite() && chi > 0.0 && chi <= n as f64) {
            return param(format!("mutation needs 0 < chi ≤ n, got chi={chi}, n={n}"));
        }
        let rate = chi / n as f64;
        Ok(Self {
            chi,
            n,
            rate,
            log_keep: (-rate).ln_1p(),
        })
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Per-bit flip probability `χ/n`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `(1 − χ/n)^n`, the probability that no bit flips.
    pub fn no_flip_probability(&self) -> f64 {
        (self.n as f64 * self.log_keep).exp()
    }

    /// Flips each bit of `x` independently with probability `χ/n`, returning
    /// the number of flipped bits.
    ///
    /// Gaps between flipped positions are drawn as geometric variables
    /// `⌊ln U / ln(1 − χ/n)⌋`, so the cost is one uniform draw per flip plus one.
    pub fn mutate_in_place<R: Rng + ?Sized>(&self, x: &mut BitString, rng: &mut R) -> usize {
        debug_assert_eq!(x.len(), self.n);
        if self.rate >= 1.0 {
            for i in 0..self.n {
                x.flip(i);
            }
            return self.n;
        }
        let mut pos = 0usize;
        let mut flips = 0;
        loop {
            let u = 1.0 - rng.gen::<f64>();
            let gap = u.ln() / self.log_keep;
            if gap >= (self.n - pos) as f64 {
                return flips;
            }
            pos += gap as usize;
            x.flip(pos);
            flips += 1;
            pos += 1;
            if pos >= self.n {
                return flips;
            }
        }
    }
}

pub fn bitwise_mutate<R: Rng + ?Sized>(x: &BitString, params: &MutationParams, rng: &mut R) -> Result<BitString> {
    x.check_len(params.n)?;
    let mut y = x.clone();
    params.mutate_in_place(&mut y, rng);
    Ok(y)
}

/// `(χ/n)^{H(x,y)} (1 − χ/n)^{n − H(x,y)}`, evaluated in the log domain.
pub fn mutation_probability(x: &BitString, y: &BitString, params: &MutationParams) -> Result<f64> {
    x.check_len(params.n)?;
    Ok(mutation_probability_at_distance(hamming(x, y)?, params))
}

pub fn mutation_probability_at_distance(distance: usize, params: &MutationParams) -> f64 {
    let keep = params.n - distance;
    let mut log_p = 0.0;
    if distance > 0 {
        log_p += distance as f64 * params.rate.ln();
    }
    if keep > 0 {
        log_p += keep as f64 * params.log_keep;
    }
    log_p.exp()
}
