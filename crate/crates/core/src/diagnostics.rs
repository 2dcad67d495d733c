//! Analytical quantities evaluated on live populations: cumulative selection
//! probability, reproductive rates, the fitness-sum deficit, zero-bit counts
//! and level occupancy.

use serde::{Deserialize, Serialize};

use crate::bits::Population;
use crate::error::{param, Result};
use crate::fitness::FitnessSpec;
use crate::operators::{selection_probabilities, SelectionMode};

/// γ values always evaluated; the regime's γ₀ is appended when known.
pub const DEFAULT_GAMMA_GRID: [f64; 4] = [0.01, 0.05, 0.1, 0.25];

/// Builds the default grid plus `gamma0`, sorted and deduplicated.
pub fn gamma_grid(gamma0: Option<f64>) -> Vec<f64> {
    let mut grid: Vec<f64> = DEFAULT_GAMMA_GRID.to_vec();
    if let Some(g) = gamma0 {
        grid.push(g);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `⌈γλ⌉`, guarded against products such as `0.07·100 = 7.000000000000001`.
pub fn rank_for(gamma: f64, lambda: usize) -> usize {
    let x = gamma * lambda as f64;
    let k = (x - 1e-9 * x.max(1.0)).ceil() as usize;
    k.clamp(1, lambda)
}

/// `β(γ,P)` from a precomputed selection distribution.
pub fn beta_from_probs(fitness: &[f64], probs: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return param(format!("gamma must lie in (0, 1], got {gamma}"));
    }
    if fitness.len() != probs.len() || fitness.is_empty() {
        return param("fitness and probability vectors must be non-empty and equally long");
    }
    let mut sorted = fitness.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let threshold = sorted[rank_for(gamma, fitness.len()) - 1];
    Ok(fitness
        .iter()
        .zip(probs)
        .filter(|(f, _)| **f >= threshold)
        .map(|(_, p)| p)
        .sum())
}

/// Cumulative selection probability `β(γ,P)`: the probability of selecting an
/// individual at least as fit as the `⌈γλ⌉`-ranked one. Ties with the
/// threshold all count.
pub fn cumulative_selection_prob(fitness: &[f64], gamma: f64, mode: SelectionMode) -> Result<f64> {
    let probs = selection_probabilities(fitness, mode)?.probs;
    beta_from_probs(fitness, &probs, gamma)
}

/// `α(i) = λ·p_sel(i|P)`.
pub fn reproductive_rates(fitness: &[f64], mode: SelectionMode) -> Result<Vec<f64>> {
    let lambda = fitness.len() as f64;
    Ok(selection_probabilities(fitness, mode)?
        .probs
        .into_iter()
        .map(|p| lambda * p)
        .collect())
}

/// `R(i) = Σ_j [I(j) = i]`.
pub fn empirical_reproductive_counts(indices: &[usize], lambda: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; lambda];
    for &i in indices {
        if i >= lambda {
            return param(format!("selected index {i} out of range for lambda={lambda}"));
        }
        counts[i] += 1;
    }
    Ok(counts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deficit {
    /// `Z = λf* − Σ_j f(P(j))`.
    pub z: f64,
    /// `Σ_j f(P(j)) / (λ f*)`.
    pub normalized_mean: f64,
}

pub fn deficit_from_values(fitness: &[f64], optimum: f64) -> Deficit {
    let total: f64 = fitness.iter().sum();
    let full = fitness.len() as f64 * optimum;
    Deficit {
        z: full - total,
        normalized_mean: total / full,
    }
}

/// Fitness-sum deficit of the unscaled function.
pub fn deficit(pop: &Population, spec: &FitnessSpec) -> Result<Deficit> {
    let values = pop.iter().map(|x| spec.evaluate(x)).collect::<Result<Vec<_>>>()?;
    Ok(deficit_from_values(&values, spec.optimum_value()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroBitStats {
    pub min: usize,
    pub mean: f64,
}

pub fn zero_bit_stats(pop: &Population) -> ZeroBitStats {
    let mut min = usize::MAX;
    let mut total = 0usize;
    for x in pop.iter() {
        let z = x.count_zeros();
        min = min.min(z);
        total += z;
    }
    ZeroBitStats {
        min,
        mean: total as f64 / pop.len() as f64,
    }
}

/// Occupancy `|P ∩ A_j|` of every level.
pub fn level_histogram(pop: &Population, spec: &FitnessSpec) -> Result<Vec<usize>> {
    let values = pop.iter().map(|x| spec.evaluate(x)).collect::<Result<Vec<_>>>()?;
    Ok(level_histogram_from_values(&values, spec))
}

pub fn level_histogram_from_values(fitness: &[f64], spec: &FitnessSpec) -> Vec<usize> {
    let partition = spec.partition();
    let mut hist = vec![0; partition.level_count()];
    for &f in fitness {
        hist[partition.level_of_value(f)] += 1;
    }
    hist
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaPoint {
    pub gamma: f64,
    pub beta: f64,
}

/// All per-population diagnostics at once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagSnapshot {
    pub beta: Vec<BetaPoint>,
    pub alpha: Vec<f64>,
    /// Present when the selection outcome `I_t` was supplied.
    pub counts: Option<Vec<usize>>,
    pub deficit: Deficit,
    pub zero_bits: ZeroBitStats,
    pub level_histogram: Vec<usize>,
    pub fallback: bool,
}

impl DiagSnapshot {
    pub fn compute(
        pop: &Population,
        spec: &FitnessSpec,
        mode: SelectionMode,
        gammas: &[f64],
        selected: Option<&[usize]>,
    ) -> Result<Self> {
        let fitness = pop.iter().map(|x| spec.evaluate(x)).collect::<Result<Vec<_>>>()?;
        let sel = selection_probabilities(&fitness, mode)?;
        let lambda = fitness.len() as f64;
        let beta = gammas
            .iter()
            .map(|&gamma| {
                Ok(BetaPoint {
                    gamma,
                    beta: beta_from_probs(&fitness, &sel.probs, gamma)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let counts = selected
            .map(|idx| empirical_reproductive_counts(idx, fitness.len()))
            .transpose()?;
        Ok(Self {
            beta,
            alpha: sel.probs.iter().map(|p| lambda * p).collect(),
            counts,
            deficit: deficit_from_values(&fitness, spec.optimum_value()),
            zero_bits: zero_bit_stats(pop),
            level_histogram: level_histogram_from_values(&fitness, spec),
            fallback: sel.fallback,
        })
    }
}
