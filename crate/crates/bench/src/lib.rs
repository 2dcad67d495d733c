//! Fixtures shared by the benchmarks.

use fpsel_core::{new_random_population, seeded, FitnessSpec, Population, RunConfig, SelectionMode};

/// A uniformly random population of `lambda` strings of length `n`.
pub fn random_population(n: usize, lambda: usize, seed: u64) -> Population {
    new_random_population(n, lambda, &mut seeded(seed))
}

/// OneMax run with standard rate `1/n`, stopped after `generations`.
pub fn onemax_run(n: usize, lambda: usize, generations: u64, mode: SelectionMode) -> RunConfig {
    let mut cfg = RunConfig::new(FitnessSpec::onemax(n), mode, 1.0, lambda, 7);
    cfg.max_generations = generations;
    cfg.cadence = generations.max(1);
    cfg
}
