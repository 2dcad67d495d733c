//! Simulation and analysis of non-elitist evolutionary algorithms with
//! fitness-proportionate selection and bitwise mutation on pseudo-Boolean
//! functions.

pub mod bits;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod fitness;
pub mod operators;
pub mod rng;
pub mod theory;

pub use bits::{hamming, new_random_population, BitString, Population};
pub use diagnostics::{
    cumulative_selection_prob, deficit, empirical_reproductive_counts, reproductive_rates, zero_bit_stats, BetaPoint,
    DiagSnapshot,
};
pub use engine::{run, run_from, step, GenerationRecord, Initialization, Outcome, RunConfig, RunTrace};
pub use error::{Error, Result};
pub use fitness::{DecompBlock, DecompSpec, FitnessSpec, LinearSpec, Unscaled};
pub use operators::{bitwise_mutate, mutation_probability, selection_probabilities, MutationParams, SelectionMode};
pub use rng::{derive_seed, seeded, Rng, SeedSpec};
pub use experiment::{run_experiment, scaling_fit, ExperimentConfig, ResultRow, ResultTable};
