//! The generational loop of the non-elitist EA.
//!
//! Each generation samples `λ` parents independently from the selection
//! distribution of the current population and mutates each one to produce the
//! next population. Nothing survives except through selection and mutation.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{new_random_population, BitString, Population};
use crate::diagnostics::{beta_from_probs, deficit_from_values, level_histogram_from_values, BetaPoint};
use crate::error::{config, Result};
use crate::fitness::FitnessSpec;
use crate::operators::{selection_probabilities, MutationParams, Sampler, SelectionMode};
use crate::rng::seeded;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initialization {
    /// Every bit of every member is a fair coin.
    #[default]
    Uniform,
    AllZeros,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub fitness: FitnessSpec,
    pub selection: SelectionMode,
    pub chi: f64,
    pub lambda: usize,
    pub max_generations: u64,
    pub max_evaluations: u64,
    /// Record diagnostics every `cadence` generations (and at the end).
    pub cadence: u64,
    pub gammas: Vec<f64>,
    pub initialization: Initialization,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(fitness: FitnessSpec, selection: SelectionMode, chi: f64, lambda: usize, seed: u64) -> Self {
        Self {
            fitness,
            selection,
            chi,
            lambda,
            max_generations: u64::MAX,
            max_evaluations: u64::MAX,
            cadence: 1,
            gammas: crate::diagnostics::gamma_grid(None),
            initialization: Initialization::Uniform,
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.fitness.n()
    }

    pub fn mutation(&self) -> Result<MutationParams> {
        MutationParams::new(self.chi, self.n())
    }

    /// Selection actually applied. A scaled fitness spec turns plain
    /// proportionate selection into its log-domain scaled form.
    pub fn effective_selection(&self) -> Result<SelectionMode> {
        match (self.fitness.scale_base(), self.selection) {
            (None, mode) => Ok(mode),
            (Some(c), SelectionMode::Proportionate) => Ok(SelectionMode::ScaledProportionate { base: c }),
            (Some(c), SelectionMode::ScaledProportionate { base }) if base == c => Ok(self.selection),
            (Some(c), SelectionMode::ScaledProportionate { base }) => {
                config(format!("fitness is scaled with base {c} but selection uses base {base}"))
            }
            (Some(_), mode) => Ok(mode),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda == 0 {
            return config("lambda must be at least 1");
        }
        if self.max_generations == 0 || self.max_evaluations == 0 {
            return config("budgets must be at least 1");
        }
        if self.cadence == 0 {
            return config("diagnostics cadence must be at least 1");
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
            return config(format!("gamma grid value {g} outside (0, 1]"));
        }
        self.mutation()?;
        self.effective_selection()?.validate(self.lambda)?;
        Ok(())
    }
}

/// Diagnostics of one population `P_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub t: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// `λf* − Σ_j f(P_t(j))`.
    pub deficit: f64,
    pub normalized_mean: f64,
    pub min_zero_bits: usize,
    pub mean_zero_bits: f64,
    pub level_histogram: Vec<usize>,
    /// Selection from `P_t` fell back to uniform (all-zero fitness).
    pub fallback: bool,
    pub beta: Vec<BetaPoint>,
    /// `max_i α_t(i)`.
    pub max_alpha: f64,
    /// `max_i R_t(i)`, filled once the generation's parents are drawn.
    pub max_offspring_count: Option<usize>,
}

impl GenerationRecord {
    pub fn optimum_present(&self) -> bool {
        self.level_histogram.last().is_some_and(|&c| c > 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// The optimum first appeared in `P_generation` as the `evaluations`-th
    /// fitness evaluation, counting the `λ` evaluations of `P_0`.
    FoundOptimum { evaluations: u64, generation: u64 },
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<GenerationRecord>,
    pub outcome: Outcome,
    pub total_evaluations: u64,
    /// Generations whose offspring were all produced.
    pub generations: u64,
    pub fallback_generations: u64,
    /// Generations whose selection distribution contained a non-finite value.
    pub nonfinite_events: u64,
    /// Minimum zero-bit count over every member of every population.
    pub running_min_zero_bits: usize,
    pub final_best_fitness: f64,
    pub final_min_zero_bits: usize,
    pub wall_ms: f64,
}

impl RunTrace {
    pub fn found(&self) -> bool {
        matches!(self.outcome, Outcome::FoundOptimum { .. })
    }

    /// Fitness evaluations until the optimum was first evaluated.
    pub fn runtime(&self) -> Option<u64> {
        match self.outcome {
            Outcome::FoundOptimum { evaluations, .. } => Some(evaluations),
            Outcome::BudgetExhausted => None,
        }
    }

    /// `tλ` for the first `t` with an optimum in `P_t`.
    pub fn generation_runtime(&self, lambda: usize) -> Option<u64> {
        match self.outcome {
            Outcome::FoundOptimum { generation, .. } => Some(generation * lambda as u64),
            Outcome::BudgetExhausted => None,
        }
    }
}

/// Result of one select-then-mutate generation.
#[derive(Clone, Debug)]
pub struct Step {
    pub population: Population,
    /// `I_t(i)`: the parent index of offspring `i`.
    pub selected: Vec<usize>,
    pub fallback: bool,
}

/// One generation: `λ` independent draws `I_t(i) ~ sel(P_t)`, each followed by
/// bitwise mutation of `P_t(I_t(i))`.
pub fn step<R: Rng + ?Sized>(
    pop: &Population,
    spec: &FitnessSpec,
    mode: SelectionMode,
    mutation: &MutationParams,
    rng: &mut R,
) -> Result<Step> {
    let fitness = pop.iter().map(|x| spec.evaluate(x)).collect::<Result<Vec<_>>>()?;
    let sel = selection_probabilities(&fitness, mode)?;
    let sampler = Sampler::new(&sel.probs)?;
    let mut selected = Vec::with_capacity(pop.len());
    let mut members = Vec::with_capacity(pop.len());
    for _ in 0..pop.len() {
        let i = sampler.sample(rng);
        let mut child = pop.get(i).clone();
        mutation.mutate_in_place(&mut child, rng);
        selected.push(i);
        members.push(child);
    }
    Ok(Step {
        population: Population::new(members)?,
        selected,
        fallback: sel.fallback,
    })
}

fn initial_population(cfg: &RunConfig, rng: &mut crate::rng::Rng) -> Population {
    match cfg.initialization {
        Initialization::Uniform => new_random_population(cfg.n(), cfg.lambda, rng),
        Initialization::AllZeros => {
            Population::new(vec![BitString::zeros(cfg.n()); cfg.lambda]).expect("lambda ≥ 1")
        }
    }
}

fn record(
    t: u64,
    pop: &Population,
    fitness: &[f64],
    spec: &FitnessSpec,
    mode: SelectionMode,
    gammas: &[f64],
) -> Result<GenerationRecord> {
    let sel = selection_probabilities(fitness, mode)?;
    let lambda = fitness.len() as f64;
    let d = deficit_from_values(fitness, spec.optimum_value());
    let zeros: Vec<usize> = pop.iter().map(|x| x.count_zeros()).collect();
    let beta = gammas
        .iter()
        .map(|&gamma| {
            Ok(BetaPoint {
                gamma,
                beta: beta_from_probs(fitness, &sel.probs, gamma)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GenerationRecord {
        t,
        best_fitness: fitness.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        mean_fitness: fitness.iter().sum::<f64>() / lambda,
        deficit: d.z,
        normalized_mean: d.normalized_mean,
        min_zero_bits: zeros.iter().copied().min().unwrap_or(0),
        mean_zero_bits: zeros.iter().sum::<usize>() as f64 / lambda,
        level_histogram: level_histogram_from_values(fitness, spec),
        fallback: sel.fallback,
        beta,
        max_alpha: sel.probs.iter().cloned().fold(0.0, f64::max) * lambda,
        max_offspring_count: None,
    })
}

/// Runs the EA from a uniformly random (or all-zeros) initial population.
pub fn run(cfg: &RunConfig) -> Result<RunTrace> {
    cfg.validate()?;
    let mut rng = seeded(cfg.seed);
    let pop = initial_population(cfg, &mut rng);
    run_with_rng(cfg, pop, rng)
}

/// Runs the EA from a caller-supplied initial population.
pub fn run_from(cfg: &RunConfig, initial: Population) -> Result<RunTrace> {
    cfg.validate()?;
    if initial.len() != cfg.lambda {
        return config(format!("initial population has {} members, lambda is {}", initial.len(), cfg.lambda));
    }
    initial.get(0).check_len(cfg.n())?;
    run_with_rng(cfg, initial, seeded(cfg.seed))
}

fn run_with_rng(cfg: &RunConfig, initial: Population, mut rng: crate::rng::Rng) -> Result<RunTrace> {
    let started = Instant::now();
    let spec = &cfg.fitness;
    let mode = cfg.effective_selection()?;
    let mutation = cfg.mutation()?;
    let optimum = spec.optimum_value();
    let lambda = cfg.lambda;

    let mut pop = initial;
    let mut fitness: Vec<f64> = pop.iter().map(|x| spec.evaluate_unchecked(x)).collect();
    let mut next = pop.clone();
    let mut next_fitness = fitness.clone();

    let mut records = Vec::new();
    // P_0 is evaluated in index order before the first generation.
    let mut evaluations = lambda as u64;
    let mut t = 0u64;
    let mut fallback_generations = 0u64;
    let mut nonfinite_events = 0u64;
    let mut running_min_zero_bits = pop.iter().map(|x| x.count_zeros()).min().unwrap_or(0);

    let mut outcome = fitness.iter().position(|&f| f == optimum).map(|i| Outcome::FoundOptimum {
        evaluations: i as u64 + 1,
        generation: 0,
    });
    records.push(record(0, &pop, &fitness, spec, mode, &cfg.gammas)?);

    while outcome.is_none() {
        if t >= cfg.max_generations || evaluations >= cfg.max_evaluations {
            outcome = Some(Outcome::BudgetExhausted);
            break;
        }
        let sel = selection_probabilities(&fitness, mode)?;
        if sel.fallback {
            fallback_generations += 1;
        }
        if sel.probs.iter().any(|p| !p.is_finite()) {
            nonfinite_events += 1;
        }
        let sampler = Sampler::new(&sel.probs)?;
        let track_counts = records.last().is_some_and(|r| r.t == t);
        let mut counts = if track_counts { vec![0usize; lambda] } else { Vec::new() };

        let mut found_at = None;
        let mut complete = true;
        {
            let parents = pop.members();
            let children = next.members_mut();
            for i in 0..lambda {
                if evaluations >= cfg.max_evaluations {
                    complete = false;
                    break;
                }
                let j = sampler.sample(&mut rng);
                if track_counts {
                    counts[j] += 1;
                }
                let child = &mut children[i];
                child.copy_from(&parents[j]);
                next_fitness[i] = if mutation.mutate_in_place(child, &mut rng) == 0 {
                    fitness[j]
                } else {
                    spec.evaluate_unchecked(child)
                };
                evaluations += 1;
                if found_at.is_none() && next_fitness[i] == optimum {
                    found_at = Some(evaluations);
                }
            }
        }
        if track_counts {
            if let Some(r) = records.last_mut() {
                r.max_offspring_count = counts.iter().copied().max();
            }
        }
        if !complete {
            outcome = Some(Outcome::BudgetExhausted);
            break;
        }
        std::mem::swap(&mut pop, &mut next);
        std::mem::swap(&mut fitness, &mut next_fitness);
        t += 1;
        let gen_min = pop.iter().map(|x| x.count_zeros()).min().unwrap_or(0);
        running_min_zero_bits = running_min_zero_bits.min(gen_min);

        if let Some(evaluations) = found_at {
            outcome = Some(Outcome::FoundOptimum {
                evaluations,
                generation: t,
            });
        }
        if outcome.is_some() || t % cfg.cadence == 0 {
            records.push(record(t, &pop, &fitness, spec, mode, &cfg.gammas)?);
        }
    }
    if records.last().map_or(true, |r| r.t != t) {
        records.push(record(t, &pop, &fitness, spec, mode, &cfg.gammas)?);
    }
    let last = records.last().expect("at least one record");
    let outcome = outcome.expect("loop exits with an outcome");
    // Evaluations after the optimum's are not charged.
    let total_evaluations = match outcome {
        Outcome::FoundOptimum { evaluations, .. } => evaluations,
        Outcome::BudgetExhausted => evaluations,
    };
    Ok(RunTrace {
        final_best_fitness: last.best_fitness,
        final_min_zero_bits: last.min_zero_bits,
        records,
        outcome,
        total_evaluations,
        generations: t,
        fallback_generations,
        nonfinite_events,
        running_min_zero_bits,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn onemax_cfg(n: usize, lambda: usize, chi: f64, mode: SelectionMode, seed: u64) -> RunConfig {
        RunConfig::new(FitnessSpec::onemax(n), mode, chi, lambda, seed)
    }

    #[test]
    fn step_with_point_mass_and_full_flip_complements() {
        let mut rng = seeded(1);
        let parent: BitString = "0110".parse().unwrap();
        let pop = Population::new(vec![parent.clone()]).unwrap();
        let m = MutationParams::new(4.0, 4).unwrap();
        let s = step(&pop, &FitnessSpec::onemax(4), SelectionMode::Proportionate, &m, &mut rng).unwrap();
        assert_eq!(s.selected, vec![0]);
        assert_eq!(s.population.get(0), &parent.complement());
    }

    #[test]
    fn step_without_mutation_resamples() {
        let mut rng = seeded(2);
        let pop = new_random_population(16, 8, &mut rng);
        let m = MutationParams::new(1e-300, 16).unwrap();
        let s = step(&pop, &FitnessSpec::onemax(16), SelectionMode::Uniform, &m, &mut rng).unwrap();
        for (child, &i) in s.population.iter().zip(&s.selected) {
            assert_eq!(child, pop.get(i));
        }
    }

    #[test]
    fn single_bit_finds_optimum_quickly() {
        for seed in 0..20 {
            let trace = run(&onemax_cfg(1, 4, 0.5, SelectionMode::Proportionate, seed)).unwrap();
            let gens = match trace.outcome {
                Outcome::FoundOptimum { generation, .. } => generation,
                Outcome::BudgetExhausted => panic!("n=1 must succeed"),
            };
            assert!(gens <= 10, "seed {seed}: {gens}");
        }
    }

    #[test]
    fn identical_seed_identical_trace() {
        let cfg = onemax_cfg(20, 30, 1.0, SelectionMode::Proportionate, 77);
        let mut cfg = cfg;
        cfg.max_evaluations = 30 * 200;
        let mut a = run(&cfg).unwrap();
        let mut b = run(&cfg).unwrap();
        a.wall_ms = 0.0;
        b.wall_ms = 0.0;
        assert_eq!(a, b);
    }

    #[test]
    fn evaluation_accounting() {
        let mut cfg = onemax_cfg(60, 10, 1.0, SelectionMode::Proportionate, 5);
        cfg.max_evaluations = 1005;
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.outcome, Outcome::BudgetExhausted);
        assert_eq!(trace.total_evaluations, 1005);
        assert_eq!(trace.generations, 99);

        let mut cfg = onemax_cfg(60, 10, 1.0, SelectionMode::Proportionate, 5);
        cfg.max_generations = 37;
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.total_evaluations, 380);
        assert_eq!(trace.records.last().unwrap().t, 37);

        for seed in 0..30 {
            let mut cfg = onemax_cfg(6, 8, 1.0, SelectionMode::Proportionate, seed);
            cfg.cadence = 5;
            let trace = run(&cfg).unwrap();
            let Outcome::FoundOptimum { evaluations, generation } = trace.outcome else {
                panic!("n=6 should succeed")
            };
            assert_eq!(trace.generations, generation);
            assert!(evaluations > generation * 8 && evaluations <= (generation + 1) * 8);
            assert_eq!(trace.total_evaluations, evaluations);
            assert_eq!(trace.generation_runtime(8), Some(generation * 8));
            let last = trace.records.last().unwrap();
            assert_eq!(last.t, generation);
            assert!(last.optimum_present());
            assert!(trace.records.iter().all(|r| r.t % 5 == 0 || r.t == generation));
        }
    }

    #[test]
    fn best_fitness_can_decrease() {
        // λ = 1 with certain flips: the only individual is replaced by its complement.
        let mut cfg = onemax_cfg(8, 1, 8.0, SelectionMode::Proportionate, 3);
        cfg.max_generations = 4;
        let start = Population::new(vec!["11111110".parse().unwrap()]).unwrap();
        let trace = run_from(&cfg, start).unwrap();
        let best: Vec<f64> = trace.records.iter().map(|r| r.best_fitness).collect();
        assert_eq!(best, vec![7.0, 1.0, 7.0, 1.0, 7.0]);
    }

    #[test]
    fn zero_fitness_population_flags_fallback() {
        let spec = FitnessSpec::decomp(crate::fitness::DecompSpec::royal_road(8, 4, None).unwrap());
        let mut cfg = RunConfig::new(spec, SelectionMode::Proportionate, 1.0, 20, 9);
        cfg.initialization = Initialization::AllZeros;
        cfg.max_generations = 3;
        let trace = run(&cfg).unwrap();
        assert!(trace.records[0].fallback);
        assert!(trace.fallback_generations >= 1);
    }

    #[test]
    fn config_validation() {
        let ok = onemax_cfg(10, 5, 1.0, SelectionMode::Proportionate, 0);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.lambda = 0;
        assert!(run(&bad).is_err());
        let mut bad = ok.clone();
        bad.cadence = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.chi = 11.0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.selection = SelectionMode::Truncation { mu: 6 };
        assert!(bad.validate().is_err());

        let scaled = FitnessSpec::scaled(
            crate::fitness::Unscaled::Linear(crate::fitness::LinearSpec::onemax(10)),
            8.0,
        )
        .unwrap();
        let mut cfg = RunConfig::new(scaled, SelectionMode::Proportionate, 1.0, 5, 0);
        assert_eq!(cfg.effective_selection().unwrap(), SelectionMode::ScaledProportionate { base: 8.0 });
        cfg.selection = SelectionMode::ScaledProportionate { base: 3.0 };
        assert!(cfg.validate().is_err());
    }
}
