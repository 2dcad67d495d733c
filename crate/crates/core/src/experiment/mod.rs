//! Experiment configuration, sweep expansion and replicated execution.

mod emit;
mod table;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run, Initialization, Outcome, RunConfig, RunTrace};
use crate::error::{config, Error, Result};
use crate::fitness::{DecompBlock, DecompSpec, FitnessSpec, LinearSpec, Unscaled};
use crate::operators::SelectionMode;
use crate::rng::{derive_seed, SeedSpec};
use crate::theory::{regime_low_rate, regime_scaled, regime_decomposed};

pub use emit::{read_json, trace_csv_header, write_csv, write_json, write_trace_csv, CSV_COLUMNS};
pub use table::{aggregate, scaling_fit, CellAggregate, ResultRow, ResultTable, RunStatus, ScalingFit, ScalingPoint};

/// Version tag written into every result document.
pub const ARTIFACT_VERSION: &str = concat!("fpsel/", env!("CARGO_PKG_VERSION"));

/// Fitness function family, instantiated once per `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitnessTemplate {
    #[serde(rename = "onemax")]
    OneMax,
    /// Integer weights; their count fixes `n`.
    Linear { weights: Vec<u64> },
    RoyalRoad {
        r: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<u64>>,
    },
    Decomp { blocks: Vec<DecompBlock> },
}

impl FitnessTemplate {
    fn unscaled(&self, n: usize) -> Result<Unscaled> {
        Ok(match self {
            FitnessTemplate::OneMax => Unscaled::Linear(LinearSpec::onemax(n)),
            FitnessTemplate::Linear { weights } => {
                if weights.len() != n {
                    return config(format!("linear template has {} weights but n={n}", weights.len()));
                }
                Unscaled::Linear(LinearSpec::from_integers(weights)?)
            }
            FitnessTemplate::RoyalRoad { r, weights } => {
                Unscaled::Decomp(DecompSpec::royal_road(n, *r, weights.as_deref())?)
            }
            FitnessTemplate::Decomp { blocks } => Unscaled::Decomp(DecompSpec::new(n, blocks.clone())?),
        })
    }

    pub fn build(&self, n: usize, scale_base: Option<f64>) -> Result<FitnessSpec> {
        let inner = self.unscaled(n)?;
        match scale_base {
            Some(c) => FitnessSpec::scaled(inner, c),
            None => Ok(match inner {
                Unscaled::Linear(l) => FitnessSpec::linear(l)?,
                Unscaled::Decomp(d) => FitnessSpec::decomp(d),
            }),
        }
    }

    fn is_decomposed(&self) -> bool {
        matches!(self, FitnessTemplate::RoyalRoad { .. } | FitnessTemplate::Decomp { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LambdaRule {
    Fixed { value: usize },
    /// `λ = factor·n`.
    PerN { factor: usize },
    /// `λ = max(min, ⌈factor·ln n⌉)`.
    LogN { factor: f64, min: usize },
    /// `⌈λ_min⌉` of the matching regime calculator.
    RegimeMin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ChiRule {
    Fixed { value: f64 },
    /// `χ = (1−c)/(n a₁)`, i.e. per-bit rate `(1−c)/(n² a₁)`.
    LowRate { c: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum BudgetPolicy {
    Fixed { evaluations: u64 },
    /// `factor·n²·λ·ln λ`.
    LowRate { factor: f64 },
    /// `factor·(nλ ln λ + n²)`.
    Scaled { factor: f64 },
}

impl BudgetPolicy {
    pub fn evaluations(&self, n: usize, lambda: usize) -> u64 {
        let (nf, lf) = (n as f64, lambda as f64);
        let ln_l = lf.ln().max(1.0);
        let v = match *self {
            BudgetPolicy::Fixed { evaluations } => return evaluations,
            BudgetPolicy::LowRate { factor } => factor * nf * nf * lf * ln_l,
            BudgetPolicy::Scaled { factor } => factor * (nf * lf * ln_l + nf * nf),
        };
        v.ceil().min(u64::MAX as f64) as u64
    }
}

fn default_replications() -> usize {
    1
}

fn default_cadence() -> u64 {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    /// Directory for one trace CSV per run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub fitness: FitnessTemplate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_base: Option<f64>,
    pub selection: SelectionMode,
    pub n: Vec<usize>,
    pub lambda: Vec<LambdaRule>,
    pub chi: Vec<ChiRule>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub budget: BudgetPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<u64>,
    #[serde(default = "default_cadence")]
    pub cadence: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    #[serde(default)]
    pub initialization: Initialization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputPaths>,
}

/// Names accepted by [`ExperimentConfig::scenario`].
pub const SCENARIOS: [&str; 4] = [
    "negative-standard-rate",
    "positive-low-rate",
    "positive-scaled",
    "royalroad-low-rate",
];

impl ExperimentConfig {
    /// Built-in scenario. With `desk_scale`, the population size is a small
    /// practical value instead of the regime's `λ_min`.
    pub fn scenario(name: &str, desk_scale: bool) -> Result<Self> {
        let base = |fitness, selection, n: Vec<usize>, lambda, chi, budget, replications| Self {
            scenario: name.to_string(),
            fitness,
            scale_base: None,
            selection,
            n,
            lambda: vec![lambda],
            chi: vec![chi],
            replications,
            base_seed: 1,
            budget,
            max_generations: None,
            cadence: default_cadence(),
            gammas: None,
            initialization: Initialization::Uniform,
            output: None,
        };
        let pick = |desk: LambdaRule| if desk_scale { desk } else { LambdaRule::RegimeMin };
        Ok(match name {
            "negative-standard-rate" => base(
                FitnessTemplate::OneMax,
                SelectionMode::Proportionate,
                vec![100],
                LambdaRule::Fixed { value: 1000 },
                ChiRule::Fixed { value: 1.0 },
                BudgetPolicy::Fixed { evaluations: 10_000_000 },
                10,
            ),
            "positive-low-rate" => base(
                FitnessTemplate::OneMax,
                SelectionMode::Proportionate,
                vec![10, 20, 40],
                pick(LambdaRule::PerN { factor: 50 }),
                ChiRule::LowRate { c: 0.5 },
                BudgetPolicy::LowRate { factor: 50.0 },
                20,
            ),
            "positive-scaled" => Self {
                scale_base: Some(8.0),
                ..base(
                    FitnessTemplate::OneMax,
                    SelectionMode::Proportionate,
                    vec![50, 100, 200],
                    pick(LambdaRule::LogN { factor: 10.0, min: 50 }),
                    ChiRule::Fixed { value: 1.0 },
                    BudgetPolicy::Scaled { factor: 100.0 },
                    20,
                )
            },
            "royalroad-low-rate" => base(
                FitnessTemplate::RoyalRoad { r: 2, weights: None },
                SelectionMode::Proportionate,
                vec![20],
                pick(LambdaRule::Fixed { value: 2000 }),
                ChiRule::LowRate { c: 0.5 },
                BudgetPolicy::Fixed { evaluations: 100_000_000 },
                20,
            ),
            other => return config(format!("unknown scenario {other:?}; known: {}", SCENARIOS.join(", "))),
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return config("replications must be at least 1");
        }
        if self.n.is_empty() || self.lambda.is_empty() || self.chi.is_empty() {
            return config("sweep axes n, lambda and chi must be non-empty");
        }
        if self.cadence == 0 {
            return config("cadence must be at least 1");
        }
        for cell in self.cells()? {
            cell.run_config(self, 0)?.validate()?;
        }
        Ok(())
    }

    /// Expands the sweep axes (n outermost, then λ, then χ) into cells.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut cells = Vec::new();
        for &n in &self.n {
            let spec = self.fitness.build(n, self.scale_base)?;
            for &lrule in &self.lambda {
                for &crule in &self.chi {
                    let (chi, c) = match crule {
                        ChiRule::Fixed { value } => (value, self.scale_base),
                        ChiRule::LowRate { c } => {
                            if !(c > 0.0 && c < 1.0) {
                                return config(format!("low-rate constant c={c} must lie in (0, 1)"));
                            }
                            ((1.0 - c) / (n as f64 * spec.max_weight()), Some(c))
                        }
                    };
                    let lambda = self.resolve_lambda(lrule, crule, &spec, chi)?;
                    cells.push(Cell {
                        index: cells.len(),
                        n,
                        lambda,
                        chi,
                        c,
                        max_evaluations: self.budget.evaluations(n, lambda),
                        spec: spec.clone(),
                    });
                }
            }
        }
        Ok(cells)
    }

    fn resolve_lambda(&self, rule: LambdaRule, chi_rule: ChiRule, spec: &FitnessSpec, chi: f64) -> Result<usize> {
        let n = spec.n();
        let lambda = match rule {
            LambdaRule::Fixed { value } => value,
            LambdaRule::PerN { factor } => factor * n,
            LambdaRule::LogN { factor, min } => min.max((factor * (n as f64).ln()).ceil() as usize),
            LambdaRule::RegimeMin => {
                let report = match (chi_rule, self.scale_base) {
                    (_, Some(base)) => regime_scaled(n, chi, base, None),
                    (ChiRule::LowRate { c }, None) if self.fitness.is_decomposed() => {
                        let r = spec.as_decomp().map_or(1, |d| d.max_block_len());
                        regime_decomposed(n, spec.max_weight(), r, c, 1.0, 3.0, None, 1.0)
                    }
                    (ChiRule::LowRate { c }, None) => regime_low_rate(n, spec.max_weight(), c, None),
                    (ChiRule::Fixed { .. }, None) => {
                        return config("lambda rule regime_min needs a low-rate chi rule or a scale base")
                    }
                };
                match (report.feasible, report.derived.lambda_min) {
                    (true, Some(l)) if l.is_finite() && l < 1e12 => l.ceil() as usize,
                    _ => return config(format!("regime gives no usable lambda_min: {:?}", report.reasons)),
                }
            }
        };
        if lambda == 0 {
            return config("lambda resolved to 0");
        }
        Ok(lambda)
    }

    pub fn job_count(&self) -> Result<usize> {
        Ok(self.cells()?.len() * self.replications)
    }
}

/// One fully resolved point of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    /// Rate constant of the low-rate rule, or the scaling base.
    pub c: Option<f64>,
    pub max_evaluations: u64,
    pub spec: FitnessSpec,
}

impl Cell {
    pub fn run_config(&self, exp: &ExperimentConfig, seed: u64) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(self.spec.clone(), exp.selection, self.chi, self.lambda, seed);
        cfg.max_evaluations = self.max_evaluations;
        cfg.max_generations = exp.max_generations.unwrap_or(u64::MAX);
        cfg.cadence = exp.cadence;
        cfg.initialization = exp.initialization;
        if let Some(g) = &exp.gammas {
            cfg.gammas = g.clone();
        }
        cfg.selection = cfg.effective_selection()?;
        Ok(cfg)
    }
}

/// Seed of replicate `replicate` in cell `cell`; streams are numbered
/// consecutively across cells.
pub fn replicate_seed(base: u64, cell: usize, replications: usize, replicate: usize) -> u64 {
    derive_seed(SeedSpec {
        base_seed: base,
        replicate_index: (cell * replications + replicate) as u64,
    })
}

/// A finished experiment with the full trace of every run, in row order.
#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub table: ResultTable,
    pub traces: Vec<RunTrace>,
}

/// Runs every cell × replication in parallel. Rows come back ordered by
/// (cell, replicate) whatever the completion order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    Ok(run_experiment_traced(cfg)?.table)
}

pub fn run_experiment_traced(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let cells = cfg.cells()?;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.replications).map(move |r| (c, r)))
        .collect();
    let results: Vec<(ResultRow, RunTrace)> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let cell = &cells[c];
            let seed = replicate_seed(cfg.base_seed, c, cfg.replications, r);
            let wrap = |e: Error| Error::Replicate {
                cell: c,
                replicate: r,
                source: Box::new(e),
            };
            let run_cfg = cell.run_config(cfg, seed).map_err(wrap)?;
            let trace = run(&run_cfg).map_err(wrap)?;
            Ok((row_for(cfg, cell, &run_cfg, r, &trace), trace))
        })
        .collect::<Result<_>>()?;
    let (rows, traces): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let table = ResultTable::from_rows(cfg.clone(), rows);
    if let Some(out) = &cfg.output {
        if let Some(p) = &out.csv {
            write_csv(&table, Path::new(p))?;
        }
        if let Some(p) = &out.json {
            write_json(&table, Path::new(p))?;
        }
        if let Some(dir) = &out.traces {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.clone(),
                source,
            })?;
            for (row, trace) in table.rows.iter().zip(&traces) {
                let name = format!("{}_cell{}_rep{}.csv", cfg.scenario, row.cell, row.replicate);
                write_trace_csv(trace, Path::new(dir).join(name).as_path())?;
            }
        }
    }
    Ok(ExperimentRun { table, traces })
}

fn row_for(cfg: &ExperimentConfig, cell: &Cell, run_cfg: &RunConfig, replicate: usize, trace: &RunTrace) -> ResultRow {
    let (status, evaluations, generation) = match trace.outcome {
        Outcome::FoundOptimum { evaluations, generation } => (RunStatus::Found, evaluations, generation),
        Outcome::BudgetExhausted => (RunStatus::Censored, trace.total_evaluations, trace.generations),
    };
    ResultRow {
        scenario: cfg.scenario.clone(),
        cell: cell.index,
        n: cell.n,
        lambda: cell.lambda,
        chi: cell.chi,
        c: cell.c,
        selection: run_cfg.selection.label(),
        replicate,
        seed: run_cfg.seed,
        outcome: status,
        evaluations,
        generation,
        best_fitness: trace.final_best_fitness,
        min_zero_bits: trace.final_min_zero_bits,
        running_min_zero_bits: trace.running_min_zero_bits,
        fallback_generations: trace.fallback_generations,
        nonfinite_events: trace.nonfinite_events,
        wall_ms: trace.wall_ms,
    }
}
