use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fpsel_core::diagnostics::gamma_grid;
use fpsel_core::experiment::{
    run_experiment_traced, scaling_fit, write_trace_csv, BudgetPolicy, ChiRule, ExperimentConfig, FitnessTemplate,
    LambdaRule, SCENARIOS,
};
use fpsel_core::theory::{
    audit_conditions, negative_regime, regime_low_rate, regime_low_rate_order, regime_scaled, regime_decomposed,
    AuditSource, RegimeReport,
};
use fpsel_core::{run, BitString, DiagSnapshot, FitnessSpec, Initialization, Population, SelectionMode};

#[derive(Parser)]
#[command(name = "fpsel", version, about = "Non-elitist EA experiments with fitness-proportionate selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one replicate of the first sweep cell and print its trace summary.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Replicate index whose derived seed is used.
        #[arg(long, default_value_t = 0)]
        replicate: usize,
        /// Write the per-generation trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run every cell × replication and write results.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Evaluate a parameter regime and print it as JSON.
    Regime {
        #[command(flatten)]
        regime: RegimeArgs,
    },
    /// Diagnostics of a population file (one bit string per line).
    Diag {
        #[arg(long)]
        population: PathBuf,
        #[command(flatten)]
        fitness: FitnessArgs,
        #[arg(long, value_enum, default_value_t = SelectionArg::Proportionate)]
        selection: SelectionArg,
        #[arg(long)]
        mu: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// Audit the level-based conditions for a regime, optionally on a run or
    /// population file.
    Audit {
        #[command(flatten)]
        regime: RegimeArgs,
        #[command(flatten)]
        fitness: FitnessArgs,
        /// Run the EA at the regime's parameters and audit its trace.
        #[arg(long)]
        run: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        max_evaluations: Option<u64>,
        #[arg(long, default_value_t = 1)]
        cadence: u64,
        /// Audit populations read from a file (blank line between populations).
        #[arg(long, conflicts_with = "run")]
        population: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Use the documented desk-scale population sizes.
    #[arg(long)]
    desk_scale: bool,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Fixed population sizes.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<usize>>,
    /// Fixed χ values (rate χ/n).
    #[arg(long, value_delimiter = ',', conflicts_with = "c")]
    chi: Option<Vec<f64>>,
    /// Low-rate constants c, giving χ = (1−c)/(n a₁).
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    #[arg(long)]
    scale_base: Option<f64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Fixed evaluation budget.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    max_generations: Option<u64>,
    #[arg(long)]
    cadence: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// Start from the all-zeros population.
    #[arg(long)]
    all_zeros: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    traces: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.scenario) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => ExperimentConfig::scenario(name, self.desk_scale)?,
            (None, None) => bail!("give --config or --scenario (one of {})", SCENARIOS.join(", ")),
        };
        if let Some(n) = &self.n {
            cfg.n = n.clone();
        }
        if let Some(l) = &self.lambda {
            cfg.lambda = l.iter().map(|&value| LambdaRule::Fixed { value }).collect();
        }
        if let Some(chi) = &self.chi {
            cfg.chi = chi.iter().map(|&value| ChiRule::Fixed { value }).collect();
        }
        if let Some(c) = &self.c {
            cfg.chi = c.iter().map(|&c| ChiRule::LowRate { c }).collect();
        }
        if self.scale_base.is_some() {
            cfg.scale_base = self.scale_base;
        }
        if let Some(r) = self.replications {
            cfg.replications = r;
        }
        if let Some(s) = self.base_seed {
            cfg.base_seed = s;
        }
        if let Some(b) = self.budget {
            cfg.budget = BudgetPolicy::Fixed { evaluations: b };
        }
        if self.max_generations.is_some() {
            cfg.max_generations = self.max_generations;
        }
        if let Some(k) = self.cadence {
            cfg.cadence = k;
        }
        if self.gammas.is_some() {
            cfg.gammas = self.gammas.clone();
        }
        if self.all_zeros {
            cfg.initialization = Initialization::AllZeros;
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        if self.csv.is_some() || self.json.is_some() || self.traces.is_some() {
            let out = cfg.output.get_or_insert(fpsel_core::experiment::OutputPaths {
                csv: None,
                json: None,
                traces: None,
            });
            out.csv = path(&self.csv).or(out.csv.take());
            out.json = path(&self.json).or(out.json.take());
            out.traces = path(&self.traces).or(out.traces.take());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeKind {
    /// Low rate on linear functions, explicit bound.
    LowRate,
    /// Low rate on linear functions, order value.
    LowRateOrder,
    /// Exponentially scaled fitness.
    Scaled,
    /// Low rate on decomposed (royal-road-like) functions.
    Decomposed,
    /// Standard rate, unscaled: stagnation thresholds.
    Negative,
}

#[derive(Args)]
struct RegimeArgs {
    #[arg(value_enum)]
    kind: RegimeKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    a1: f64,
    /// Rate constant (low-rate regimes) or scaling base (scaled regime).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    chi: f64,
    /// Block length of the decomposed regime.
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value_t = 1.0)]
    c_prime: f64,
    #[arg(long, default_value_t = 3.0)]
    k: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    multiplier: f64,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Largest weight ratio, for the approximation threshold.
    #[arg(long)]
    weight_ratio: Option<f64>,
}

impl RegimeArgs {
    fn report(&self) -> Result<RegimeReport> {
        let need_n = || self.n.context("--n is required for this regime");
        Ok(match self.kind {
            RegimeKind::LowRate => regime_low_rate(need_n()?, self.a1, self.c.unwrap_or(0.5), self.lambda),
            RegimeKind::LowRateOrder => regime_low_rate_order(
                need_n()?,
                self.a1,
                self.c.unwrap_or(0.5),
                self.c_prime,
                self.k,
                self.lambda,
                self.multiplier,
            ),
            RegimeKind::Scaled => regime_scaled(need_n()?, self.chi, self.c.unwrap_or(8.0), self.lambda),
            RegimeKind::Decomposed => regime_decomposed(
                need_n()?,
                self.a1,
                self.r,
                self.c.unwrap_or(0.5),
                self.c_prime,
                self.k,
                self.lambda,
                self.multiplier,
            ),
            RegimeKind::Negative => negative_regime(self.chi, self.epsilon, self.weight_ratio, self.n),
        })
    }
}

#[derive(Args)]
struct FitnessArgs {
    /// Integer weights of a linear function (default OneMax).
    #[arg(long, value_delimiter = ',', conflicts_with = "royal_road")]
    weights: Option<Vec<u64>>,
    /// Royal road block length.
    #[arg(long)]
    royal_road: Option<usize>,
    /// Scale fitness to `c^f`.
    #[arg(long = "fitness-scale")]
    fitness_scale: Option<f64>,
}

impl FitnessArgs {
    fn template(&self) -> FitnessTemplate {
        match (&self.weights, self.royal_road) {
            (Some(w), _) => FitnessTemplate::Linear { weights: w.clone() },
            (None, Some(r)) => FitnessTemplate::RoyalRoad { r, weights: None },
            (None, None) => FitnessTemplate::OneMax,
        }
    }

    fn build(&self, n: usize) -> Result<FitnessSpec> {
        Ok(self.template().build(n, self.fitness_scale)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    Proportionate,
    Uniform,
    Truncation,
}

fn selection_mode(arg: SelectionArg, mu: Option<usize>, spec: &FitnessSpec) -> Result<SelectionMode> {
    Ok(match (arg, spec.scale_base()) {
        (SelectionArg::Proportionate, Some(base)) => SelectionMode::ScaledProportionate { base },
        (SelectionArg::Proportionate, None) => SelectionMode::Proportionate,
        (SelectionArg::Uniform, _) => SelectionMode::Uniform,
        (SelectionArg::Truncation, _) => SelectionMode::Truncation {
            mu: mu.context("--mu is required for truncation selection")?,
        },
    })
}

/// Populations separated by blank lines; `#` starts a comment.
fn read_populations(path: &Path) -> Result<Vec<Population>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pops = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if !current.is_empty() {
                pops.push(Population::new(std::mem::take(&mut current))?);
            }
            continue;
        }
        let x: BitString = line.parse().with_context(|| format!("{}:{}", path.display(), i + 1))?;
        current.push(x);
    }
    if !current.is_empty() {
        pops.push(Population::new(current)?);
    }
    if pops.is_empty() {
        bail!("{} contains no bit strings", path.display());
    }
    Ok(pops)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let written = serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|()| writeln!(out));
    match written {
        // A closed pipe (`fpsel ... | head`) is not an error.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { exp, replicate, trace } => {
            let cfg = exp.resolve()?;
            let cell = cfg.cells()?.into_iter().next().context("no cells")?;
            let seed = fpsel_core::experiment::replicate_seed(cfg.base_seed, 0, cfg.replications, replicate);
            let run_cfg = cell.run_config(&cfg, seed)?;
            let result = run(&run_cfg)?;
            if let Some(path) = trace {
                write_trace_csv(&result, &path)?;
            }
            print_json(&serde_json::json!({
                "n": cell.n,
                "lambda": cell.lambda,
                "chi": cell.chi,
                "seed": seed,
                "outcome": result.outcome,
                "runtime": result.runtime(),
                "total_evaluations": result.total_evaluations,
                "generations": result.generations,
                "final_best_fitness": result.final_best_fitness,
                "final_min_zero_bits": result.final_min_zero_bits,
                "running_min_zero_bits": result.running_min_zero_bits,
                "fallback_generations": result.fallback_generations,
                "wall_ms": result.wall_ms,
            }))
        }
        Command::Sweep { exp } => {
            let cfg = exp.resolve()?;
            let done = run_experiment_traced(&cfg)?;
            let mut summary = serde_json::json!({ "aggregates": done.table.aggregates });
            let points = done.table.scaling_points();
            if points.len() >= 3 {
                summary["scaling_fit"] = match scaling_fit(&points) {
                    Ok(fit) => serde_json::to_value(fit)?,
                    Err(e) => serde_json::Value::String(e.to_string()),
                };
            }
            print_json(&summary)
        }
        Command::Regime { regime } => print_json(&regime.report()?),
        Command::Diag {
            population,
            fitness,
            selection,
            mu,
            gammas,
        } => {
            let pops = read_populations(&population)?;
            let spec = fitness.build(pops[0].n())?;
            let mode = selection_mode(selection, mu, &spec)?;
            let grid = gammas.unwrap_or_else(|| gamma_grid(None));
            let snaps = pops
                .iter()
                .map(|p| DiagSnapshot::compute(p, &spec, mode, &grid, None))
                .collect::<fpsel_core::Result<Vec<_>>>()?;
            if snaps.len() == 1 {
                print_json(&snaps[0])
            } else {
                print_json(&snaps)
            }
        }
        Command::Audit {
            regime,
            fitness,
            run: do_run,
            seed,
            max_evaluations,
            cadence,
            population,
        } => {
            let report = regime.report()?;
            if !report.feasible {
                bail!("regime infeasible: {}", report.reasons.join("; "));
            }
            let n = regime.n.context("--n is required for auditing")?;
            let spec = fitness.build(n)?;
            let mode = selection_mode(SelectionArg::Proportionate, None, &spec)?;
            let audit = if do_run {
                let chi = report.derived.chi.context("regime has no chi")?;
                let lambda = report.level_params.as_ref().map(|p| p.lambda).context("regime has no lambda")?;
                let mut cfg = fpsel_core::RunConfig::new(spec.clone(), mode, chi, lambda.ceil() as usize, seed);
                cfg.cadence = cadence;
                cfg.gammas = gamma_grid(report.derived.gamma0);
                cfg.max_evaluations = max_evaluations.unwrap_or(100_000_000);
                let trace = run(&cfg)?;
                audit_conditions(&spec, &report, AuditSource::Trace(&trace))?
            } else if let Some(path) = population {
                let pops = read_populations(&path)?;
                audit_conditions(&spec, &report, AuditSource::Populations(&pops, mode))?
            } else {
                audit_conditions(&spec, &report, AuditSource::None)?
            };
            print_json(&audit)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
