use fpsel_core::experiment::{read_json, write_csv, write_json, ExperimentConfig};
use fpsel_core::theory::{audit_conditions, regime_low_rate, AuditSource};
use fpsel_core::{run, run_experiment, FitnessSpec, Outcome, RunConfig, SelectionMode};

#[test]
fn uniform_selection_random_walk_finds_small_optimum() {
    let found = (0..100)
        .filter(|&seed| {
            let mut cfg = RunConfig::new(FitnessSpec::onemax(10), SelectionMode::Uniform, 1.0, 10, seed);
            cfg.max_evaluations = 1_000_000;
            cfg.cadence = 1000;
            run(&cfg).unwrap().found()
        })
        .count();
    assert!(found >= 95, "found in {found}/100 runs");
}

#[test]
fn single_bit_is_solved_within_a_few_generations() {
    for seed in 0..50 {
        let cfg = RunConfig::new(FitnessSpec::onemax(1), SelectionMode::Proportionate, 0.5, 4, seed);
        let trace = run(&cfg).unwrap();
        let Outcome::FoundOptimum { generation, .. } = trace.outcome else { panic!() };
        assert!(generation <= 30, "seed {seed}: {generation}");
    }
}

#[test]
fn low_rate_audit_on_a_run() {
    let spec = FitnessSpec::onemax(9);
    let regime = regime_low_rate(9, 1.0, 0.5, Some(300.0));
    let mut cfg = RunConfig::new(spec.clone(), SelectionMode::Proportionate, regime.derived.chi.unwrap(), 300, 21);
    cfg.gammas = fpsel_core::diagnostics::gamma_grid(regime.derived.gamma0);
    let trace = run(&cfg).unwrap();
    let report = audit_conditions(&spec, &regime, AuditSource::Trace(&trace)).unwrap();
    assert!(report.m1.exhaustive && report.m1.holds);
    assert!(report.m2.holds);
    assert_eq!(report.m3.violations, 0);
    assert!(!report.m4.holds, "λ = 300 is far below the required population size");
}

#[test]
fn emitted_results_reproduce_aggregates() {
    let mut cfg = ExperimentConfig::scenario("positive-low-rate", true).unwrap();
    cfg.n = vec![8, 12];
    cfg.replications = 5;
    let table = run_experiment(&cfg).unwrap();
    assert_eq!(table.rows.len(), 10);
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    write_json(&table, &json).unwrap();
    write_csv(&table, &dir.path().join("r.csv")).unwrap();
    let back = read_json(&json).unwrap();
    assert_eq!(fpsel_core::experiment::aggregate(&back.rows), table.aggregates);
    let again = run_experiment(&cfg).unwrap();
    assert_eq!(again.rows_without_wall_time(), table.rows_without_wall_time());
}
