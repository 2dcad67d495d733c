use std::process::{Command, Output};

fn fpsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpsel")).args(args).output().expect("spawn fpsel")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn regime_reports_are_json() {
    let v = json(&fpsel(&["regime", "scaled", "--n", "100", "--chi", "1", "--c", "8"]));
    let eps = v["derived"]["epsilon"].as_f64().unwrap();
    assert!((eps - 0.43306).abs() < 1e-5);
    let v = json(&fpsel(&["regime", "negative", "--chi", "0.5"]));
    assert_eq!(v["feasible"], false);
}

#[test]
fn sweep_writes_outputs_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "scenario": "custom",
            "fitness": {"kind": "onemax"},
            "selection": {"kind": "proportionate"},
            "n": [8],
            "lambda": [{"rule": "fixed", "value": 20}],
            "chi": [{"rule": "fixed", "value": 1.0}],
            "replications": 2,
            "base_seed": 3,
            "budget": {"policy": "fixed", "evaluations": 50000}
        }"#,
    )
    .unwrap();
    let csv = dir.path().join("r.csv");
    let out = fpsel(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--replications",
        "4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["aggregates"][0]["runs"], 4);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("scenario,n,lambda,chi,c,selection,seed,outcome,evaluations,best_fitness,min_zero_bits,wall_ms"));
}

#[test]
fn run_and_diag() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let v = json(&fpsel(&[
        "run",
        "--scenario",
        "positive-scaled",
        "--desk-scale",
        "--n",
        "16",
        "--trace",
        trace.to_str().unwrap(),
    ]));
    assert_eq!(v["outcome"]["kind"], "found_optimum");
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("t,best_f,mean_f,Z_t"));

    let pop = dir.path().join("pop.txt");
    std::fs::write(&pop, "1100\n0000\n1111\n").unwrap();
    let v = json(&fpsel(&["diag", "--population", pop.to_str().unwrap(), "--gammas", "0.34"]));
    // Ranks ⌈0.34·3⌉ = 2: fitness ≥ 2 covers 6 of 6 total.
    assert!((v["beta"][0]["beta"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["zero_bits"]["min"], 0);
}

#[test]
fn audit_from_populations() {
    let dir = tempfile::tempdir().unwrap();
    let pop = dir.path().join("pops.txt");
    std::fs::write(&pop, "110000\n100000\n000000\n110000\n\n111111\n000000\n").unwrap();
    let v = json(&fpsel(&[
        "audit",
        "low-rate",
        "--n",
        "6",
        "--c",
        "0.5",
        "--lambda",
        "100",
        "--population",
        pop.to_str().unwrap(),
    ]));
    assert_eq!(v["m1"]["holds"], true);
    assert_eq!(v["m3"]["skipped_optimal"], 1);
    assert_eq!(v["m4"]["holds"], false);
}

#[test]
fn errors_exit_nonzero() {
    assert!(!fpsel(&["sweep", "--scenario", "nope"]).status.success());
    assert!(!fpsel(&["sweep"]).status.success());
    assert!(!fpsel(&["regime", "low-rate"]).status.success());
    let out = fpsel(&["sweep", "--scenario", "positive-scaled", "--desk-scale", "--replications", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("replications"));
}
