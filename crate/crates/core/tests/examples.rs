#[path = "../examples/admissions.rs"]
mod admissions;

#[test]
fn admissions_runs() {
    admissions::main().unwrap();
}

#[path = "../examples/multi_model.rs"]
mod multi_model;

#[test]
fn multi_model_runs() {
    multi_model::main().unwrap();
}

#[path = "../examples/off_lr_synthetic.rs"]
mod off_lr_synthetic;

#[test]
fn off_lr_synthetic_runs() {
    off_lr_synthetic::main().unwrap();
}

#[path = "../examples/naive_bayes.rs"]
mod naive_bayes;

#[test]
fn naive_bayes_runs() {
    naive_bayes::main().unwrap();
}

#[path = "../examples/csp_counterexample.rs"]
mod csp_counterexample;

#[test]
fn csp_counterexample_runs() {
    csp_counterexample::main().unwrap();
}

#[path = "../examples/metrics.rs"]
mod metrics;

#[test]
fn metrics_runs() {
    metrics::main().unwrap();
}

#[path = "../examples/injection.rs"]
mod injection;

#[test]
fn injection_runs() {
    injection::main().unwrap();
}

#[path = "../examples/finite_oracle.rs"]
mod finite_oracle;

#[test]
fn finite_oracle_runs() {
    finite_oracle::main().unwrap();
}

#[path = "../examples/experiment.rs"]
mod experiment;

#[test]
fn experiment_example_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    experiment::run(None, Some(dir.path().to_string_lossy().into_owned())).unwrap();
    for name in ["report.csv", "summary.json", "plot.csv"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
}
