//! Runs an experiment config in-process and writes its reports.
//!
//! cargo run --example experiment -- configs/multi_synthetic.json /tmp/off-report

use off_core::experiment::{run_experiment, ExperimentConfig};

pub fn run(config: Option<String>, out: Option<String>) -> Result<(), Box<dyn std::error::Error>> {
    let path = config.unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/cost_counterexample.json").to_owned());
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.seeds.truncate(2);
    let report = run_experiment(&cfg)?;
    print!("{}", report.render_table());
    println!("config {}", report.config_hash);
    if let Some(dir) = out {
        for file in report.write(&dir, true)? {
            println!("wrote {}", file.display());
        }
    }
    Ok(())
}

#[allow(dead_code)]
pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    run(args.next(), args.next())
}
