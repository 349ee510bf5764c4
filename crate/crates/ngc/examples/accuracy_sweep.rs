//! Noise sweep through the experiment harness: filtered vs raw features.
//!
//! Runs the same classification experiment twice — once with the Neumann
//! filter, once with the identity filter (no aggregation) — over a range of
//! noise levels, and prints mean test accuracy per level. This is the
//! in-process equivalent of `ngc run <config>` with two configs.
//!
//! Run with: `cargo run --release --example accuracy_sweep`

use ngc::harness::run_experiment;
use ngc::ExperimentConfig;
use std::collections::BTreeMap;
use std::error::Error;

fn main() -> Result<(), Box<dyn Error>> {
    let base = "\
experiment = noise_sweep
seeds = 0..4
graph.source = generator
graph.kind = sbm
graph.n = 600
filter.lambda = 32
filter.order = 16
data.d = 50
data.train_per_class = 60
data.val_per_class = 10
";
    let mut means: BTreeMap<String, [f64; 2]> = BTreeMap::new();
    for (slot, kind) in ["ngc", "identity"].into_iter().enumerate() {
        let text = format!("{base}filter.kind = {kind}\n");
        let cfg = ExperimentConfig::parse(&text, "<inline>")?;
        cfg.validate()?;
        let output = run_experiment(&cfg)?;
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for row in &output.rows {
            if row.metric == "accuracy_test" {
                let entry = sums.entry(row.sweep_value.clone()).or_default();
                entry.0 += row.value;
                entry.1 += 1;
            }
        }
        for (level, (sum, count)) in sums {
            means.entry(level).or_default()[slot] = sum / count as f64;
        }
    }

    println!("mean test accuracy over 5 seeds (SBM n = 600, d = 50)");
    println!("{:>6} {:>10} {:>10} {:>8}", "xi", "ngc", "identity", "margin");
    for (level, [ngc, id]) in &means {
        println!("{level:>6} {ngc:>10.3} {id:>10.3} {:>+8.3}", ngc - id);
    }
    Ok(())
}
